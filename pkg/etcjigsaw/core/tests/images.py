# images.py
# Copyright 2017 EtC Jigsaw Workbench developers
# Licence: See LICENCE (BSD licence)

"""Test images: linear gradients, random blocks, and a natural photograph.

Pieces cut from a linear gradient have zero compatibility cost against
their true neighbours and a positive cost against every other piece, so
the solved puzzle is known exactly.  Gradients fit grids up to 24 x 24
pixels.

"""
import numpy

from .. import raster

try:
    from skimage import data as skimage_data
except ImportError:  # The test extra is not installed.
    skimage_data = None


def gradient_samples(rows, cols, block=8):
    """Return uint8 samples of a linear gradient on a rows x cols grid."""
    row = numpy.arange(rows * block)[:, None]
    col = numpy.arange(cols * block)[None, :]
    channels = numpy.broadcast_arrays(
        10 + 4 * row + 5 * col,
        20 + 2 * row + 7 * col,
        200 - 3 * row - 2 * col,
    )
    return numpy.stack(channels, axis=-1).astype(numpy.uint8)


def gradient_image(rows, cols, block=8):
    """Return RasterImage of a linear gradient on a rows x cols grid."""
    return raster.RasterImage(gradient_samples(rows, cols, block))


def random_image(width, height, seed=0):
    """Return RasterImage of uniformly random samples."""
    generator = numpy.random.default_rng(seed)
    return raster.RasterImage(
        generator.integers(0, 256, size=(height, width, 3), dtype=numpy.uint8)
    )


def smooth_image(width=64, height=64):
    """Return RasterImage of slowly varying samples."""
    row = numpy.arange(height)[:, None]
    col = numpy.arange(width)[None, :]
    channels = numpy.broadcast_arrays(
        128 + 100 * numpy.sin(row / 9.0) * numpy.cos(col / 13.0),
        128 + 90 * numpy.cos((row + col) / 17.0),
        60 + row + col,
    )
    return raster.RasterImage(
        numpy.clip(numpy.stack(channels, axis=-1), 0, 255).astype(numpy.uint8)
    )


def natural_image(width=256, height=256):
    """Return RasterImage cut from the scikit-image cat photograph."""
    samples = skimage_data.chelsea()
    return raster.RasterImage(samples[:height, 100 : 100 + width])
