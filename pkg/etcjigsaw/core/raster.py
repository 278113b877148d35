# raster.py
# Copyright 2017 EtC Jigsaw Workbench developers
# Licence: See LICENCE (BSD licence)

"""Lossless raster images and their partition into blocks.

Samples are held row-major and channel-interleaved in a numpy array of
shape (height, width, 3) and dtype uint8.  The arrays inside RasterImage
and BlockGrid instances are marked read-only so values can be shared by
concurrent workers.

"""
import os

import numpy
from PIL import Image

from . import constants


class RasterError(Exception):
    """Raise when image dimensions, shapes, or formats are not usable."""


def _frozen(array):
    """Return array made read-only, copying it if it is a view."""
    array = numpy.array(array, dtype=numpy.uint8, copy=True)
    array.flags.writeable = False
    return array


class RasterImage:
    """An 8 bit RGB image."""

    def __init__(self, samples):
        """Note samples, an array-like of shape (height, width, 3)."""
        samples = numpy.asarray(samples)
        if samples.ndim != 3 or samples.shape[2] != constants.CHANNELS:
            raise RasterError(
                "".join(
                    (
                        "Image samples must have shape ",
                        "(height, width, 3), not ",
                        str(samples.shape),
                    )
                )
            )
        if samples.size and (
            samples.min() < 0 or samples.max() > constants.MAX_SAMPLE
        ):
            raise RasterError("Image samples must be in range 0 to 255")
        self._samples = _frozen(samples)

    def __eq__(self, other):
        """Return True if other has the same dimensions and samples."""
        if not isinstance(other, RasterImage):
            return NotImplemented
        return numpy.array_equal(self._samples, other._samples)

    def __repr__(self):
        """Return representation showing image dimensions."""
        return "".join(
            (
                self.__class__.__name__,
                "(width=",
                str(self.width),
                ", height=",
                str(self.height),
                ")",
            )
        )

    @property
    def samples(self):
        """Return the read-only (height, width, 3) sample array."""
        return self._samples

    @property
    def pixels(self):
        """Return the samples as a flat row-major channel-interleaved array."""
        return self._samples.reshape(-1)

    @property
    def width(self):
        """Return image width in pixels."""
        return self._samples.shape[1]

    @property
    def height(self):
        """Return image height in pixels."""
        return self._samples.shape[0]

    @property
    def channels(self):
        """Return number of channels per pixel."""
        return self._samples.shape[2]

    @property
    def bit_depth(self):
        """Return bits per sample."""
        return constants.BIT_DEPTH

    def crop(self, width, height):
        """Return the top-left width x height region of the image."""
        if not 0 < width <= self.width or not 0 < height <= self.height:
            raise RasterError("Crop must lie within the image")
        return RasterImage(self._samples[:height, :width])


class BlockGrid:
    """An image divided into rows x cols blocks of block_h x block_w pixels.

    blocks has shape (rows * cols, block_h, block_w, 3) with the blocks in
    row-major grid order.

    """

    def __init__(self, rows, cols, block_w, block_h, blocks):
        """Note grid dimensions and the blocks."""
        blocks = numpy.asarray(blocks)
        if blocks.shape != (
            rows * cols,
            block_h,
            block_w,
            constants.CHANNELS,
        ):
            raise RasterError(
                "".join(
                    (
                        "Blocks of shape ",
                        str(blocks.shape),
                        " do not fit a ",
                        str(rows),
                        " x ",
                        str(cols),
                        " grid of ",
                        str(block_w),
                        " x ",
                        str(block_h),
                        " blocks",
                    )
                )
            )
        self.rows = rows
        self.cols = cols
        self.block_w = block_w
        self.block_h = block_h
        self._blocks = _frozen(blocks)

    @property
    def blocks(self):
        """Return the read-only array of blocks."""
        return self._blocks

    @property
    def n(self):
        """Return the number of blocks."""
        return self.rows * self.cols

    def replace_blocks(self, blocks):
        """Return a BlockGrid with the same dimensions holding blocks."""
        return BlockGrid(
            self.rows, self.cols, self.block_w, self.block_h, blocks
        )


def partition(image, block_w, block_h):
    """Return BlockGrid of image divided into block_w x block_h blocks.

    Pixels beyond the last whole block column or row are cropped.

    """
    for name, size, limit in (
        ("width", block_w, image.width),
        ("height", block_h, image.height),
    ):
        if size < constants.MINIMUM_BLOCK_SIZE:
            raise RasterError(
                "".join(
                    (
                        "Block ",
                        name,
                        " ",
                        str(size),
                        " is less than ",
                        str(constants.MINIMUM_BLOCK_SIZE),
                    )
                )
            )
        if size > limit:
            raise RasterError(
                "".join(
                    (
                        "Block ",
                        name,
                        " ",
                        str(size),
                        " exceeds image ",
                        name,
                        " ",
                        str(limit),
                    )
                )
            )
    cols = image.width // block_w
    rows = image.height // block_h
    samples = image.samples[: rows * block_h, : cols * block_w]
    blocks = samples.reshape(
        rows, block_h, cols, block_w, constants.CHANNELS
    ).transpose(0, 2, 1, 3, 4)
    return BlockGrid(
        rows,
        cols,
        block_w,
        block_h,
        blocks.reshape(rows * cols, block_h, block_w, constants.CHANNELS),
    )


def reassemble(grid):
    """Return the image formed by tiling the blocks of grid in grid order."""
    samples = (
        grid.blocks.reshape(
            grid.rows,
            grid.cols,
            grid.block_h,
            grid.block_w,
            constants.CHANNELS,
        )
        .transpose(0, 2, 1, 3, 4)
        .reshape(
            grid.rows * grid.block_h,
            grid.cols * grid.block_w,
            constants.CHANNELS,
        )
    )
    return RasterImage(samples)


def is_block_multiple(image, block_w, block_h):
    """Return True if image dimensions are exact multiples of the block."""
    return not (image.width % block_w or image.height % block_h)


def tiled_crop(image, block_w, block_h):
    """Return image cropped to the area covered by whole blocks."""
    return image.crop(
        image.width // block_w * block_w, image.height // block_h * block_h
    )


def read_image(path):
    """Return RasterImage read from the lossless image file at path.

    PPM (P6, 8 bit) is the fixture format.  PNG and other formats Pillow
    reads are converted to RGB, dropping any alpha channel.

    """
    try:
        with Image.open(path) as image:
            if image.mode != "RGB":
                image = image.convert("RGB")
            return RasterImage(numpy.asarray(image))
    except (OSError, ValueError) as exc:
        raise RasterError(
            "".join(("Unable to read image '", str(path), "'"))
        ) from exc


def write_image(image, path):
    """Write image to path in the format implied by the file suffix.

    A '.ppm' suffix gives binary P6.

    """
    suffix = os.path.splitext(path)[1].lower()
    if suffix in (".jpg", ".jpeg"):
        raise RasterError("Use the JPEG channel for lossy output")
    try:
        Image.fromarray(numpy.ascontiguousarray(image.samples)).save(path)
    except (OSError, ValueError, KeyError) as exc:
        raise RasterError(
            "".join(("Unable to write image '", str(path), "'"))
        ) from exc
