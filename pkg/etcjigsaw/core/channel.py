# channel.py
# Copyright 2017 EtC Jigsaw Workbench developers
# Licence: See LICENCE (BSD licence)

"""Simulate the EtC transmission path through two JPEG operations.

The user compresses the encrypted image, the SNS provider decompresses
and recompresses it, and the audience decompresses the result.  Each hop
is an encode and decode by the baseline JPEG codec Pillow wraps (libjpeg,
with the Independent JPEG Group quality scaling).  A hop whose quality is
LOSSLESS passes the image through unchanged.

"""
import io
import os

import numpy
from PIL import Image

from . import constants
from . import raster

_PILLOW_SUBSAMPLING = {
    constants.SUBSAMPLING_444: 0,
    constants.SUBSAMPLING_420: 2,
}


class ChannelError(Exception):
    """Raise when a JPEG hop fails, naming the hop."""

    def __init__(self, hop, message):
        """Note the hop name and message."""
        super().__init__(": ".join((hop, message)))
        self.hop = hop


def _check_quality(quality, hop):
    """Raise ChannelError if quality is not LOSSLESS or in 1 to 100."""
    if quality == constants.LOSSLESS:
        return
    if isinstance(quality, bool) or not isinstance(quality, int):
        raise ChannelError(
            hop,
            "".join(("Quality '", str(quality), "' is not an integer")),
        )
    if not 1 <= quality <= 100:
        raise ChannelError(
            hop,
            "".join(("Quality ", str(quality), " is not in range 1 to 100")),
        )


class ChannelConfig:
    """JPEG quality at the user and SNS hops, and chroma subsampling."""

    def __init__(
        self,
        user_quality=constants.LOSSLESS,
        sns_quality=constants.LOSSLESS,
        chroma_subsampling=constants.SUBSAMPLING_420,
    ):
        """Note qualities, each 1 to 100 or LOSSLESS, and subsampling."""
        _check_quality(user_quality, constants.USER_HOP)
        _check_quality(sns_quality, constants.SNS_HOP)
        if chroma_subsampling not in _PILLOW_SUBSAMPLING:
            raise ChannelError(
                constants.USER_HOP,
                "".join(
                    (
                        "Chroma subsampling '",
                        str(chroma_subsampling),
                        "' is not 4:4:4 or 4:2:0",
                    )
                ),
            )
        self.user_quality = user_quality
        self.sns_quality = sns_quality
        self.chroma_subsampling = chroma_subsampling

    @property
    def is_lossless(self):
        """Return True if both hops are bypassed."""
        return (
            self.user_quality == constants.LOSSLESS
            and self.sns_quality == constants.LOSSLESS
        )

    def as_dict(self):
        """Return configuration as a dict for result metadata."""
        return {
            "user_quality": self.user_quality,
            "sns_quality": self.sns_quality,
            "chroma_subsampling": self.chroma_subsampling,
        }


def encode_jpeg(
    image,
    quality,
    chroma_subsampling=constants.SUBSAMPLING_420,
    hop=constants.USER_HOP,
):
    """Return JFIF bytes of image compressed at quality."""
    _check_quality(quality, hop)
    if quality == constants.LOSSLESS:
        raise ChannelError(hop, "A lossless hop has no JPEG encoding")
    buffer = io.BytesIO()
    try:
        Image.fromarray(numpy.ascontiguousarray(image.samples)).save(
            buffer,
            format="JPEG",
            quality=quality,
            subsampling=_PILLOW_SUBSAMPLING[chroma_subsampling],
            optimize=False,
        )
    except (OSError, ValueError, KeyError) as exc:
        raise ChannelError(hop, "JPEG encoding failed") from exc
    return buffer.getvalue()


def decode_jpeg(data, hop=constants.USER_HOP):
    """Return RasterImage decoded from JFIF bytes."""
    try:
        with Image.open(io.BytesIO(data)) as decoded:
            return raster.RasterImage(numpy.asarray(decoded.convert("RGB")))
    except (OSError, ValueError) as exc:
        raise ChannelError(hop, "JPEG decoding failed") from exc


def single_hop(
    image,
    quality,
    chroma_subsampling=constants.SUBSAMPLING_420,
    hop=constants.USER_HOP,
    keep_path=None,
):
    """Return image after one JPEG encode and decode at quality.

    A LOSSLESS quality returns image unchanged.  The JFIF file is written
    to keep_path when given.

    """
    _check_quality(quality, hop)
    if quality == constants.LOSSLESS:
        return image
    data = encode_jpeg(image, quality, chroma_subsampling, hop)
    if keep_path is not None:
        try:
            with open(keep_path, "wb") as output:
                output.write(data)
        except OSError as exc:
            raise ChannelError(
                hop,
                "".join(("Unable to keep '", str(keep_path), "'")),
            ) from exc
    return decode_jpeg(data, hop)


def transmit(encrypted, config, keep_directory=None, stem="image"):
    """Return encrypted image as the audience receives it.

    The image is compressed at the user quality, decompressed, compressed
    at the SNS quality, and decompressed.  With keep_directory the two
    JFIF files are written there as <stem>_user.jpg and <stem>_sns.jpg.

    """
    image = encrypted
    for hop, quality in (
        (constants.USER_HOP, config.user_quality),
        (constants.SNS_HOP, config.sns_quality),
    ):
        keep_path = None
        if keep_directory is not None and quality != constants.LOSSLESS:
            keep_path = os.path.join(
                keep_directory, "".join((stem, "_", hop, ".jpg"))
            )
        image = single_hop(
            image,
            quality,
            chroma_subsampling=config.chroma_subsampling,
            hop=hop,
            keep_path=keep_path,
        )
    return image


def compressed_size(
    image, quality, chroma_subsampling=constants.SUBSAMPLING_420
):
    """Return size in bytes of image JPEG compressed at quality."""
    return len(encode_jpeg(image, quality, chroma_subsampling))


def mse(image, other):
    """Return mean squared error between two images of equal size."""
    if image.samples.shape != other.samples.shape:
        raise raster.RasterError("Images must have the same dimensions")
    difference = image.samples.astype(numpy.float64) - other.samples
    return float(numpy.mean(difference * difference))


def psnr(image, other):
    """Return peak signal to noise ratio in dB, infinite for equal images."""
    error = mse(image, other)
    if error == 0:
        return float("inf")
    return float(10 * numpy.log10(constants.MAX_SAMPLE**2 / error))
