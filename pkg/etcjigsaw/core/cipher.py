# cipher.py
# Copyright 2017 EtC Jigsaw Workbench developers
# Licence: See LICENCE (BSD licence)

"""Block scrambling-based image encryption and decryption.

Encryption applies four steps to the blocks of an image, each driven by
its own key: Step 1 permutes the blocks (K1), Step 2 inverts and rotates
each block (K2), Step 3 applies the negative-positive transformation to
each block with probability 0.5 (K3), and Step 4 shuffles the color
components of each block (K4).  Every key is used for all three color
components.  Decryption undoes the steps in reverse order.

"""
import json
import math
import secrets

import numpy

from . import constants
from . import keystream
from . import raster
from . import transform


class CipherError(Exception):
    """Raise when encryption or decryption cannot be done."""


class CipherConfigError(CipherError):
    """Raise when a cipher configuration is not usable."""


class KeyFileError(CipherError):
    """Raise when a key file cannot be read or written."""


class SecretKey:
    """The four 64 bit key seeds K1 to K4."""

    __slots__ = ("k1", "k2", "k3", "k4")

    def __init__(self, k1, k2, k3, k4):
        """Note the seeds, each an unsigned 64 bit integer."""
        for name, seed in zip(self.__slots__, (k1, k2, k3, k4)):
            if not isinstance(seed, int) or not 0 <= seed <= keystream.MASK64:
                raise CipherError(
                    "".join(
                        (
                            "Key ",
                            name,
                            " must be an unsigned 64 bit integer",
                        )
                    )
                )
        self.k1 = k1
        self.k2 = k2
        self.k3 = k3
        self.k4 = k4

    def __eq__(self, other):
        """Return True if other holds the same seeds."""
        if not isinstance(other, SecretKey):
            return NotImplemented
        return self.seeds() == other.seeds()

    def __hash__(self):
        """Return hash of seeds."""
        return hash(self.seeds())

    def __repr__(self):
        """Return representation without revealing the seeds."""
        return self.__class__.__name__ + "(...)"

    def seeds(self):
        """Return (k1, k2, k3, k4)."""
        return (self.k1, self.k2, self.k3, self.k4)


def generate_key(seed=None):
    """Return SecretKey drawn from a keystream seeded by seed.

    A random key is returned if seed is None.

    """
    if seed is None:
        return SecretKey(*(secrets.randbits(64) for _ in range(4)))
    stream = keystream.Keystream(seed & keystream.MASK64)
    return SecretKey(*(stream.next_u64() for _ in range(4)))


class CipherConfig:
    """Block size and the encryption steps which are enabled."""

    def __init__(
        self,
        block_w=constants.DEFAULT_BLOCK_SIZE,
        block_h=None,
        enable_scramble=True,
        enable_rotation=True,
        enable_inversion=True,
        enable_negpos=True,
        enable_colorshuffle=True,
    ):
        """Note block size and enabled steps.

        block_h defaults to block_w.  Rotation needs square blocks.

        """
        if block_h is None:
            block_h = block_w
        if block_w < constants.MINIMUM_BLOCK_SIZE or (
            block_h < constants.MINIMUM_BLOCK_SIZE
        ):
            raise CipherConfigError(
                "".join(
                    (
                        "Block size must be at least ",
                        str(constants.MINIMUM_BLOCK_SIZE),
                    )
                )
            )
        if block_w != block_h and (enable_rotation or enable_inversion):
            raise CipherConfigError(
                "".join(
                    (
                        "Rotation and inversion need square blocks, not ",
                        str(block_w),
                        " x ",
                        str(block_h),
                    )
                )
            )
        self.block_w = block_w
        self.block_h = block_h
        self.enable_scramble = bool(enable_scramble)
        self.enable_rotation = bool(enable_rotation)
        self.enable_inversion = bool(enable_inversion)
        self.enable_negpos = bool(enable_negpos)
        self.enable_colorshuffle = bool(enable_colorshuffle)

    @classmethod
    def for_puzzle_type(
        cls, puzzle_type, block_w=constants.DEFAULT_BLOCK_SIZE, block_h=None
    ):
        """Return CipherConfig enabling the steps of a puzzle type."""
        try:
            flags = constants.PUZZLE_TYPES[puzzle_type]
        except KeyError:
            raise CipherConfigError(
                "".join(("'", str(puzzle_type), "' is not a puzzle type"))
            ) from None
        return cls(block_w, block_h, *flags)

    def __eq__(self, other):
        """Return True if other has the same block size and steps."""
        if not isinstance(other, CipherConfig):
            return NotImplemented
        return self.as_dict() == other.as_dict()

    def __hash__(self):
        """Return hash of block size and steps."""
        return hash(tuple(sorted(self.as_dict().items())))

    def __repr__(self):
        """Return representation naming block size and puzzle type."""
        return "".join(
            (
                self.__class__.__name__,
                "(",
                str(self.block_w),
                "x",
                str(self.block_h),
                ", type=",
                str(self.puzzle_type),
                ")",
            )
        )

    @property
    def flags(self):
        """Return tuple of enabled steps in PUZZLE_TYPES column order."""
        return (
            self.enable_scramble,
            self.enable_rotation,
            self.enable_inversion,
            self.enable_negpos,
            self.enable_colorshuffle,
        )

    @property
    def puzzle_type(self):
        """Return puzzle type label for enabled steps, or None if none fits."""
        for label, flags in constants.PUZZLE_TYPES.items():
            if flags == self.flags:
                return label
        return None

    def as_dict(self):
        """Return configuration as a dict for key files and manifests."""
        return {
            "block_w": self.block_w,
            "block_h": self.block_h,
            "puzzle_type": self.puzzle_type,
            "enable_scramble": self.enable_scramble,
            "enable_rotation": self.enable_rotation,
            "enable_inversion": self.enable_inversion,
            "enable_negpos": self.enable_negpos,
            "enable_colorshuffle": self.enable_colorshuffle,
        }

    @classmethod
    def from_dict(cls, data):
        """Return CipherConfig from a dict made by as_dict.

        The puzzle_type label is used when the step flags are absent.

        """
        names = (
            "enable_scramble",
            "enable_rotation",
            "enable_inversion",
            "enable_negpos",
            "enable_colorshuffle",
        )
        try:
            block_w = int(data["block_w"])
            block_h = int(data.get("block_h", block_w))
            if all(name in data for name in names):
                return cls(
                    block_w, block_h, *(bool(data[name]) for name in names)
                )
            return cls.for_puzzle_type(data["puzzle_type"], block_w, block_h)
        except (KeyError, TypeError, ValueError) as exc:
            raise CipherConfigError(
                "".join(("Cipher configuration is incomplete: ", str(exc)))
            ) from exc


class KeyExpansion:
    """Block permutation and per-block transforms expanded from a key.

    Block i of the encrypted image is block permutation[i] of the plain
    image after Step 1, and transforms[i] is applied to it by Steps 2 to 4.

    """

    def __init__(self, permutation, transforms):
        """Note the permutation and the transforms."""
        if sorted(permutation) != list(range(len(permutation))):
            raise CipherError("Block permutation is not a bijection")
        if len(transforms) != len(permutation):
            raise CipherError("One transform is needed for each block")
        self.permutation = tuple(permutation)
        self.transforms = tuple(transforms)

    @property
    def n(self):
        """Return number of blocks."""
        return len(self.permutation)

    @property
    def negpos_bits(self):
        """Return the r(i) bits of Step 3."""
        return tuple(int(t.negpos) for t in self.transforms)


def expand_key(key, n, config):
    """Return KeyExpansion for n blocks from key and config.

    Disabled steps yield the identity permutation or identity transform
    components, and consume nothing from their key's stream.

    """
    if n < 1:
        raise CipherError("At least one block is needed")
    if config.enable_scramble:
        permutation = keystream.Keystream(key.k1).permutation(n)
    else:
        permutation = list(range(n))
    stream_2 = keystream.Keystream(key.k2)
    stream_3 = keystream.Keystream(key.k3)
    stream_4 = keystream.Keystream(key.k4)
    transforms = []
    for _ in range(n):
        rotation = 0
        inversion = constants.INVERSION_NONE
        if config.enable_rotation:
            rotation = constants.ROTATIONS[
                stream_2.uniform(len(constants.ROTATIONS))
            ]
        if config.enable_inversion:
            inversion = constants.INVERSIONS[
                stream_2.uniform(len(constants.INVERSIONS))
            ]
        negative = bool(stream_3.bit()) if config.enable_negpos else False
        color_perm = (
            stream_4.uniform(len(constants.COLOR_PERMUTATIONS))
            if config.enable_colorshuffle
            else 0
        )
        transforms.append(
            transform.BlockTransform(rotation, inversion, negative, color_perm)
        )
    return KeyExpansion(permutation, transforms)


def _inverse_color_perm(perm):
    """Return COLOR_PERMUTATIONS index which undoes the color shuffle perm."""
    order = constants.COLOR_PERMUTATIONS[perm]
    return constants.COLOR_PERMUTATIONS.index(
        tuple(int(k) for k in numpy.argsort(order))
    )


def _check_config(image, config):
    """Raise CipherConfigError if config cannot be used on image."""
    if not isinstance(config, CipherConfig):
        raise CipherConfigError("A CipherConfig instance is required")
    if config.block_w > image.width or config.block_h > image.height:
        raise raster.RasterError(
            "".join(
                (
                    "Block ",
                    str(config.block_w),
                    " x ",
                    str(config.block_h),
                    " exceeds image ",
                    str(image.width),
                    " x ",
                    str(image.height),
                )
            )
        )


def encrypt(image, key, config):
    """Return image encrypted by the block scrambling steps of config.

    The output is the encryption of image cropped to whole blocks.

    """
    _check_config(image, config)
    grid = raster.partition(image, config.block_w, config.block_h)
    expansion = expand_key(key, grid.n, config)
    blocks = [grid.blocks[source] for source in expansion.permutation]
    transforms = expansion.transforms
    blocks = [
        transform.rotate(transform.invert(block, t.inversion), t.rotation)
        for block, t in zip(blocks, transforms)
    ]
    blocks = [
        transform.negpos(block) if t.negpos else block
        for block, t in zip(blocks, transforms)
    ]
    blocks = [
        transform.shuffle_colors(block, t.color_perm)
        for block, t in zip(blocks, transforms)
    ]
    return raster.reassemble(grid.replace_blocks(numpy.stack(blocks)))


def decrypt(image, key, config):
    """Return image decrypted by undoing the steps of config in reverse.

    image may carry JPEG distortion, in which case the result is lossy.

    """
    _check_config(image, config)
    if not raster.is_block_multiple(image, config.block_w, config.block_h):
        raise raster.RasterError(
            "".join(
                (
                    "Encrypted image ",
                    str(image.width),
                    " x ",
                    str(image.height),
                    " is not a multiple of the block size",
                )
            )
        )
    grid = raster.partition(image, config.block_w, config.block_h)
    expansion = expand_key(key, grid.n, config)
    transforms = expansion.transforms
    blocks = [
        transform.shuffle_colors(block, _inverse_color_perm(t.color_perm))
        for block, t in zip(grid.blocks, transforms)
    ]
    blocks = [
        transform.negpos(block) if t.negpos else block
        for block, t in zip(blocks, transforms)
    ]
    blocks = [
        transform.invert(
            transform.rotate(block, (360 - t.rotation) % 360), t.inversion
        )
        for block, t in zip(blocks, transforms)
    ]
    plain = [None] * grid.n
    for block, target in zip(blocks, expansion.permutation):
        plain[target] = block
    return raster.reassemble(grid.replace_blocks(numpy.stack(plain)))


def key_space(n, config):
    """Return the number of distinct keys for n blocks under config.

    The product of n! for scrambling, 4**n for rotation, 3**n for
    inversion, 2**n for negative-positive, and 6**n for color shuffling,
    taking only the enabled steps.

    """
    if n < 1:
        raise CipherError("At least one block is needed")
    size = 1
    if config.enable_scramble:
        size *= math.factorial(n)
    for enabled, states in (
        (config.enable_rotation, len(constants.ROTATIONS)),
        (config.enable_inversion, len(constants.INVERSIONS)),
        (config.enable_negpos, 2),
        (config.enable_colorshuffle, len(constants.COLOR_PERMUTATIONS)),
    ):
        if enabled:
            size *= states**n
    return size


def key_space_bits(n, config):
    """Return log2 of key_space(n, config)."""
    return math.log2(key_space(n, config))


def write_key_file(path, key, config):
    """Write key and config to path as JSON.

    The seeds are written as decimal strings so no JSON reader rounds
    them.

    """
    data = {
        "k1": str(key.k1),
        "k2": str(key.k2),
        "k3": str(key.k3),
        "k4": str(key.k4),
        "config": config.as_dict(),
    }
    try:
        with open(path, "w", encoding="utf-8") as output:
            json.dump(data, output, indent=2, sort_keys=True)
            output.write("\n")
    except OSError as exc:
        raise KeyFileError(
            "".join(("Unable to write key file '", str(path), "'"))
        ) from exc


def read_key_file(path):
    """Return (SecretKey, CipherConfig) read from the JSON key file at path.

    The config is None if the file has no config block.

    """
    try:
        with open(path, "r", encoding="utf-8") as input_:
            data = json.load(input_)
    except (OSError, ValueError) as exc:
        raise KeyFileError(
            "".join(("Unable to read key file '", str(path), "'"))
        ) from exc
    try:
        key = SecretKey(*(int(data[name]) for name in SecretKey.__slots__))
    except (KeyError, TypeError, ValueError) as exc:
        raise KeyFileError(
            "".join(("Key file '", str(path), "' lacks seeds k1 to k4"))
        ) from exc
    config = data.get("config")
    if config is not None:
        config = CipherConfig.from_dict(config)
    return key, config
