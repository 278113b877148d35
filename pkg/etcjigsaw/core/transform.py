# transform.py
# Copyright 2017 EtC Jigsaw Workbench developers
# Licence: See LICENCE (BSD licence)

"""Per-block transforms: rotation, inversion, negative-positive, colors.

A BlockTransform is applied as the composite f_R o f_I o f_N o f_C: the
color components are shuffled first, then the negative-positive
transformation, then the inversion, and finally the rotation.

The 144 enumerated transforms, 4 rotations x 3 inversions x 2 polarities
x 6 color orders, realise 96 distinct actions on square blocks because a
rotation combined with one inversion equals another rotation combined
with the other inversion.  The canonical transform for an action is the
one with the lowest index in TRANSFORMS.

"""
import collections
import functools

import numpy

from . import constants


class TransformError(Exception):
    """Raise when a transform cannot be applied to a block."""


BlockTransform = collections.namedtuple(
    "BlockTransform", ("rotation", "inversion", "negpos", "color_perm")
)
BlockTransform.__doc__ = """Rotation, inversion, polarity, and color order.

rotation is degrees counter-clockwise, inversion one of '0', 'H', 'V',
negpos a bool, and color_perm the COLOR_PERMUTATIONS index 0 to 5.
"""

IDENTITY = BlockTransform(0, constants.INVERSION_NONE, False, 0)

TRANSFORMS = tuple(
    BlockTransform(rotation, inversion, negpos, color_perm)
    for rotation in constants.ROTATIONS
    for inversion in constants.INVERSIONS
    for negpos in (False, True)
    for color_perm in range(len(constants.COLOR_PERMUTATIONS))
)
_TRANSFORM_INDEX = {t: index for index, t in enumerate(TRANSFORMS)}

# Distinct values, and distinct from their complements, in every position.
_MARKED = numpy.arange(27, dtype=numpy.uint8).reshape(3, 3, 3)


def transform_index(transform):
    """Return index of transform in TRANSFORMS."""
    try:
        return _TRANSFORM_INDEX[transform]
    except KeyError:
        raise TransformError(
            "".join(("'", str(transform), "' is not a block transform"))
        ) from None


def rotate(block, rotation):
    """Return block rotated counter-clockwise by rotation degrees.

    block may be a 2-D array, such as a canvas of piece numbers, or a
    block raster.

    """
    if rotation not in constants.ROTATIONS:
        raise TransformError(
            "".join(("Rotation ", str(rotation), " is not a right angle"))
        )
    if rotation in (90, 270) and block.shape[0] != block.shape[1]:
        raise TransformError(
            "".join(
                (
                    "Rotation by ",
                    str(rotation),
                    " needs a square block, not ",
                    str(block.shape[1]),
                    " x ",
                    str(block.shape[0]),
                )
            )
        )
    return numpy.rot90(block, k=rotation // 90, axes=(0, 1))


def invert(block, inversion):
    """Return block mirrored left-right for 'H' or top-bottom for 'V'."""
    if inversion == constants.INVERSION_NONE:
        return block
    if inversion == constants.INVERSION_H:
        return numpy.flip(block, axis=1)
    if inversion == constants.INVERSION_V:
        return numpy.flip(block, axis=0)
    raise TransformError(
        "".join(("Inversion '", str(inversion), "' is not H, V, or 0"))
    )


def negpos(block, bit_depth=constants.BIT_DEPTH):
    """Return block with every sample p replaced by p xor (2**bit_depth-1)."""
    return numpy.bitwise_xor(block, (1 << bit_depth) - 1).astype(block.dtype)


def shuffle_colors(block, perm):
    """Return block with channel k from COLOR_PERMUTATIONS[perm][k]."""
    if block.ndim < 1 or block.shape[-1] != constants.CHANNELS:
        raise TransformError(
            "".join(
                (
                    "Color shuffling needs 3 channels, not ",
                    str(block.shape[-1] if block.ndim else 0),
                )
            )
        )
    return block[..., list(constants.COLOR_PERMUTATIONS[perm])]


def apply_geometry(array, transform):
    """Return array inverted and then rotated as transform specifies.

    Only the geometric part of transform is applied, so array may be a
    canvas of piece numbers as well as a block raster.

    """
    return rotate(invert(array, transform.inversion), transform.rotation)


def apply_transform(block, transform):
    """Return block transformed by f_R o f_I o f_N o f_C."""
    if transform.color_perm:
        block = shuffle_colors(block, transform.color_perm)
    if transform.negpos:
        block = negpos(block)
    return numpy.ascontiguousarray(apply_geometry(block, transform))


_GroupTables = collections.namedtuple(
    "_GroupTables", ("canonical", "compose", "inverse", "offset_matrix")
)


@functools.lru_cache(maxsize=None)
def _group_tables():
    """Return canonical, composition, inverse, and offset tables.

    Actions are identified by their effect on a marked block whose samples
    are all distinct.

    """
    keys = [apply_transform(_MARKED, t).tobytes() for t in TRANSFORMS]
    first = {}
    for index, key in enumerate(keys):
        first.setdefault(key, index)
    canonical = numpy.array([first[key] for key in keys], dtype=numpy.int64)
    images = [apply_transform(_MARKED, t) for t in TRANSFORMS]
    compose = numpy.empty((len(TRANSFORMS),) * 2, dtype=numpy.int64)
    for outer, transform in enumerate(TRANSFORMS):
        for inner, image in enumerate(images):
            compose[outer, inner] = first[
                apply_transform(image, transform).tobytes()
            ]
    identity = transform_index(IDENTITY)
    inverse = numpy.empty(len(TRANSFORMS), dtype=numpy.int64)
    for index in range(len(TRANSFORMS)):
        inverse[index] = min(
            other
            for other in range(len(TRANSFORMS))
            if compose[index, other] == identity
        )

    # Columns are the images of the down and right unit offsets.
    marks = numpy.zeros((3, 3), dtype=numpy.int64)
    marks[2, 1] = 1
    marks[1, 2] = 2
    offset_matrix = numpy.empty((len(TRANSFORMS), 2, 2), dtype=numpy.int64)
    for index, transform in enumerate(TRANSFORMS):
        moved = apply_geometry(marks, transform)
        for column, mark in enumerate((1, 2)):
            row, col = numpy.argwhere(moved == mark)[0]
            offset_matrix[index, :, column] = (row - 1, col - 1)
    for array in (canonical, compose, inverse, offset_matrix):
        array.flags.writeable = False
    return _GroupTables(canonical, compose, inverse, offset_matrix)


def canonical_index(index):
    """Return index of the canonical transform with the same action."""
    return int(_group_tables().canonical[index])


def canonical_transform(transform):
    """Return the canonical transform with the same action as transform."""
    return TRANSFORMS[canonical_index(transform_index(transform))]


def compose_index(outer, inner):
    """Return canonical index of transform outer applied after inner."""
    return int(_group_tables().compose[outer, inner])


def compose_transforms(outer, inner):
    """Return canonical transform equal to outer applied after inner."""
    return TRANSFORMS[
        compose_index(transform_index(outer), transform_index(inner))
    ]


def inverse_index(index):
    """Return canonical index of the inverse of transform index."""
    return int(_group_tables().inverse[index])


def invert_transform(transform):
    """Return the canonical transform undoing transform."""
    return TRANSFORMS[inverse_index(transform_index(transform))]


def composition_table():
    """Return read-only array of canonical indices of outer after inner."""
    return _group_tables().compose


def inverse_table():
    """Return read-only array of canonical inverse indices."""
    return _group_tables().inverse


def offset_index(index, offset):
    """Return (row, column) offset moved by the geometry of transform index.

    Used to find where a neighbour lies after a cluster of pieces is
    transformed as a whole.

    """
    matrix = _group_tables().offset_matrix[index]
    return (
        int(matrix[0, 0] * offset[0] + matrix[0, 1] * offset[1]),
        int(matrix[1, 0] * offset[0] + matrix[1, 1] * offset[1]),
    )


def transform_offset(transform, offset):
    """Return (row, column) offset moved by the geometry of transform."""
    return offset_index(transform_index(transform), offset)


def side_index(offset):
    """Return the side constant for a unit (row, column) offset."""
    return constants.SIDE_OFFSETS.index(tuple(offset))


def puzzle_type_flags(puzzle_type):
    """Return the enabled steps for puzzle_type from PUZZLE_TYPES."""
    try:
        return constants.PUZZLE_TYPES[puzzle_type]
    except KeyError:
        raise TransformError(
            "".join(("'", str(puzzle_type), "' is not a puzzle type"))
        ) from None


def transforms_for_puzzle_type(puzzle_type, prune=False):
    """Return indices of the transforms a solver enumerates for puzzle_type.

    Type 1 enumerates only the identity.  Rotations are enumerated for
    every other type, inversions for I types, polarity for N types, and
    color orders for C types: 144 transforms for Type INC.

    With prune True only canonical transforms are returned, one for each
    distinct action, which leaves every minimum over the set unchanged.

    """
    _, rotation, inversion, negative, color = puzzle_type_flags(puzzle_type)
    indices = []
    for index, transform in enumerate(TRANSFORMS):
        if transform.rotation and not rotation:
            continue
        if transform.inversion != constants.INVERSION_NONE and not inversion:
            continue
        if transform.negpos and not negative:
            continue
        if transform.color_perm and not color:
            continue
        if prune and canonical_index(index) != index:
            continue
        indices.append(index)
    return tuple(indices)


def global_symmetries(puzzle_type, rows, cols):
    """Return canonical indices of whole-canvas transforms for puzzle_type.

    These transforms map a rows x cols canvas onto itself and leave every
    pairwise compatibility unchanged, so a solver cannot tell the
    resulting assemblies apart.

    """
    symmetries = []
    for index in transforms_for_puzzle_type(puzzle_type, prune=True):
        transform = TRANSFORMS[index]
        if rows != cols and transform.rotation in (90, 270):
            continue
        symmetries.append(index)
    return tuple(symmetries)
