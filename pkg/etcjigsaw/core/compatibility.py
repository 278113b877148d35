# compatibility.py
# Copyright 2017 EtC Jigsaw Workbench developers
# Licence: See LICENCE (BSD licence)

"""Pairwise compatibility of puzzle pieces by Mahalanobis gradients.

The Mahalanobis gradient compatibility (MGC) of the right side of piece
x_i and the left side of piece x_j models the gradients across x_i's
last two columns by their mean and 3 x 3 channel covariance, and scores
the gradients from x_i's last column to x_j's first column by squared
Mahalanobis distance summed over rows.  The mirrored term from x_j's side
is added so the cost treats both pieces alike.

A relation (i, j, t, side) says piece j, transformed by t, lies on the
given side of piece i in i's own orientation.  The cost of a relation is
the MGC of the pair after rotating both so that side becomes the right
side.  A CompatibilityTable holds, for each ordered pair and each side of
i, the minimum cost over the transforms the puzzle type allows and the
transform achieving it.

"""
import collections
import csv
from multiprocessing import dummy

import numpy

from . import constants
from . import raster
from . import transform


class CompatibilityError(Exception):
    """Raise when compatibilities cannot be calculated."""


Piece = collections.namedtuple("Piece", ("id", "samples"))
Piece.__doc__ = "Block raster samples of a puzzle piece and its id."

PairwiseScore = collections.namedtuple(
    "PairwiseScore", ("cost", "transform", "side")
)
PairwiseScore.__doc__ = "Minimum cost, transform of j achieving it, and side."

_DUMMY_GRADIENTS = numpy.array(constants.MGC_DUMMY_GRADIENTS, dtype=float)
_SIDE_ROTATIONS = tuple(
    transform.transform_index(
        transform.BlockTransform(rotation, constants.INVERSION_NONE, False, 0)
    )
    for rotation in constants.ROTATIONS
)
_MIRROR_H = transform.transform_index(
    transform.BlockTransform(0, constants.INVERSION_H, False, 0)
)


def pieces_from_image(image, block_size):
    """Return list of Pieces cut from image in row-major order."""
    grid = raster.partition(image, block_size, block_size)
    return [Piece(index, block) for index, block in enumerate(grid.blocks)]


def _samples(piece):
    """Return block raster of piece, which may be a Piece or an array."""
    if isinstance(piece, Piece):
        return piece.samples
    return numpy.asarray(piece)


def edge_statistics(strips):
    """Return mean and inverse covariance of edge gradients in strips.

    strips has shape (..., P, 2, 3): column 0 is an edge of a piece and
    column 1 the column next to it inside the piece.  The gradients are
    column 0 minus column 1.  The covariance includes the dummy gradients
    and a ridge of MGC_EPSILON times the mean channel variance, so it is
    never singular.

    """
    gradients = strips[..., 0, :] - strips[..., 1, :]
    mean = gradients.mean(axis=-2)
    dummies = numpy.broadcast_to(
        _DUMMY_GRADIENTS, gradients.shape[:-2] + _DUMMY_GRADIENTS.shape
    )
    samples = numpy.concatenate((gradients, dummies), axis=-2)
    centred = samples - samples.mean(axis=-2, keepdims=True)
    covariance = numpy.matmul(numpy.swapaxes(centred, -1, -2), centred) / (
        samples.shape[-2] - 1
    )
    ridge = (
        constants.MGC_EPSILON
        * numpy.trace(covariance, axis1=-2, axis2=-1)
        / constants.CHANNELS
    )
    covariance = covariance + ridge[..., None, None] * numpy.eye(
        constants.CHANNELS
    )
    return mean, numpy.linalg.inv(covariance)


def _mahalanobis_sum(difference, inverse):
    """Return squared Mahalanobis distances of difference summed over rows.

    difference has shape (..., P, 3) and inverse (..., 3, 3) or (3, 3).

    """
    return numpy.sum(
        numpy.matmul(difference, inverse) * difference, axis=(-2, -1)
    )


def mgc_cost(left, right):
    """Return MGC of the right side of left against the left side of right.

    left and right are Pieces or block rasters of equal height.

    """
    left = _samples(left).astype(numpy.float64)
    right = _samples(right).astype(numpy.float64)
    if left.shape[0] != right.shape[0]:
        raise CompatibilityError("Pieces must have the same height")
    left_strip = left[:, ::-1][:, :2]
    right_strip = right[:, :2]
    left_mean, left_inverse = edge_statistics(left_strip)
    right_mean, right_inverse = edge_statistics(right_strip)
    left_edge = left_strip[:, 0]
    right_edge = right_strip[:, 0]
    return float(
        _mahalanobis_sum(right_edge - left_edge - left_mean, left_inverse)
        + _mahalanobis_sum(left_edge - right_edge - right_mean, right_inverse)
    )


def layout_cost(canvas_blocks, occupied=None):
    """Return summed MGC over all adjacent pairs of a grid of blocks.

    canvas_blocks has shape (rows, cols, B, B, 3) and holds the blocks as
    placed and oriented.  Pairs including a cell which is False in
    occupied are skipped.

    """
    rows, cols = canvas_blocks.shape[:2]
    if occupied is None:
        occupied = numpy.ones((rows, cols), dtype=bool)
    total = 0.0
    for row in range(rows):
        for col in range(cols):
            if not occupied[row, col]:
                continue
            block = canvas_blocks[row, col]
            if col + 1 < cols and occupied[row, col + 1]:
                total += mgc_cost(block, canvas_blocks[row, col + 1])
            if row + 1 < rows and occupied[row + 1, col]:
                total += mgc_cost(
                    transform.rotate(block, 90),
                    transform.rotate(canvas_blocks[row + 1, col], 90),
                )
    return total


class EdgeModel:
    """Edge strips and gradient statistics of pieces under transforms.

    The model holds, for every piece and every action needed, the two
    outermost columns on one side and their gradient statistics, so the
    cost of any relation is a few small matrix products.

    """

    def __init__(self, pieces, transform_indices):
        """Prepare strips for the relations of pieces under transforms."""
        blocks = numpy.stack([_samples(piece) for piece in pieces])
        if blocks.ndim != 4 or blocks.shape[1] != blocks.shape[2]:
            raise CompatibilityError("Pieces must be square block rasters")
        self.transform_indices = numpy.array(transform_indices, dtype=int)
        left_actions = [
            transform.canonical_index(
                transform.compose_index(_MIRROR_H, rotation)
            )
            for rotation in _SIDE_ROTATIONS
        ]
        right_actions = [
            [
                transform.compose_index(rotation, index)
                for index in self.transform_indices
            ]
            for rotation in _SIDE_ROTATIONS
        ]
        actions = sorted(
            set(left_actions).union(*(set(row) for row in right_actions))
        )
        slot = {action: number for number, action in enumerate(actions)}
        self._left_slots = numpy.array([slot[a] for a in left_actions])
        self._right_slots = numpy.array(
            [[slot[a] for a in row] for row in right_actions]
        )

        # Transform all pieces at once with the stack as the third axis.
        stack = blocks.transpose(1, 2, 0, 3)
        strips = numpy.empty(
            (
                len(blocks),
                len(actions),
                blocks.shape[1],
                2,
                constants.CHANNELS,
            )
        )
        for number, action in enumerate(actions):
            moved = transform.apply_transform(
                stack, transform.TRANSFORMS[action]
            )
            strips[:, number] = moved[:, :2].transpose(2, 0, 1, 3)
        self._strips = strips
        self._edges = strips[..., 0, :]
        self._means, self._inverses = edge_statistics(strips)

    @property
    def n(self):
        """Return number of pieces."""
        return len(self._strips)

    def side_costs(self, i, candidates, side):
        """Return costs of relations (i, j, t, side) for j in candidates.

        The result has shape (len(candidates), len(transform_indices)).

        """
        candidates = numpy.asarray(candidates, dtype=int)
        left = self._left_slots[side]
        right = self._right_slots[side]
        left_edge = self._edges[i, left]
        rows = candidates[:, None]
        right_edges = self._edges[rows, right[None, :]]
        right_means = self._means[rows, right[None, :]]
        right_inverses = self._inverses[rows, right[None, :]]
        return _mahalanobis_sum(
            right_edges - left_edge - self._means[i, left],
            self._inverses[i, left],
        ) + _mahalanobis_sum(
            left_edge - right_edges - right_means[..., None, :],
            right_inverses,
        )

    def costs(self, i, candidates):
        """Return costs of relations (i, j, t, side) for j in candidates.

        The result has shape (len(candidates), 4, len(transform_indices)).

        """
        return numpy.stack(
            [
                self.side_costs(i, candidates, side)
                for side in range(len(constants.SIDE_OFFSETS))
            ],
            axis=1,
        )


def min_compatibility(piece_i, piece_j, puzzle_type, prune=False):
    """Return PairwiseScore minimizing C_LR(x_i, f(x_j)) over transforms f.

    The transforms enumerated are those of puzzle_type; ties go to the
    lowest transform index.

    """
    indices = transform.transforms_for_puzzle_type(puzzle_type, prune=prune)
    model = EdgeModel([piece_i, piece_j], indices)
    costs = model.side_costs(0, [1], constants.RIGHT)[0]
    best = int(numpy.argmin(costs))
    return PairwiseScore(
        float(costs[best]),
        transform.TRANSFORMS[indices[best]],
        constants.RIGHT,
    )


class CompatibilityTable:
    """Minimum relation costs for every ordered pair and side.

    costs[i, j, side] is the minimum cost of piece j on side of piece i
    and transforms[i, j, side] the index in transform.TRANSFORMS of the
    transform of j achieving it.  Diagonal entries are infinite and -1.

    """

    def __init__(self, puzzle_type, transform_indices, costs, transforms):
        """Note puzzle type, enumerated transforms, costs and argmins."""
        self.puzzle_type = puzzle_type
        self.transform_indices = tuple(transform_indices)
        costs = numpy.asarray(costs, dtype=numpy.float64)
        transforms = numpy.asarray(transforms, dtype=numpy.int64)
        costs.flags.writeable = False
        transforms.flags.writeable = False
        self.costs = costs
        self.transforms = transforms

    @property
    def n(self):
        """Return number of pieces."""
        return self.costs.shape[0]

    @property
    def lr(self):
        """Return the n x n array of minimum C_LR costs."""
        return self.costs[:, :, constants.RIGHT]

    def score(self, i, j, side=constants.RIGHT):
        """Return PairwiseScore for piece j on side of piece i."""
        if i == j:
            raise CompatibilityError("A piece has no score against itself")
        return PairwiseScore(
            float(self.costs[i, j, side]),
            transform.TRANSFORMS[self.transforms[i, j, side]],
            side,
        )

    def second_best(self):
        """Return (n, 4) array of the second lowest cost on each side.

        Infinity where a side has fewer than two candidates.

        """
        if self.n < 3:
            return numpy.full(self.costs.shape[::2], numpy.inf)
        ordered = numpy.partition(self.costs, 1, axis=1)
        return ordered[:, 1, :]

    def write_csv(self, path):
        """Write every entry as a CSV row for debugging."""
        with open(path, "w", encoding="utf-8", newline="") as output:
            writer = csv.writer(output)
            writer.writerow(
                (
                    "i",
                    "j",
                    "side",
                    "cost",
                    "rotation",
                    "inversion",
                    "negpos",
                    "color_perm",
                )
            )
            for i in range(self.n):
                for j in range(self.n):
                    if i == j:
                        continue
                    for side, name in enumerate(constants.SIDE_NAMES):
                        score = self.score(i, j, side)
                        writer.writerow(
                            (
                                i,
                                j,
                                name,
                                repr(score.cost),
                                score.transform.rotation,
                                score.transform.inversion,
                                int(score.transform.negpos),
                                score.transform.color_perm,
                            )
                        )


def _mirror_indices(transform_indices):
    """Return side and transform positions giving each mirrored relation.

    Relation (j, i, s, side) is relation (i, j, inverse(s), side') seen
    from the other piece, where side' is the opposite of side moved by
    inverse(s).  The arrays are indexed [side, position of s].

    """
    position = {}
    for number, index in enumerate(transform_indices):
        position.setdefault(index, number)
    sides = len(constants.SIDE_OFFSETS)
    source_side = numpy.empty((sides, len(transform_indices)), dtype=int)
    source_position = numpy.empty_like(source_side)
    for side, (row, col) in enumerate(constants.SIDE_OFFSETS):
        for number, index in enumerate(transform_indices):
            inverse = transform.inverse_index(index)
            source_side[side, number] = transform.side_index(
                transform.offset_index(inverse, (-row, -col))
            )
            source_position[side, number] = position[inverse]
    return source_side, source_position


def build_table(
    pieces, puzzle_type, prune=False, workers=1, chunk=64, reporter=None
):
    """Return CompatibilityTable for pieces under puzzle_type.

    Costs are calculated for pairs i < j and filled in for j > i from the
    same relations seen from the other piece, so the table is exactly
    symmetric.  Rows are shared between workers threads; each row writes
    its own slots so the table does not depend on scheduling.

    """
    n = len(pieces)
    if n < 2:
        raise CompatibilityError("At least two pieces are needed")
    indices = transform.transforms_for_puzzle_type(puzzle_type, prune=prune)
    model = EdgeModel(pieces, indices)
    sides = len(constants.SIDE_OFFSETS)
    costs = numpy.full((n, n, sides), numpy.inf)
    argmins = numpy.full((n, n, sides), -1, dtype=numpy.int64)
    source_side, source_position = _mirror_indices(indices)
    index_array = numpy.array(indices, dtype=numpy.int64)

    def fill_row(i):
        for start in range(i + 1, n, chunk):
            candidates = numpy.arange(start, min(n, start + chunk))
            forward = model.costs(i, candidates)
            best = numpy.argmin(forward, axis=-1)
            costs[i, candidates] = numpy.take_along_axis(
                forward, best[..., None], axis=-1
            )[..., 0]
            argmins[i, candidates] = index_array[best]
            mirrored = forward[:, source_side, source_position]
            best = numpy.argmin(mirrored, axis=-1)
            costs[candidates, i] = numpy.take_along_axis(
                mirrored, best[..., None], axis=-1
            )[..., 0]
            argmins[candidates, i] = index_array[best]

    if workers > 1:
        with dummy.Pool(workers) as pool:
            pool.map(fill_row, range(n - 1))
    else:
        for i in range(n - 1):
            fill_row(i)
    if reporter is not None:
        reporter.append_text_only(
            "".join(
                (
                    "Compatibility table for ",
                    str(n),
                    " pieces and ",
                    str(len(indices)),
                    " transforms done.",
                )
            )
        )
    return CompatibilityTable(puzzle_type, indices, costs, argmins)
