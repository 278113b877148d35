# assembly.py
# Copyright 2017 EtC Jigsaw Workbench developers
# Licence: See LICENCE (BSD licence)

"""Tree-based assembly of puzzle pieces from a compatibility table.

Every piece starts as a cluster of its own.  Relations are taken in
ascending order of confidence weight, and a relation joining pieces in
different clusters merges the clusters if the smaller one, moved and
transformed as a rigid whole so the relation holds, collides with no
occupied cell and the merged cluster still fits the target canvas.  The
largest cluster is then placed on the canvas in the window keeping most
pieces, and the remaining pieces fill the holes one at a time, best
local cost first.

The assembly never sees the key or the plain image: only pixel data of
the pieces reaches it.

"""
import collections
import functools

import numpy

from . import compatibility
from . import constants
from . import raster
from . import transform

# Piece is defined with the compatibility calculations.
Piece = compatibility.Piece


class AssemblyError(Exception):
    """Raise when pieces cannot be assembled."""


class AssemblyResult:
    """Pieces placed and oriented on a rows x cols canvas.

    canvas holds the id of the piece at each cell, -1 for an empty cell,
    and orientations the index in transform.TRANSFORMS of the transform
    applied to the piece at each cell, -1 for an empty cell.

    """

    def __init__(self, canvas, orientations, puzzle_type, unplaced=()):
        """Note canvas of piece ids and their orientations."""
        canvas = numpy.array(canvas, dtype=numpy.int64)
        orientations = numpy.array(orientations, dtype=numpy.int64)
        if canvas.ndim != 2 or canvas.shape != orientations.shape:
            raise AssemblyError("Canvas and orientations must match in shape")
        placed = canvas[canvas >= 0]
        if len(set(placed.tolist())) != len(placed):
            raise AssemblyError("A piece is placed in more than one cell")
        if ((canvas >= 0) != (orientations >= 0)).any():
            raise AssemblyError("Every placed piece needs an orientation")
        canvas.flags.writeable = False
        orientations.flags.writeable = False
        self.canvas = canvas
        self.orientations = orientations
        self.puzzle_type = puzzle_type
        self.unplaced = tuple(sorted(unplaced))

    def __eq__(self, other):
        """Return True if other places the same pieces the same way."""
        if not isinstance(other, AssemblyResult):
            return NotImplemented
        return (
            numpy.array_equal(self.canvas, other.canvas)
            and numpy.array_equal(self.orientations, other.orientations)
            and self.puzzle_type == other.puzzle_type
        )

    @property
    def rows(self):
        """Return canvas rows."""
        return self.canvas.shape[0]

    @property
    def cols(self):
        """Return canvas columns."""
        return self.canvas.shape[1]

    @property
    def placement(self):
        """Return dict of piece id to (row, column)."""
        return {
            int(self.canvas[row, col]): (int(row), int(col))
            for row, col in numpy.argwhere(self.canvas >= 0)
        }

    @property
    def orientation(self):
        """Return dict of piece id to the BlockTransform applied to it."""
        return {
            int(self.canvas[row, col]): transform.TRANSFORMS[
                self.orientations[row, col]
            ]
            for row, col in numpy.argwhere(self.canvas >= 0)
        }

    @property
    def is_complete(self):
        """Return True if no cell is empty."""
        return bool((self.canvas >= 0).all())

    def transformed(self, index):
        """Return the result with the whole canvas transformed by index.

        Applying the transform to the rendered image gives the rendering
        of the returned result.

        """
        symmetry = transform.TRANSFORMS[index]
        canvas = transform.apply_geometry(self.canvas, symmetry)
        orientations = transform.apply_geometry(self.orientations, symmetry)
        composed = transform.composition_table()[index]
        orientations = numpy.where(
            orientations >= 0, composed[orientations], -1
        )
        return AssemblyResult(
            canvas, orientations, self.puzzle_type, self.unplaced
        )

    def interpretations(self):
        """Return list of (symmetry index, result) for each global symmetry.

        Every pairwise cost is unchanged by these symmetries, so pixel data
        cannot choose between the results.

        """
        return [
            (index, self.transformed(index))
            for index in transform.global_symmetries(
                self.puzzle_type, self.rows, self.cols
            )
        ]

    def oriented_blocks(self, pieces):
        """Return (rows, cols, B, B, 3) array of the blocks as placed."""
        shape = numpy.shape(pieces[0].samples)
        blocks = numpy.zeros(
            (self.rows, self.cols) + shape, dtype=numpy.uint8
        )
        for row, col in numpy.argwhere(self.canvas >= 0):
            blocks[row, col] = transform.apply_transform(
                pieces[self.canvas[row, col]].samples,
                transform.TRANSFORMS[self.orientations[row, col]],
            )
        return blocks

    def render(self, pieces):
        """Return RasterImage of the assembly, empty cells black."""
        blocks = self.oriented_blocks(pieces)
        size = blocks.shape[2]
        grid = raster.BlockGrid(
            self.rows,
            self.cols,
            size,
            size,
            blocks.reshape((self.rows * self.cols,) + blocks.shape[2:]),
        )
        return raster.reassemble(grid)

    def total_cost(self, pieces):
        """Return summed MGC over adjacent placed pieces."""
        return compatibility.layout_cost(
            self.oriented_blocks(pieces).astype(numpy.float64),
            occupied=self.canvas >= 0,
        )

    def as_dict(self):
        """Return result as a dict for a JSON manifest."""
        cells = []
        for row, col in numpy.argwhere(self.canvas >= 0):
            orientation = transform.TRANSFORMS[self.orientations[row, col]]
            cells.append(
                {
                    "piece": int(self.canvas[row, col]),
                    "row": int(row),
                    "col": int(col),
                    "rotation": orientation.rotation,
                    "inversion": orientation.inversion,
                    "negpos": orientation.negpos,
                    "color_perm": orientation.color_perm,
                }
            )
        return {
            "rows": self.rows,
            "cols": self.cols,
            "puzzle_type": self.puzzle_type,
            "cells": cells,
            "unplaced": list(self.unplaced),
        }

    @classmethod
    def from_dict(cls, data):
        """Return AssemblyResult from a dict made by as_dict."""
        try:
            canvas = numpy.full((data["rows"], data["cols"]), -1)
            orientations = numpy.full_like(canvas, -1)
            for cell in data["cells"]:
                canvas[cell["row"], cell["col"]] = cell["piece"]
                orientations[cell["row"], cell["col"]] = (
                    transform.transform_index(
                        transform.BlockTransform(
                            cell["rotation"],
                            cell["inversion"],
                            bool(cell["negpos"]),
                            cell["color_perm"],
                        )
                    )
                )
            return cls(
                canvas,
                orientations,
                data["puzzle_type"],
                data.get("unplaced", ()),
            )
        except (KeyError, TypeError, ValueError, IndexError) as exc:
            raise AssemblyError("Result manifest is not usable") from exc


class _Cluster:
    """Pieces joined so far, with relative cells and absolute orientations."""

    __slots__ = ("members", "cells")

    def __init__(self, piece, orientation):
        self.members = {piece: ((0, 0), orientation)}
        self.cells = {(0, 0): piece}

    def __len__(self):
        return len(self.members)

    def extent(self, extra=()):
        """Return (rows, cols) spanned by the cells and extra cells."""
        extra = list(extra)
        rows = [cell[0] for cell in self.cells] + [cell[0] for cell in extra]
        cols = [cell[1] for cell in self.cells] + [cell[1] for cell in extra]
        return max(rows) - min(rows) + 1, max(cols) - min(cols) + 1

    def transform(self, index):
        """Transform the cluster as a whole by transform index."""
        members = {}
        for piece, (cell, orientation) in self.members.items():
            members[piece] = (
                transform.offset_index(index, cell),
                transform.compose_index(index, orientation),
            )
        self.members = members
        self.cells = {cell: piece for piece, (cell, _) in members.items()}


@functools.lru_cache(maxsize=None)
def _mirror_sides():
    """Return (144, 4) array giving the side a relation has seen from j.

    Piece i is on that side of piece j when j is on the given side of i
    and j is transformed by the indexed transform.

    """
    sides = numpy.empty(
        (len(transform.TRANSFORMS), len(constants.SIDE_OFFSETS)), dtype=int
    )
    for index in range(len(transform.TRANSFORMS)):
        inverse = transform.inverse_index(index)
        for side, (row, col) in enumerate(constants.SIDE_OFFSETS):
            sides[index, side] = transform.side_index(
                transform.offset_index(inverse, (-row, -col))
            )
    return sides


def _ratios(costs, denominators):
    """Return costs divided by denominators, 0 for 0 and inf for x / 0."""
    out = numpy.where(costs == 0, 0.0, numpy.inf)
    numpy.divide(costs, denominators, out=out, where=denominators > 0)
    return numpy.where(costs == 0, 0.0, out)


def ordered_relations(table, ratio_ordering=True):
    """Return arrays i, j, side of relations i < j in merge order.

    With ratio_ordering the weight of a relation is the larger of its
    ratios, seen from each piece, of its cost to the best cost of any
    other piece on the same side.  Otherwise the weight is the cost.
    Ties are broken by cost, then lowest (i, j, side).

    """
    n = table.n
    first, second = numpy.triu_indices(n, 1)
    sides_count = len(constants.SIDE_OFFSETS)
    i = numpy.repeat(first, sides_count)
    j = numpy.repeat(second, sides_count)
    side = numpy.tile(numpy.arange(sides_count), len(first))
    costs = table.costs[i, j, side]
    keep = numpy.isfinite(costs)
    i, j, side, costs = i[keep], j[keep], side[keep], costs[keep]
    if ratio_ordering:
        best = table.costs.min(axis=1)
        nearest = table.costs.argmin(axis=1)
        runner_up = table.second_best()

        def ratio(rows, others, sides):
            denominators = numpy.where(
                nearest[rows, sides] == others,
                runner_up[rows, sides],
                best[rows, sides],
            )
            return _ratios(costs, denominators)

        mirrored = _mirror_sides()[table.transforms[i, j, side], side]
        weights = numpy.maximum(ratio(i, j, side), ratio(j, i, mirrored))
    else:
        weights = costs
    order = numpy.lexsort((side, j, i, costs, weights))
    return i[order], j[order], side[order]


def _fits(extent, rows, cols, rotations):
    """Return True if extent fits rows x cols, or cols x rows if rotating."""
    height, width = extent
    if height <= rows and width <= cols:
        return True
    return rotations and height <= cols and width <= rows


def _merge(keep, move, i, j, relation, side, limits):
    """Merge cluster move into keep so j has relation on side of i.

    Return False, leaving both clusters unchanged, if cells collide or the
    merged cluster does not fit the limits (rows, cols, rotations), which
    is None for no size constraint.

    """
    cell_i, orientation_i = keep.members[i]
    cell_j, orientation_j = move.members[j]
    target_orientation = transform.compose_index(orientation_i, relation)
    step = transform.offset_index(
        orientation_i, constants.SIDE_OFFSETS[side]
    )
    target_cell = (cell_i[0] + step[0], cell_i[1] + step[1])
    motion = transform.compose_index(
        target_orientation, transform.inverse_index(orientation_j)
    )
    moved = {}
    for piece, (cell, orientation) in move.members.items():
        offset = transform.offset_index(
            motion, (cell[0] - cell_j[0], cell[1] - cell_j[1])
        )
        new_cell = (target_cell[0] + offset[0], target_cell[1] + offset[1])
        if new_cell in keep.cells:
            return False
        moved[piece] = (
            new_cell,
            transform.compose_index(motion, orientation),
        )
    if limits is not None:
        extent = keep.extent([cell for cell, _ in moved.values()])
        if not _fits(extent, *limits):
            return False
    keep.members.update(moved)
    keep.cells.update((cell, piece) for piece, (cell, _) in moved.items())
    return True


def merge_clusters(
    table, ratio_ordering=True, constrain_size=True, rows=None, cols=None
):
    """Return list of clusters after merging along ordered relations.

    Each cluster is a dict of piece id to ((row, col), orientation index)
    with cells relative to the cluster's first piece.

    """
    n = table.n
    rotations = transform.puzzle_type_flags(table.puzzle_type)[1]
    limits = (rows, cols, rotations) if constrain_size else None
    identity = transform.transform_index(transform.IDENTITY)
    owner = list(range(n))
    clusters = {piece: _Cluster(piece, identity) for piece in range(n)}
    mirror = _mirror_sides()
    for i, j, side in zip(*ordered_relations(table, ratio_ordering)):
        if len(clusters) == 1:
            break
        i, j, side = int(i), int(j), int(side)
        relation = int(table.transforms[i, j, side])
        if owner[i] == owner[j]:
            continue
        if len(clusters[owner[i]]) < len(clusters[owner[j]]):
            side = int(mirror[relation, side])
            relation = transform.inverse_index(relation)
            i, j = j, i
        keep = owner[i]
        move = owner[j]
        if not _merge(
            clusters[keep], clusters[move], i, j, relation, side, limits
        ):
            continue
        for piece in clusters[move].members:
            owner[piece] = keep
        del clusters[move]
    return [clusters[key].members for key in sorted(clusters)]


def _largest(clusters):
    """Return the largest cluster, lowest piece id breaking ties."""
    return max(clusters, key=lambda members: (len(members), -min(members)))


def _place_cluster(members, rows, cols, rotations):
    """Return canvas, orientations, and pieces outside the chosen window.

    A cluster fitting only cols x rows is turned a quarter.  The window
    keeping most pieces wins, the largest (row, col) origin breaking
    ties.

    """
    cluster = _Cluster(0, 0)
    cluster.members = dict(members)
    cluster.cells = {cell: piece for piece, (cell, _) in members.items()}
    if rotations and not _fits(cluster.extent(), rows, cols, False):
        if _fits(cluster.extent(), cols, rows, False):
            cluster.transform(
                transform.transform_index(
                    transform.BlockTransform(
                        90, constants.INVERSION_NONE, False, 0
                    )
                )
            )
    cells = numpy.array(sorted(cluster.cells))
    low = cells.min(axis=0)
    high = cells.max(axis=0)
    best = None
    for top in range(
        min(low[0], high[0] - rows + 1), max(low[0], high[0] - rows + 1) + 1
    ):
        inside_rows = (cells[:, 0] >= top) & (cells[:, 0] < top + rows)
        for left in range(
            min(low[1], high[1] - cols + 1),
            max(low[1], high[1] - cols + 1) + 1,
        ):
            count = int(
                numpy.count_nonzero(
                    inside_rows
                    & (cells[:, 1] >= left)
                    & (cells[:, 1] < left + cols)
                )
            )
            key = (count, top, left)
            if best is None or key > best:
                best = key
    _, top, left = best
    canvas = numpy.full((rows, cols), -1, dtype=numpy.int64)
    orientations = numpy.full((rows, cols), -1, dtype=numpy.int64)
    outside = []
    for piece, (cell, orientation) in sorted(cluster.members.items()):
        row = cell[0] - top
        col = cell[1] - left
        if 0 <= row < rows and 0 <= col < cols:
            canvas[row, col] = piece
            orientations[row, col] = orientation
        else:
            outside.append(piece)
    return canvas, orientations, outside


def _neighbours(cell, rows, cols):
    """Yield cells next to cell on the canvas."""
    for row, col in constants.SIDE_OFFSETS:
        neighbour = (cell[0] + row, cell[1] + col)
        if 0 <= neighbour[0] < rows and 0 <= neighbour[1] < cols:
            yield neighbour


def fill_holes(canvas, orientations, pieces, leftovers, puzzle_type):
    """Fill empty cells of canvas from leftovers and return those unused.

    canvas and orientations are changed in place.  At each step the hole
    with most placed neighbours is filled by the leftover piece and
    orientation with least summed cost against those neighbours; ties go
    to the lowest cost, then the lowest cell, piece, and orientation.

    """
    leftovers = numpy.array(sorted(leftovers), dtype=numpy.int64)
    rows, cols = canvas.shape
    if not len(leftovers) or (canvas >= 0).all():
        return leftovers.tolist()
    group = transform.transforms_for_puzzle_type(puzzle_type, prune=True)
    position = {index: number for number, index in enumerate(group)}
    model = compatibility.EdgeModel(pieces, group)
    used = numpy.zeros(len(leftovers), dtype=bool)
    sums = {}
    counts = collections.Counter()

    def note_neighbour(hole, cell):
        orientation = int(orientations[cell])
        inverse = transform.inverse_index(orientation)
        side = transform.side_index(
            transform.offset_index(
                inverse, (hole[0] - cell[0], hole[1] - cell[1])
            )
        )
        relative = [
            position[transform.compose_index(inverse, index)]
            for index in group
        ]
        costs = model.side_costs(int(canvas[cell]), leftovers, side)
        if hole in sums:
            sums[hole] = sums[hole] + costs[:, relative]
        else:
            sums[hole] = costs[:, relative]
        counts[hole] += 1

    for row, col in numpy.argwhere(canvas >= 0).tolist():
        for hole in _neighbours((row, col), rows, cols):
            if canvas[hole] < 0:
                note_neighbour(hole, (row, col))
    while sums and not used.all():
        best = None
        for hole in sorted(sums):
            masked = numpy.where(used[:, None], numpy.inf, sums[hole])
            piece, orientation = divmod(int(numpy.argmin(masked)), len(group))
            key = (-counts[hole], masked[piece, orientation], hole)
            if best is None or key < best[0]:
                best = (key, hole, piece, orientation)
        _, hole, piece, orientation = best
        canvas[hole] = leftovers[piece]
        orientations[hole] = group[orientation]
        used[piece] = True
        del sums[hole]
        del counts[hole]
        for neighbour in _neighbours(hole, rows, cols):
            if canvas[neighbour] < 0:
                note_neighbour(neighbour, hole)
    return leftovers[~used].tolist()


def assemble(
    table,
    pieces,
    target_rows,
    target_cols,
    ratio_ordering=True,
    constrain_size=True,
    reporter=None,
):
    """Return AssemblyResult of pieces on a target_rows x target_cols canvas.

    The same table and pieces always give the same result.

    """
    if len(pieces) != table.n:
        raise AssemblyError(
            "".join(
                (
                    "Table is for ",
                    str(table.n),
                    " pieces but ",
                    str(len(pieces)),
                    " pieces are given",
                )
            )
        )
    if target_rows < 1 or target_cols < 1:
        raise AssemblyError("Target canvas must have at least one cell")
    clusters = merge_clusters(
        table,
        ratio_ordering=ratio_ordering,
        constrain_size=constrain_size,
        rows=target_rows,
        cols=target_cols,
    )
    largest = _largest(clusters)
    if reporter is not None:
        reporter.append_text_only(
            "".join(
                (
                    str(len(clusters)),
                    " clusters after merging, largest has ",
                    str(len(largest)),
                    " pieces.",
                )
            )
        )
    rotations = transform.puzzle_type_flags(table.puzzle_type)[1]
    canvas, orientations, outside = _place_cluster(
        largest, target_rows, target_cols, rotations
    )
    leftovers = [piece for piece in range(table.n) if piece not in largest]
    unplaced = fill_holes(
        canvas,
        orientations,
        pieces,
        leftovers + outside,
        table.puzzle_type,
    )
    return AssemblyResult(canvas, orientations, table.puzzle_type, unplaced)


def solve(
    image,
    puzzle_type,
    block_size=constants.DEFAULT_BLOCK_SIZE,
    rows=None,
    cols=None,
    prune=False,
    workers=1,
    ratio_ordering=True,
    reporter=None,
):
    """Return (AssemblyResult, CompatibilityTable, pieces) for image.

    The canvas defaults to the block grid of the image.

    """
    pieces = compatibility.pieces_from_image(image, block_size)
    if rows is None:
        rows = image.height // block_size
    if cols is None:
        cols = image.width // block_size
    table = compatibility.build_table(
        pieces, puzzle_type, prune=prune, workers=workers, reporter=reporter
    )
    result = assemble(
        table,
        pieces,
        rows,
        cols,
        ratio_ordering=ratio_ordering,
        reporter=reporter,
    )
    return result, table, pieces
