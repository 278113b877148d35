# metrics.py
# Copyright 2017 EtC Jigsaw Workbench developers
# Licence: See LICENCE (BSD licence)

"""Score an assembly against the true placement of the pieces.

Dc is the fraction of pieces in the correct cell with the correct
orientation.  Nc is the fraction of adjacent piece pairs of the original
image which are joined correctly in the assembly: adjacent on the same
relative side and with the same relative orientation.  Lc is the size of
the largest group of pieces connected by correctly joined pairs as a
fraction of all pieces.

Nc and Lc depend only on relative placement and orientation, so they are
the same for every global interpretation of an assembly.  Dc is not:
best_score accepts the assembly taken negative as a whole, which pixel
gradients cannot tell apart, and on request any global symmetry.

"""
import collections
import json

import numpy

from . import assembly
from . import constants
from . import raster
from . import transform


class MetricsError(Exception):
    """Raise when an assembly and a ground truth cannot be compared."""


class ScoreTriple(collections.namedtuple("ScoreTriple", ("dc", "nc", "lc"))):
    """Dc, Nc, and Lc, each in range 0 to 1."""

    __slots__ = ()

    @property
    def total(self):
        """Return dc + nc + lc, the best-of-k selection criterion."""
        return self.dc + self.nc + self.lc

    def formatted(self):
        """Return scores as strings with three decimal places."""
        return tuple(format(value, ".3f") for value in self)


class GroundTruth:
    """True cell and orientation of each piece on a rows x cols grid.

    orientations[piece] is the index of the transform which, applied to
    the piece as given, shows it as it was in the original image.

    """

    def __init__(self, rows, cols, cells, orientations):
        """Note grid dimensions, true cells, and true orientations."""
        if len(cells) != rows * cols or len(orientations) != len(cells):
            raise MetricsError(
                "Ground truth needs a cell and orientation for every piece"
            )
        if sorted(row * cols + col for row, col in cells) != list(
            range(rows * cols)
        ):
            raise MetricsError("Ground truth cells are not a bijection")
        self.rows = rows
        self.cols = cols
        self.cells = tuple(tuple(cell) for cell in cells)
        self.orientations = tuple(
            transform.canonical_index(index) for index in orientations
        )
        grid = numpy.empty((rows, cols), dtype=numpy.int64)
        for piece, (row, col) in enumerate(self.cells):
            grid[row, col] = piece
        grid.flags.writeable = False
        self.grid = grid

    @property
    def n(self):
        """Return number of pieces."""
        return len(self.cells)

    @classmethod
    def identity(cls, rows, cols):
        """Return GroundTruth for pieces cut in row-major order, unchanged."""
        identity = transform.transform_index(transform.IDENTITY)
        return cls(
            rows,
            cols,
            [divmod(piece, cols) for piece in range(rows * cols)],
            [identity] * (rows * cols),
        )

    @classmethod
    def from_key_expansion(cls, expansion, rows, cols):
        """Return GroundTruth for the blocks of an encrypted image.

        Encrypted block i came from plain cell permutation[i] and is undone
        by the inverse of transforms[i].

        """
        if expansion.n != rows * cols:
            raise MetricsError("Key expansion does not fit the grid")
        return cls(
            rows,
            cols,
            [divmod(source, cols) for source in expansion.permutation],
            [
                transform.inverse_index(transform.transform_index(t))
                for t in expansion.transforms
            ],
        )

    def as_dict(self):
        """Return ground truth as a dict for a JSON manifest."""
        pieces = []
        for piece, ((row, col), index) in enumerate(
            zip(self.cells, self.orientations)
        ):
            orientation = transform.TRANSFORMS[index]
            pieces.append(
                {
                    "piece": piece,
                    "row": row,
                    "col": col,
                    "rotation": orientation.rotation,
                    "inversion": orientation.inversion,
                    "negpos": orientation.negpos,
                    "color_perm": orientation.color_perm,
                }
            )
        return {"rows": self.rows, "cols": self.cols, "pieces": pieces}

    @classmethod
    def from_dict(cls, data):
        """Return GroundTruth from a dict made by as_dict."""
        try:
            pieces = sorted(data["pieces"], key=lambda item: item["piece"])
            return cls(
                data["rows"],
                data["cols"],
                [(item["row"], item["col"]) for item in pieces],
                [
                    transform.transform_index(
                        transform.BlockTransform(
                            item["rotation"],
                            item["inversion"],
                            bool(item["negpos"]),
                            item["color_perm"],
                        )
                    )
                    for item in pieces
                ],
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise MetricsError("Truth manifest is not usable") from exc
        except transform.TransformError as exc:
            raise MetricsError("Truth manifest has a bad orientation") from exc


def _check_dimensions(result, truth):
    if (result.rows, result.cols) != (truth.rows, truth.cols):
        raise MetricsError(
            "".join(
                (
                    "Assembly is ",
                    str(result.rows),
                    " x ",
                    str(result.cols),
                    " but ground truth is ",
                    str(truth.rows),
                    " x ",
                    str(truth.cols),
                )
            )
        )
    placed = result.canvas[result.canvas >= 0]
    if len(placed) and (placed.max() >= truth.n):
        raise MetricsError("Assembly has pieces unknown to ground truth")


def direct_comparison(result, truth):
    """Return fraction of pieces in their true cell and orientation."""
    _check_dimensions(result, truth)
    correct = 0
    for row, col in numpy.argwhere(result.canvas >= 0).tolist():
        piece = result.canvas[row, col]
        if truth.cells[piece] != (row, col):
            continue
        orientation = transform.canonical_index(result.orientations[row, col])
        if orientation == truth.orientations[piece]:
            correct += 1
    return correct / truth.n


def true_adjacencies(truth):
    """Return list of (a, b, offset) for pieces adjacent in truth.

    Each undirected pair appears once, with b below or right of a.

    """
    pairs = []
    for row in range(truth.rows):
        for col in range(truth.cols):
            for offset in ((0, 1), (1, 0)):
                below, right = row + offset[0], col + offset[1]
                if below < truth.rows and right < truth.cols:
                    pairs.append(
                        (
                            int(truth.grid[row, col]),
                            int(truth.grid[below, right]),
                            offset,
                        )
                    )
    return pairs


def _relation(orientation_a, orientation_b, offset):
    """Return relative orientation and offset of b in a's own frame."""
    inverse = transform.inverse_index(orientation_a)
    return (
        transform.compose_index(inverse, orientation_b),
        transform.offset_index(inverse, offset),
    )


def correct_joins(result, truth):
    """Return list of (a, b) pairs adjacent in truth and joined correctly."""
    _check_dimensions(result, truth)
    placement = result.placement
    joins = []
    for a, b, offset in true_adjacencies(truth):
        if a not in placement or b not in placement:
            continue
        (row_a, col_a), (row_b, col_b) = placement[a], placement[b]
        found = (row_b - row_a, col_b - col_a)
        if abs(found[0]) + abs(found[1]) != 1:
            continue
        expected = _relation(
            truth.orientations[a], truth.orientations[b], offset
        )
        actual = _relation(
            int(result.orientations[row_a, col_a]),
            int(result.orientations[row_b, col_b]),
            found,
        )
        if actual == expected:
            joins.append((a, b))
    return joins


def neighbor_comparison(result, truth):
    """Return fraction of true adjacent pairs joined correctly.

    The denominator is 2 * rows * cols - rows - cols.  A single piece has
    no pairs and scores as direct_comparison.

    """
    pairs = 2 * truth.rows * truth.cols - truth.rows - truth.cols
    if not pairs:
        return direct_comparison(result, truth)
    return len(correct_joins(result, truth)) / pairs


def largest_component(result, truth, joins=None):
    """Return size of the largest correctly joined group over n.

    Pieces with no correct join form no group, so an assembly with no
    correct joins scores 0.  A single piece scores as direct_comparison.

    """
    if truth.n == 1:
        return direct_comparison(result, truth)
    if joins is None:
        joins = correct_joins(result, truth)
    graph = collections.defaultdict(set)
    for a, b in joins:
        graph[a].add(b)
        graph[b].add(a)
    seen = set()
    largest = 0
    for start in sorted(graph):
        if start in seen:
            continue
        component = {start}
        queue = collections.deque([start])
        while queue:
            for neighbour in graph[queue.popleft()]:
                if neighbour not in component:
                    component.add(neighbour)
                    queue.append(neighbour)
        seen.update(component)
        largest = max(largest, len(component))
    return largest / truth.n


def score(result, truth):
    """Return ScoreTriple of result against truth."""
    joins = correct_joins(result, truth)
    pairs = 2 * truth.rows * truth.cols - truth.rows - truth.cols
    if pairs:
        nc = len(joins) / pairs
    else:
        nc = direct_comparison(result, truth)
    return ScoreTriple(
        direct_comparison(result, truth),
        nc,
        largest_component(result, truth, joins=joins),
    )


def _accepted(index, allowance):
    """Return True if symmetry index is accepted under allowance."""
    if allowance == constants.SCORE_ANY_SYMMETRY:
        return True
    symmetry = transform.TRANSFORMS[index]
    return (
        symmetry.rotation == 0
        and symmetry.inversion == constants.INVERSION_NONE
        and symmetry.color_perm == 0
    )


def best_score(result, truth, allowance=constants.SCORE_POLARITY):
    """Return (ScoreTriple, symmetry index) of the best interpretation.

    With SCORE_POLARITY only the result and, for puzzle types with the
    negative-positive step, the result taken negative as a whole are
    scored.  With SCORE_ANY_SYMMETRY every global symmetry is scored.
    The interpretation with the highest total wins, the lowest symmetry
    index breaking ties.

    """
    if allowance not in (
        constants.SCORE_POLARITY,
        constants.SCORE_ANY_SYMMETRY,
    ):
        raise MetricsError(
            "".join(("Unknown symmetry allowance '", str(allowance), "'"))
        )
    best = None
    for index, interpretation in result.interpretations():
        if not _accepted(index, allowance):
            continue
        triple = score(interpretation, truth)
        if best is None or triple.total > best[0].total:
            best = (triple, index)
    return best


def image_score(decoded, original, block_w, block_h=None):
    """Return ScoreTriple of a decoded image against the original.

    A block counts as a correctly placed piece only if it equals the
    original block exactly.

    """
    if block_h is None:
        block_h = block_w
    if (decoded.width, decoded.height) != (original.width, original.height):
        raise MetricsError("Decoded and original images differ in size")
    found = raster.partition(decoded, block_w, block_h)
    expected = raster.partition(original, block_w, block_h)
    equal = (found.blocks == expected.blocks).reshape(found.n, -1).all(axis=1)
    canvas = numpy.where(equal, numpy.arange(found.n), -1).reshape(
        found.rows, found.cols
    )
    identity = transform.transform_index(transform.IDENTITY)
    orientations = numpy.where(canvas >= 0, identity, -1)

    return score(
        assembly.AssemblyResult(canvas, orientations, None),
        GroundTruth.identity(found.rows, found.cols),
    )


def write_manifest(path, data):
    """Write dict data to path as JSON."""
    try:
        with open(path, "w", encoding="utf-8") as output:
            json.dump(data, output, indent=2, sort_keys=True)
            output.write("\n")
    except OSError as exc:
        raise MetricsError(
            "".join(("Unable to write manifest '", str(path), "'"))
        ) from exc


def read_manifest(path):
    """Return dict read from the JSON manifest at path."""
    try:
        with open(path, "r", encoding="utf-8") as input_:
            return json.load(input_)
    except (OSError, ValueError) as exc:
        raise MetricsError(
            "".join(("Unable to read manifest '", str(path), "'"))
        ) from exc
