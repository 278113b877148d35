# test_assembly.py
# Copyright 2017 EtC Jigsaw Workbench developers
# Licence: See LICENCE (BSD licence)

"""assembly tests.

Pieces cut from a linear gradient join their true neighbours at zero
cost, so the solver must recover the image exactly up to the global
symmetries of the puzzle type.

"""

import itertools
import unittest

import numpy

from .. import assembly
from .. import cipher
from .. import compatibility
from .. import constants
from .. import metrics
from .. import transform
from . import images


def _identity_result(rows, cols, puzzle_type=constants.TYPE_1):
    return assembly.AssemblyResult(
        numpy.arange(rows * cols).reshape(rows, cols),
        numpy.zeros((rows, cols), dtype=int),
        puzzle_type,
    )


def _gradient_pieces(rows, cols):
    return compatibility.pieces_from_image(
        images.gradient_image(rows, cols), 8
    )


def _attack(grid_rows, grid_cols, puzzle_type, seed, **options):
    """Return result, pieces, and truth of attacking an encrypted gradient.

    options are passed to solve, so rows and cols name the canvas.

    """
    config = cipher.CipherConfig.for_puzzle_type(puzzle_type, 8)
    key = cipher.generate_key(seed)
    encrypted = cipher.encrypt(
        images.gradient_image(grid_rows, grid_cols), key, config
    )
    result, _, pieces = assembly.solve(
        encrypted, puzzle_type, block_size=8, **options
    )
    truth = metrics.GroundTruth.from_key_expansion(
        cipher.expand_key(key, grid_rows * grid_cols, config),
        grid_rows,
        grid_cols,
    )
    return result, pieces, truth


def _brute_force_costs(pieces, rows, cols, puzzle_type):
    """Return sorted layout costs of every placement and orientation.

    Layout cost is the sum of the MGC of each adjacent pair, so the MGC of
    every pair of oriented pieces is found once, by mgc_cost on rendered
    blocks, and summed for all orientation choices of each placement.

    """
    group = transform.transforms_for_puzzle_type(puzzle_type, prune=True)
    oriented = [
        transform.apply_transform(piece.samples, transform.TRANSFORMS[k])
        for piece in pieces
        for k in group
    ]
    turned = [transform.rotate(block, 90) for block in oriented]
    count = len(oriented)
    across = numpy.empty((count, count))
    down = numpy.empty((count, count))
    for first, second in itertools.product(range(count), repeat=2):
        across[first, second] = compatibility.mgc_cost(
            oriented[first], oriented[second]
        )
        down[first, second] = compatibility.mgc_cost(
            turned[first], turned[second]
        )
    pairs = [
        (across, cell, cell + 1)
        for cell in range(rows * cols)
        if cell % cols + 1 < cols
    ]
    pairs.extend(
        (down, cell, cell + cols) for cell in range(rows * cols - cols)
    )
    choices = numpy.array(
        list(itertools.product(range(len(group)), repeat=rows * cols))
    )
    costs = []
    for order in itertools.permutations(range(len(pieces))):
        forms = numpy.array(order) * len(group) + choices
        total = numpy.zeros(len(choices))
        for table, a, b in pairs:
            total += table[forms[:, a], forms[:, b]]
        costs.append(total)
    return numpy.sort(numpy.concatenate(costs))


class AssemblyResultTC(unittest.TestCase):
    def test_01_shapes_checked(self):
        self.assertRaises(
            assembly.AssemblyError,
            assembly.AssemblyResult,
            numpy.zeros((2, 2)),
            numpy.zeros((2, 3)),
            constants.TYPE_1,
        )

    def test_02_pieces_placed_once(self):
        self.assertRaises(
            assembly.AssemblyError,
            assembly.AssemblyResult,
            [[0, 0]],
            [[0, 0]],
            constants.TYPE_1,
        )

    def test_03_orientation_for_every_piece(self):
        self.assertRaises(
            assembly.AssemblyError,
            assembly.AssemblyResult,
            [[0, -1]],
            [[0, 0]],
            constants.TYPE_1,
        )

    def test_04_placement(self):
        result = assembly.AssemblyResult(
            [[2, -1], [0, 1]], [[4, -1], [0, 0]], constants.TYPE_INC, (3,)
        )
        self.assertEqual((result.rows, result.cols), (2, 2))
        self.assertEqual(result.placement, {2: (0, 0), 0: (1, 0), 1: (1, 1)})
        self.assertEqual(result.orientation[2], transform.TRANSFORMS[4])
        self.assertFalse(result.is_complete)
        self.assertEqual(result.unplaced, (3,))
        self.assertRaises(ValueError, result.canvas.fill, 0)

    def test_05_manifest(self):
        result = assembly.AssemblyResult(
            [[2, -1], [0, 1]], [[4, -1], [100, 0]], constants.TYPE_INC, (3,)
        )
        data = result.as_dict()
        self.assertEqual(len(data["cells"]), 3)
        self.assertEqual(assembly.AssemblyResult.from_dict(data), result)
        self.assertEqual(
            assembly.AssemblyResult.from_dict(data).unplaced, (3,)
        )
        del data["rows"]
        self.assertRaises(
            assembly.AssemblyError, assembly.AssemblyResult.from_dict, data
        )

    def test_06_render_and_cost(self):
        image = images.gradient_image(2, 3)
        pieces = compatibility.pieces_from_image(image, 8)
        result = _identity_result(2, 3)
        self.assertEqual(result.render(pieces), image)
        self.assertAlmostEqual(result.total_cost(pieces), 0, 6)

    def test_07_render_leaves_holes_black(self):
        pieces = _gradient_pieces(1, 2)
        result = assembly.AssemblyResult(
            [[-1, 1]], [[-1, 0]], constants.TYPE_1
        )
        samples = result.render(pieces).samples
        self.assertEqual(int(samples[:, :8].max()), 0)
        self.assertTrue(
            numpy.array_equal(samples[:, 8:], pieces[1].samples)
        )

    def test_08_transformed_matches_transformed_rendering(self):
        image = images.random_image(24, 24, seed=1)
        pieces = compatibility.pieces_from_image(image, 8)
        generator = numpy.random.default_rng(2)
        result = assembly.AssemblyResult(
            generator.permutation(9).reshape(3, 3),
            generator.integers(0, 144, size=(3, 3)),
            constants.TYPE_INC,
        )
        rendered = result.render(pieces).samples
        for index in (1, 17, 40, 77, 143):
            self.assertTrue(
                numpy.array_equal(
                    result.transformed(index).render(pieces).samples,
                    transform.apply_transform(
                        rendered, transform.TRANSFORMS[index]
                    ),
                )
            )

    def test_09_interpretations(self):
        for puzzle_type, rows, cols, count in (
            (constants.TYPE_1, 2, 3, 1),
            (constants.TYPE_2, 3, 3, 4),
            (constants.TYPE_INC, 2, 3, 48),
        ):
            identity = _identity_result(rows, cols, puzzle_type)
            interpretations = identity.interpretations()
            self.assertEqual(len(interpretations), count)
            self.assertEqual(interpretations[0], (0, identity))


class MergeTC(unittest.TestCase):
    def setUp(self):
        self.pieces = _gradient_pieces(3, 3)
        self.table = compatibility.build_table(self.pieces, constants.TYPE_1)

    def test_01_true_relations_come_first(self):
        i, j, side = assembly.ordered_relations(self.table)
        self.assertEqual(len(i), 36 * 4)
        true = {(p, p + 1, constants.RIGHT) for p in range(9) if p % 3 < 2}
        true.update((p, p + 3, constants.DOWN) for p in range(6))
        first = set(zip(i[:12].tolist(), j[:12].tolist(), side[:12].tolist()))
        self.assertEqual(first, true)
        self.assertEqual((i[0], j[0], side[0]), (0, 1, constants.RIGHT))

    def test_02_cost_ordering(self):
        i, j, side = assembly.ordered_relations(
            self.table, ratio_ordering=False
        )
        costs = self.table.costs[i, j, side]
        self.assertTrue((numpy.diff(costs) >= 0).all())

    def test_03_one_cluster_with_true_cells(self):
        clusters = assembly.merge_clusters(self.table, rows=3, cols=3)
        self.assertEqual(len(clusters), 1)
        members = clusters[0]
        self.assertEqual(
            {piece: cell for piece, (cell, _) in members.items()},
            {piece: divmod(piece, 3) for piece in range(9)},
        )

    def test_04_size_constraint(self):
        clusters = assembly.merge_clusters(self.table, rows=2, cols=2)
        self.assertEqual(sorted(clusters[0]), [0, 1, 3, 4])
        self.assertEqual(sum(map(len, clusters)), 9)
        self.assertTrue(all(len(members) <= 4 for members in clusters))

    def test_05_assembles_within_canvas(self):
        result = assembly.assemble(self.table, self.pieces, 2, 2)
        self.assertEqual(result.canvas.tolist(), [[0, 1], [3, 4]])
        self.assertEqual(result.unplaced, (2, 5, 6, 7, 8))
        self.assertAlmostEqual(result.total_cost(self.pieces), 0, 6)

    def test_06_without_size_constraint(self):
        result = assembly.assemble(
            self.table, self.pieces, 3, 3, constrain_size=False
        )
        self.assertEqual(result, _identity_result(3, 3))

    def test_07_extent_counts_extra_cells_once_read(self):
        cluster = assembly._Cluster(0, 0)
        self.assertEqual(cluster.extent(cell for cell in [(0, 2)]), (1, 3))
        self.assertEqual(cluster.extent(iter([(1, 0), (2, 1)])), (3, 2))
        self.assertEqual(cluster.extent(), (1, 1))

    def test_08_merged_clusters_fit_canvas(self):
        for rows, cols in ((2, 2), (1, 3), (3, 1), (2, 3)):
            for members in assembly.merge_clusters(
                self.table, rows=rows, cols=cols
            ):
                cells = [cell for cell, _ in members.values()]
                height = max(r for r, _ in cells) - min(r for r, _ in cells)
                width = max(c for _, c in cells) - min(c for _, c in cells)
                self.assertLessEqual(height + 1, rows)
                self.assertLessEqual(width + 1, cols)

    def test_09_bad_arguments(self):
        self.assertRaises(
            assembly.AssemblyError,
            assembly.assemble,
            self.table,
            self.pieces[:4],
            3,
            3,
        )
        self.assertRaises(
            assembly.AssemblyError,
            assembly.assemble,
            self.table,
            self.pieces,
            0,
            3,
        )


class FillHolesTC(unittest.TestCase):
    def test_01_best_piece_and_orientation_fill_hole(self):
        pieces = _gradient_pieces(1, 3)
        decoy = compatibility.Piece(3, images.random_image(8, 8).samples)
        turned = compatibility.Piece(
            1, transform.rotate(pieces[1].samples, 90)
        )
        pieces = [pieces[0], turned, pieces[2], decoy]
        canvas = numpy.array([[0, -1, 2]])
        orientations = numpy.array([[0, -1, 0]])
        unused = assembly.fill_holes(
            canvas, orientations, pieces, [3, 1], constants.TYPE_2
        )
        self.assertEqual(unused, [3])
        self.assertEqual(canvas.tolist(), [[0, 1, 2]])
        self.assertEqual(
            transform.TRANSFORMS[orientations[0, 1]].rotation, 270
        )

    def test_02_nothing_to_fill(self):
        canvas = numpy.array([[0, 1]])
        pieces = _gradient_pieces(1, 3)
        self.assertEqual(
            assembly.fill_holes(
                canvas, numpy.zeros((1, 2)), pieces, [2], constants.TYPE_1
            ),
            [2],
        )

    def test_03_most_constrained_hole_first(self):
        pieces = _gradient_pieces(2, 2)
        canvas = numpy.array([[0, -1], [-1, -1]])
        orientations = numpy.array([[0, -1], [-1, -1]])
        unused = assembly.fill_holes(
            canvas, orientations, pieces, [1, 2, 3], constants.TYPE_1
        )
        self.assertEqual(unused, [])
        self.assertEqual(canvas.tolist(), [[0, 1], [2, 3]])


class SolveTC(unittest.TestCase):
    def assert_solved(self, result, truth):
        triple, _ = metrics.best_score(
            result, truth, allowance=constants.SCORE_ANY_SYMMETRY
        )
        self.assertEqual(triple, (1.0, 1.0, 1.0))

    def test_01_type_1(self):
        result, pieces, truth = _attack(3, 3, constants.TYPE_1, 1)
        self.assertTrue(result.is_complete)
        self.assertEqual(result.unplaced, ())
        self.assertEqual(metrics.score(result, truth), (1.0, 1.0, 1.0))

    def test_02_type_2_square(self):
        result, pieces, truth = _attack(3, 3, constants.TYPE_2, 2)
        self.assert_solved(result, truth)
        self.assertAlmostEqual(result.total_cost(pieces), 0, 6)

    def test_03_type_2_oblong(self):
        result, pieces, truth = _attack(2, 3, constants.TYPE_2, 3)
        self.assertEqual((result.rows, result.cols), (2, 3))
        self.assertAlmostEqual(result.total_cost(pieces), 0, 6)
        self.assertEqual(metrics.neighbor_comparison(result, truth), 1.0)
        self.assert_solved(result, truth)

    def test_04_type_inc(self):
        result, pieces, truth = _attack(
            3, 3, constants.TYPE_INC, 4, prune=True
        )
        self.assertEqual(metrics.neighbor_comparison(result, truth), 1.0)
        self.assert_solved(result, truth)

    def test_05_deterministic(self):
        first = _attack(3, 3, constants.TYPE_N, 5)[0]
        second = _attack(3, 3, constants.TYPE_N, 5, workers=2)[0]
        self.assertEqual(first, second)

    def test_06_explicit_canvas(self):
        result, _, _ = _attack(3, 3, constants.TYPE_1, 6, rows=2, cols=4)
        self.assertEqual((result.rows, result.cols), (2, 4))
        self.assertEqual(len(result.unplaced), 1)


class BruteForceTC(unittest.TestCase):
    def check_optimal(self, rows, cols, puzzle_type, seed):
        result, pieces, truth = _attack(rows, cols, puzzle_type, seed)
        costs = _brute_force_costs(pieces, rows, cols, puzzle_type)
        self.assertAlmostEqual(result.total_cost(pieces), costs[0], 6)
        symmetries = len(
            transform.global_symmetries(puzzle_type, rows, cols)
        )
        self.assertGreater(costs[symmetries], 1)
        self.assertAlmostEqual(costs[symmetries - 1], 0, 6)

    def test_01_type_1_square(self):
        self.check_optimal(2, 2, constants.TYPE_1, 7)

    def test_02_type_1_oblong(self):
        self.check_optimal(2, 3, constants.TYPE_1, 8)

    def test_03_type_2_square(self):
        self.check_optimal(2, 2, constants.TYPE_2, 9)

    def test_04_type_2_oblong(self):
        self.check_optimal(2, 3, constants.TYPE_2, 10)


if __name__ == "__main__":
    runner = unittest.TextTestRunner
    loader = unittest.defaultTestLoader.loadTestsFromTestCase

    runner().run(loader(AssemblyResultTC))
    runner().run(loader(MergeTC))
    runner().run(loader(FillHolesTC))
    runner().run(loader(SolveTC))
    runner().run(loader(BruteForceTC))
