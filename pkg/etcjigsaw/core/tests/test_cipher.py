# test_cipher.py
# Copyright 2017 EtC Jigsaw Workbench developers
# Licence: See LICENCE (BSD licence)

"""cipher tests."""

import collections
import math
import os
import tempfile
import unittest

import numpy

from .. import cipher
from .. import constants
from .. import raster
from .. import transform
from . import images


def _key(seed):
    return cipher.generate_key(seed)


class SecretKeyTC(unittest.TestCase):
    def test_01_seeds_checked(self):
        self.assertRaises(cipher.CipherError, cipher.SecretKey, 1, 2, 3, -4)
        self.assertRaises(cipher.CipherError, cipher.SecretKey, 1, 2, 3, "4")

    def test_02_generate_key(self):
        self.assertEqual(_key(5), _key(5))
        self.assertNotEqual(_key(5), _key(6))
        self.assertNotEqual(cipher.generate_key(), cipher.generate_key())

    def test_03_repr_hides_seeds(self):
        key = cipher.SecretKey(1, 2, 3, 4)
        self.assertEqual(repr(key), "SecretKey(...)")


class CipherConfigTC(unittest.TestCase):
    def test_01_puzzle_types(self):
        for puzzle_type in constants.PUZZLE_TYPE_ORDER:
            config = cipher.CipherConfig.for_puzzle_type(puzzle_type, 16)
            self.assertEqual(config.puzzle_type, puzzle_type)
            self.assertEqual(
                cipher.CipherConfig.from_dict(config.as_dict()), config
            )

    def test_02_unknown_type(self):
        self.assertRaises(
            cipher.CipherConfigError, cipher.CipherConfig.for_puzzle_type, "3"
        )

    def test_03_rotation_needs_square_blocks(self):
        self.assertRaises(cipher.CipherConfigError, cipher.CipherConfig, 8, 16)
        config = cipher.CipherConfig.for_puzzle_type(constants.TYPE_1, 8, 16)
        self.assertEqual((config.block_w, config.block_h), (8, 16))

    def test_04_block_too_small(self):
        self.assertRaises(cipher.CipherConfigError, cipher.CipherConfig, 1)

    def test_05_no_type_for_odd_steps(self):
        config = cipher.CipherConfig(8, enable_rotation=False)
        self.assertIsNone(config.puzzle_type)

    def test_06_incomplete_dict(self):
        self.assertRaises(
            cipher.CipherConfigError, cipher.CipherConfig.from_dict, {}
        )


class KeyExpansionTC(unittest.TestCase):
    def test_01_disabled_steps_are_identity(self):
        config = cipher.CipherConfig.for_puzzle_type(constants.TYPE_1, 8)
        expansion = cipher.expand_key(_key(1), 20, config)
        self.assertNotEqual(list(expansion.permutation), list(range(20)))
        self.assertEqual(set(expansion.transforms), {transform.IDENTITY})

    def test_02_only_enabled_components_vary(self):
        config = cipher.CipherConfig.for_puzzle_type(constants.TYPE_N, 8)
        expansion = cipher.expand_key(_key(2), 200, config)
        self.assertEqual(
            {t.inversion for t in expansion.transforms}, {"0"}
        )
        self.assertEqual({t.color_perm for t in expansion.transforms}, {0})
        self.assertEqual(
            {t.rotation for t in expansion.transforms},
            set(constants.ROTATIONS),
        )

    def test_03_negpos_bits_are_fair(self):
        config = cipher.CipherConfig.for_puzzle_type(constants.TYPE_INC, 8)
        bits = cipher.expand_key(_key(3), 10000, config).negpos_bits
        self.assertGreaterEqual(sum(bits) / len(bits), 0.48)
        self.assertLessEqual(sum(bits) / len(bits), 0.52)

    def test_04_color_orders_uniform(self):
        config = cipher.CipherConfig.for_puzzle_type(constants.TYPE_INC, 8)
        counts = collections.Counter(
            t.color_perm
            for t in cipher.expand_key(_key(4), 6000, config).transforms
        )
        self.assertEqual(set(counts), set(range(6)))
        self.assertTrue(all(850 < count < 1150 for count in counts.values()))

    def test_05_no_blocks(self):
        config = cipher.CipherConfig.for_puzzle_type(constants.TYPE_INC, 8)
        self.assertRaises(
            cipher.CipherError, cipher.expand_key, _key(1), 0, config
        )


class EncryptDecryptTC(unittest.TestCase):
    def test_01_decrypt_inverts_encrypt_for_every_type(self):
        image = images.random_image(40, 24, seed=1)
        for trial in range(100):
            puzzle_type = constants.PUZZLE_TYPE_ORDER[trial % 6]
            config = cipher.CipherConfig.for_puzzle_type(puzzle_type, 8)
            key = _key(trial)
            encrypted = cipher.encrypt(image, key, config)
            self.assertEqual(cipher.decrypt(encrypted, key, config), image)

    def test_02_format_preserving_crop(self):
        image = images.random_image(45, 30, seed=2)
        config = cipher.CipherConfig.for_puzzle_type(constants.TYPE_INC, 8)
        encrypted = cipher.encrypt(image, _key(1), config)
        self.assertEqual((encrypted.width, encrypted.height), (40, 24))
        self.assertEqual(encrypted.channels, 3)
        self.assertEqual(
            cipher.decrypt(encrypted, _key(1), config), image.crop(40, 24)
        )

    def test_03_deterministic(self):
        image = images.random_image(32, 32, seed=3)
        config = cipher.CipherConfig.for_puzzle_type(constants.TYPE_INC, 8)
        self.assertEqual(
            cipher.encrypt(image, _key(9), config),
            cipher.encrypt(image, _key(9), config),
        )

    def test_04_histogram_kept_without_negpos_and_colors(self):
        image = images.random_image(64, 32, seed=4)
        for puzzle_type in (constants.TYPE_1, constants.TYPE_2, "I"):
            config = cipher.CipherConfig.for_puzzle_type(puzzle_type, 8)
            encrypted = cipher.encrypt(image, _key(5), config)
            self.assertTrue(
                numpy.array_equal(
                    numpy.sort(encrypted.pixels), numpy.sort(image.pixels)
                )
            )
            self.assertNotEqual(encrypted, image)

    def test_05_blocks_follow_expansion(self):
        image = images.random_image(32, 16, seed=5)
        config = cipher.CipherConfig.for_puzzle_type(constants.TYPE_INC, 8)
        key = _key(6)
        encrypted = raster.partition(cipher.encrypt(image, key, config), 8, 8)
        plain = raster.partition(image, 8, 8)
        expansion = cipher.expand_key(key, plain.n, config)
        for block, source, t in zip(
            encrypted.blocks, expansion.permutation, expansion.transforms
        ):
            self.assertTrue(
                numpy.array_equal(
                    block, transform.apply_transform(plain.blocks[source], t)
                )
            )

    def test_06_wrong_key_scrambles(self):
        image = images.random_image(64, 64, seed=6)
        config = cipher.CipherConfig.for_puzzle_type(constants.TYPE_INC, 8)
        encrypted = cipher.encrypt(image, _key(7), config)
        decrypted = raster.partition(
            cipher.decrypt(encrypted, _key(8), config), 8, 8
        )
        plain = raster.partition(image, 8, 8)
        matches = sum(
            numpy.array_equal(a, b)
            for a, b in zip(decrypted.blocks, plain.blocks)
        )
        self.assertLess(matches, 5)

    def test_07_decrypt_needs_block_multiple(self):
        config = cipher.CipherConfig.for_puzzle_type(constants.TYPE_INC, 8)
        self.assertRaises(
            raster.RasterError,
            cipher.decrypt,
            images.random_image(20, 16),
            _key(1),
            config,
        )

    def test_08_block_larger_than_image(self):
        config = cipher.CipherConfig.for_puzzle_type(constants.TYPE_INC, 32)
        self.assertRaises(
            raster.RasterError,
            cipher.encrypt,
            images.random_image(16, 16),
            _key(1),
            config,
        )


class FrozenValuesTC(unittest.TestCase):
    """Expansions and ciphertexts which must not change between releases."""

    def setUp(self):
        self.key = cipher.SecretKey(1, 2, 3, 4)
        self.config = cipher.CipherConfig.for_puzzle_type(
            constants.TYPE_INC, 2
        )
        self.plain = raster.RasterImage(
            (numpy.arange(48, dtype=numpy.uint8) * 5).reshape(4, 4, 3)
        )

    def test_01_expansion(self):
        expansion = cipher.expand_key(self.key, 4, self.config)
        self.assertEqual(expansion.permutation, (2, 0, 3, 1))
        self.assertEqual(
            expansion.transforms,
            (
                transform.BlockTransform(180, "V", True, 4),
                transform.BlockTransform(270, "0", True, 4),
                transform.BlockTransform(90, "0", True, 3),
                transform.BlockTransform(180, "V", True, 0),
            ),
        )

    def test_02_ciphertext(self):
        encrypted = cipher.encrypt(self.plain, self.key, self.config)
        self.assertEqual(
            encrypted.samples.tolist(),
            [
                [
                    [110, 120, 115],
                    [125, 135, 130],
                    [185, 195, 190],
                    [245, 255, 250],
                ],
                [[50, 60, 55], [65, 75, 70], [170, 180, 175], [230, 240, 235]],
                [
                    [80, 85, 90],
                    [20, 25, 30],
                    [210, 205, 200],
                    [225, 220, 215],
                ],
                [
                    [95, 100, 105],
                    [35, 40, 45],
                    [150, 145, 140],
                    [165, 160, 155],
                ],
            ],
        )
        self.assertEqual(
            cipher.decrypt(encrypted, self.key, self.config), self.plain
        )


class KeySpaceTC(unittest.TestCase):
    def test_01_small(self):
        self.assertEqual(
            cipher.key_space(
                1, cipher.CipherConfig.for_puzzle_type(constants.TYPE_1)
            ),
            1,
        )
        self.assertEqual(
            cipher.key_space(
                2, cipher.CipherConfig.for_puzzle_type(constants.TYPE_2)
            ),
            32,
        )

    def test_02_published_image_size(self):
        config = cipher.CipherConfig.for_puzzle_type(constants.TYPE_INC)
        self.assertEqual(
            cipher.key_space(315, config), math.factorial(315) * 144**315
        )
        bits = cipher.key_space_bits(315, config)
        self.assertGreater(bits, 2000)
        self.assertAlmostEqual(
            bits,
            sum(math.log2(k) for k in range(2, 316)) + 315 * math.log2(144),
            places=6,
        )

    def test_03_no_blocks(self):
        self.assertRaises(
            cipher.CipherError,
            cipher.key_space,
            0,
            cipher.CipherConfig.for_puzzle_type(constants.TYPE_INC),
        )


class KeyFileTC(unittest.TestCase):
    def setUp(self):
        self.directory = tempfile.TemporaryDirectory()
        self.path = os.path.join(self.directory.name, "key.json")

    def tearDown(self):
        self.directory.cleanup()

    def test_01_write_and_read(self):
        largest = (1 << 64) - 1
        key = cipher.SecretKey(largest, 0, 1, 2)
        config = cipher.CipherConfig.for_puzzle_type(constants.TYPE_IN, 16)
        cipher.write_key_file(self.path, key, config)
        self.assertEqual(cipher.read_key_file(self.path), (key, config))
        with open(self.path, encoding="utf-8") as key_file:
            self.assertIn('"' + str(largest) + '"', key_file.read())

    def test_02_missing_config(self):
        with open(self.path, "w", encoding="utf-8") as key_file:
            key_file.write('{"k1": "1", "k2": "2", "k3": "3", "k4": "4"}')
        key, config = cipher.read_key_file(self.path)
        self.assertEqual(key.seeds(), (1, 2, 3, 4))
        self.assertIsNone(config)

    def test_03_bad_files(self):
        self.assertRaises(cipher.KeyFileError, cipher.read_key_file, self.path)
        with open(self.path, "w", encoding="utf-8") as key_file:
            key_file.write('{"k1": "1"}')
        self.assertRaises(cipher.KeyFileError, cipher.read_key_file, self.path)


if __name__ == "__main__":
    runner = unittest.TextTestRunner
    loader = unittest.defaultTestLoader.loadTestsFromTestCase

    runner().run(loader(SecretKeyTC))
    runner().run(loader(CipherConfigTC))
    runner().run(loader(KeyExpansionTC))
    runner().run(loader(EncryptDecryptTC))
    runner().run(loader(FrozenValuesTC))
    runner().run(loader(KeySpaceTC))
    runner().run(loader(KeyFileTC))
