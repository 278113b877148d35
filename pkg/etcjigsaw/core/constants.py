# constants.py
# Copyright 2017 EtC Jigsaw Workbench developers
# Licence: See LICENCE (BSD licence)

"""Constants for the EtC block scrambling cryptanalysis workbench."""

# Samples are 8 bit RGB throughout.
BIT_DEPTH = 8
MAX_SAMPLE = (1 << BIT_DEPTH) - 1
CHANNELS = 3

# Block size used in the published experiments.
DEFAULT_BLOCK_SIZE = 32
MINIMUM_BLOCK_SIZE = 2

# Rotation angles in degrees, counter-clockwise.
ROTATIONS = (0, 90, 180, 270)

# Inversion states: not inverted, mirrored left-right, mirrored top-bottom.
INVERSION_NONE = "0"
INVERSION_H = "H"
INVERSION_V = "V"
INVERSIONS = (INVERSION_NONE, INVERSION_H, INVERSION_V)

# Color component shuffling.  The random integer indexes this table; the
# tuple gives the input channel placed in output R, G, and B.
COLOR_PERMUTATIONS = (
    (0, 1, 2),  # 0 RGB
    (1, 0, 2),  # 1 GRB
    (0, 2, 1),  # 2 RBG
    (2, 1, 0),  # 3 BGR
    (2, 0, 1),  # 4 BRG
    (1, 2, 0),  # 5 GBR
)
COLOR_NAMES = ("RGB", "GRB", "RBG", "BGR", "BRG", "GBR")

# Jigsaw puzzle types: which encryption steps are enabled.
# (scramble, rotation, inversion, negative-positive, color shuffle)
TYPE_1 = "1"
TYPE_2 = "2"
TYPE_I = "I"
TYPE_N = "N"
TYPE_IN = "IN"
TYPE_INC = "INC"
PUZZLE_TYPES = {
    TYPE_1: (True, False, False, False, False),
    TYPE_2: (True, True, False, False, False),
    TYPE_I: (True, True, True, False, False),
    TYPE_N: (True, True, False, True, False),
    TYPE_IN: (True, True, True, True, False),
    TYPE_INC: (True, True, True, True, True),
}
PUZZLE_TYPE_ORDER = (TYPE_1, TYPE_2, TYPE_I, TYPE_N, TYPE_IN, TYPE_INC)

# Sides of a piece, as (row, column) offsets to the neighbouring cell.
RIGHT = 0
DOWN = 1
LEFT = 2
UP = 3
SIDE_OFFSETS = ((0, 1), (1, 0), (0, -1), (-1, 0))
SIDE_NAMES = ("right", "down", "left", "up")

# JPEG channel.
LOSSLESS = "lossless"
SUBSAMPLING_444 = "4:4:4"
SUBSAMPLING_420 = "4:2:0"
SUBSAMPLING = (SUBSAMPLING_444, SUBSAMPLING_420)
USER_HOP = "user"
SNS_HOP = "sns"
DEFAULT_QUALITY_GRID = (50, 60, 70, 80, 90, 95, LOSSLESS)

# Mahalanobis gradient compatibility regularization.
MGC_EPSILON = 1e-6
MGC_DUMMY_GRADIENTS = (
    (0, 0, 0),
    (1, 1, 1),
    (-1, -1, -1),
    (0, 0, 1),
    (0, 1, 0),
    (1, 0, 0),
    (-1, 0, 0),
    (0, -1, 0),
    (0, 0, -1),
)

# Experiment defaults.
DEFAULT_KEYS_PER_IMAGE = 3
DEFAULT_MASTER_SEED = 2017
IMAGE_SUFFIXES = (".ppm", ".png", ".bmp", ".tif", ".tiff")
WORKERS_ENVIRONMENT_VARIABLE = "ETC_WORKERS"
SUMMARY_SELECTED = "selected"
SUMMARY_ALL = "all"

# Global symmetries of an assembly accepted when scoring Dc.  Polarity
# accepts only the whole assembly taken negative; any accepts every global
# symmetry of the puzzle type.
SCORE_POLARITY = "polarity"
SCORE_ANY_SYMMETRY = "any"

# Items in the user's configuration file.
WORKERS = "workers"
BLOCK_SIZE = "block_size"
RESULTS_DIRECTORY = "results_directory"
CHROMA_SUBSAMPLING = "subsampling"
