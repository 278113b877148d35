# configuration.py
# Copyright 2017 EtC Jigsaw Workbench developers
# Licence: See LICENCE (BSD licence)

"""Access and update items in a configuration file.

The initial values are taken from file named in self._CONFIGURATION in the
user's home directory if the file exists.

"""
from solentware_misc.core import configuration

from . import constants


class Configuration(configuration.Configuration):
    """Identify configuration file and defaults and delegate to superclass."""

    _CONFIGURATION = ".etcjigsaw.conf"
    _DEFAULT_ITEM_VAULES = (
        (constants.WORKERS, "1"),
        (constants.BLOCK_SIZE, str(constants.DEFAULT_BLOCK_SIZE)),
        (constants.RESULTS_DIRECTORY, "~"),
        (constants.CHROMA_SUBSAMPLING, constants.SUBSAMPLING_420),
    )
