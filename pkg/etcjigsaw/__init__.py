# __init__.py
# Copyright 2017 EtC Jigsaw Workbench developers
# Licence: See LICENCE (BSD licence)

"""Measure the security of block scrambling image encryption.

Images are encrypted by the four step block scrambling cipher used in
Encryption-then-Compression (EtC) systems, optionally passed through the
user and SNS JPEG compression hops, and then attacked by an extended
jigsaw puzzle solver.  The assembled images are scored against the
original images by direct comparison (Dc), neighbor comparison (Nc), and
largest component (Lc).

"""
import os
import datetime
import traceback

APPLICATION_NAME = "EtCJigsaw"
ERROR_LOG = "ErrorLog"
RESULTS_DIRECTORY = "_results"


def write_error_to_log(directory, context=()):
    """Append the exception being handled to the error log in directory.

    context is a sequence of strings, such as the image, puzzle type,
    quality, and key of an experiment cell, put in the report heading.

    """
    heading = [
        APPLICATION_NAME,
        "exception report at",
        datetime.datetime.now().isoformat(),
    ]
    if context:
        heading.append("for")
        heading.extend(str(item) for item in context)
    with open(
        os.path.join(directory, ERROR_LOG), "a", encoding="utf-8"
    ) as file:
        file.write(
            "".join(
                (
                    "\n\n\n",
                    " ".join(heading),
                    "\n\n",
                    traceback.format_exc(),
                    "\n\n",
                )
            )
        )
