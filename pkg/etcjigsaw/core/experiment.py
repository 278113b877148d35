# experiment.py
# Copyright 2017 EtC Jigsaw Workbench developers
# Licence: See LICENCE (BSD licence)

"""Run the encrypt, transmit, attack, and score experiment over a dataset.

Each cell of an experiment is one image, puzzle type, JPEG quality, and
key index.  The key of a cell is derived from the master seed, the image
id, and the key index, so any cell can be run again on its own and give
the same row.  Of the keys_per_image rows for an (image, type, quality)
the one with the highest Dc + Nc + Lc is selected, the lowest key index
breaking ties.

The results file holds the attempt rows sorted by image, type, quality,
and key, followed by per (type, quality) means over selected rows and
over all rows.  Wall times go to a separate timings file so the results
file is byte-identical when a plan is run again.

"""
import collections
import csv
import json
import os
import time

from .. import write_error_to_log
from . import assembly
from . import channel
from . import cipher
from . import compatibility
from . import constants
from . import keystream
from . import metrics
from . import raster
from . import task
from . import transform

ResultRow = collections.namedtuple(
    "ResultRow",
    (
        "image_id",
        "puzzle_type",
        "quality",
        "key_index",
        "pieces",
        "dc",
        "nc",
        "lc",
        "selected",
        "seconds",
        "self_test",
        "error",
    ),
)
ResultRow.__doc__ = "Scores of one attack and whether best-of-k chose it."

SummaryRow = collections.namedtuple(
    "SummaryRow",
    ("scope", "puzzle_type", "quality", "images", "dc", "nc", "lc"),
)
SummaryRow.__doc__ = "Mean scores over selected rows or all rows of a cell."

CellJob = collections.namedtuple(
    "CellJob",
    ("image_path", "image_id", "puzzle_type", "quality", "key_index", "plan"),
)

_RESULT_HEADER = (
    "kind",
    "scope",
    "image",
    "type",
    "quality",
    "key",
    "pieces",
    "images",
    "dc",
    "nc",
    "lc",
    "selected",
    "self_test",
    "error",
)
ATTEMPT = "attempt"
SUMMARY = "summary"


class ExperimentError(Exception):
    """Raise when an experiment cannot be run at all."""


def _check_quality(quality):
    if quality == constants.LOSSLESS:
        return quality
    if isinstance(quality, bool) or not isinstance(quality, int):
        raise ExperimentError(
            "".join(("Quality '", str(quality), "' is not an integer"))
        )
    if not 1 <= quality <= 100:
        raise ExperimentError(
            "".join(("Quality ", str(quality), " is not in range 1 to 100"))
        )
    return quality


def quality_sort_key(quality):
    """Return key ordering qualities ascending with LOSSLESS last."""
    if quality == constants.LOSSLESS:
        return (1, 0)
    return (0, quality)


class ExperimentPlan:
    """Images, puzzle types, quality grid, and settings of an experiment."""

    def __init__(
        self,
        images,
        types=constants.PUZZLE_TYPE_ORDER,
        qualities=constants.DEFAULT_QUALITY_GRID,
        keys_per_image=constants.DEFAULT_KEYS_PER_IMAGE,
        block_size=constants.DEFAULT_BLOCK_SIZE,
        master_seed=constants.DEFAULT_MASTER_SEED,
        subsampling=constants.SUBSAMPLING_420,
        sns_quality=constants.LOSSLESS,
        budget=None,
        prune=True,
        ratio_ordering=True,
    ):
        """Note and validate the plan."""
        if not types:
            raise ExperimentError("At least one puzzle type is needed")
        for puzzle_type in types:
            if puzzle_type not in constants.PUZZLE_TYPES:
                raise ExperimentError(
                    "".join(("'", str(puzzle_type), "' is not a puzzle type"))
                )
        if not qualities:
            raise ExperimentError("At least one quality is needed")
        if (
            not isinstance(keys_per_image, int)
            or isinstance(keys_per_image, bool)
            or keys_per_image < 1
        ):
            raise ExperimentError("keys_per_image must be at least 1")
        if (
            not isinstance(block_size, int)
            or block_size < constants.MINIMUM_BLOCK_SIZE
        ):
            raise ExperimentError(
                "".join(
                    (
                        "block_size must be an integer of at least ",
                        str(constants.MINIMUM_BLOCK_SIZE),
                    )
                )
            )
        if not isinstance(master_seed, int) or master_seed < 0:
            raise ExperimentError("master_seed must be a non-negative integer")
        if subsampling not in constants.SUBSAMPLING:
            raise ExperimentError(
                "".join(("Subsampling '", str(subsampling), "' is unknown"))
            )
        if budget is not None and (not isinstance(budget, int) or budget < 4):
            raise ExperimentError("budget must be at least 4 pieces, or null")
        self.images = images
        self.types = tuple(
            sorted(set(types), key=constants.PUZZLE_TYPE_ORDER.index)
        )
        self.qualities = tuple(
            sorted(
                set(_check_quality(quality) for quality in qualities),
                key=quality_sort_key,
            )
        )
        self.keys_per_image = keys_per_image
        self.block_size = block_size
        self.master_seed = master_seed
        self.subsampling = subsampling
        self.sns_quality = _check_quality(sns_quality)
        self.budget = budget
        self.prune = bool(prune)
        self.ratio_ordering = bool(ratio_ordering)

    def as_dict(self):
        """Return plan as a dict in the JSON plan schema."""
        return {
            "images": self.images,
            "types": list(self.types),
            "qualities": list(self.qualities),
            "keys_per_image": self.keys_per_image,
            "block_size": self.block_size,
            "master_seed": self.master_seed,
            "subsampling": self.subsampling,
            "sns_quality": self.sns_quality,
            "budget": self.budget,
            "prune": self.prune,
            "ratio_ordering": self.ratio_ordering,
        }

    @classmethod
    def from_dict(cls, data, base_directory=None):
        """Return ExperimentPlan from dict in the JSON plan schema.

        A relative images directory is taken relative to base_directory.

        """
        if not isinstance(data, dict) or "images" not in data:
            raise ExperimentError("Plan must name an images directory")
        known = set(cls(".").as_dict())
        unknown = set(data) - known
        if unknown:
            raise ExperimentError(
                "".join(
                    ("Plan has unknown items: ", ", ".join(sorted(unknown)))
                )
            )
        settings = dict(data)
        images = settings.pop("images")
        if base_directory is not None and not os.path.isabs(images):
            images = os.path.join(base_directory, images)
        return cls(images, **settings)

    @classmethod
    def read(cls, path):
        """Return ExperimentPlan read from JSON file at path."""
        try:
            with open(path, "r", encoding="utf-8") as input_:
                data = json.load(input_)
        except (OSError, ValueError) as exc:
            raise ExperimentError(
                "".join(("Unable to read plan '", str(path), "'"))
            ) from exc
        return cls.from_dict(
            data, base_directory=os.path.dirname(os.path.abspath(path))
        )

    def image_paths(self):
        """Return sorted list of (image id, path) of images in the plan.

        An empty or missing images directory is fatal.

        """
        if not os.path.isdir(self.images):
            raise ExperimentError(
                "".join(("'", str(self.images), "' is not a directory"))
            )
        found = []
        for name in sorted(os.listdir(self.images)):
            stem, suffix = os.path.splitext(name)
            if suffix.lower() in constants.IMAGE_SUFFIXES:
                found.append((stem, os.path.join(self.images, name)))
        if not found:
            raise ExperimentError(
                "".join(("No images in '", str(self.images), "'"))
            )
        return found

    def jobs(self, output_directory):
        """Return list of CellJob for every cell of the plan."""
        settings = self.as_dict()
        settings["output_directory"] = output_directory
        return [
            CellJob(path, image_id, puzzle_type, quality, key_index, settings)
            for image_id, path in self.image_paths()
            for puzzle_type in self.types
            for quality in self.qualities
            for key_index in range(self.keys_per_image)
        ]


def budget_grid(rows, cols, budget):
    """Return (rows, cols) of the largest top-left block region within budget.

    The area is maximized first, then the shorter side, then rows.

    """
    if budget is None or rows * cols <= budget:
        return rows, cols
    best = None
    for height in range(1, rows + 1):
        width = min(cols, budget // height)
        if not width:
            continue
        key = (height * width, min(height, width), height)
        if best is None or key > best[0]:
            best = (key, height, width)
    return best[1], best[2]


def load_image(path, block_size, budget=None):
    """Return image at path cropped to whole blocks within budget."""
    image = raster.read_image(path)
    rows, cols = budget_grid(
        image.height // block_size, image.width // block_size, budget
    )
    if rows * cols < 4:
        raise ExperimentError(
            "".join(
                ("Image '", str(path), "' is too small for four blocks")
            )
        )
    return image.crop(cols * block_size, rows * block_size)


def cell_key(master_seed, image_id, key_index):
    """Return the SecretKey of a cell."""
    return cipher.SecretKey(
        *keystream.derive_seeds(4, master_seed, image_id, key_index)
    )


def run_cell(job):
    """Return ResultRow for one cell; failures are noted in the row."""
    plan = job.plan
    start = time.perf_counter()
    pieces = 0
    self_test = ""
    try:
        image = load_image(job.image_path, plan["block_size"], plan["budget"])
        rows = image.height // plan["block_size"]
        cols = image.width // plan["block_size"]
        pieces = rows * cols
        key = cell_key(plan["master_seed"], job.image_id, job.key_index)
        config = cipher.CipherConfig.for_puzzle_type(
            job.puzzle_type, plan["block_size"]
        )
        encrypted = cipher.encrypt(image, key, config)
        transmission = channel.ChannelConfig(
            job.quality, plan["sns_quality"], plan["subsampling"]
        )
        received = channel.transmit(encrypted, transmission)
        result, _, _ = assembly.solve(
            received,
            job.puzzle_type,
            block_size=plan["block_size"],
            prune=plan["prune"],
            ratio_ordering=plan["ratio_ordering"],
        )
        truth = metrics.GroundTruth.from_key_expansion(
            cipher.expand_key(key, pieces, config), rows, cols
        )
        triple, _ = metrics.best_score(result, truth)
        if transmission.is_lossless:
            decrypted = cipher.decrypt(received, key, config)
            self_test = str(
                metrics.image_score(decrypted, image, plan["block_size"])
                == metrics.ScoreTriple(1.0, 1.0, 1.0)
            ).lower()
        error = ""
    except (
        ExperimentError,
        raster.RasterError,
        cipher.CipherError,
        channel.ChannelError,
        assembly.AssemblyError,
        compatibility.CompatibilityError,
        keystream.KeystreamError,
        metrics.MetricsError,
        transform.TransformError,
        ValueError,
        MemoryError,
    ) as exc:
        write_error_to_log(
            plan["output_directory"],
            context=(
                job.image_id,
                job.puzzle_type,
                job.quality,
                job.key_index,
            ),
        )
        triple = metrics.ScoreTriple(0.0, 0.0, 0.0)
        error = " ".join(str(exc).split()) or exc.__class__.__name__
    return ResultRow(
        job.image_id,
        job.puzzle_type,
        job.quality,
        job.key_index,
        pieces,
        triple.dc,
        triple.nc,
        triple.lc,
        False,
        time.perf_counter() - start,
        self_test,
        error,
    )


def _row_sort_key(row):
    return (
        row.image_id,
        constants.PUZZLE_TYPE_ORDER.index(row.puzzle_type),
        quality_sort_key(row.quality),
        row.key_index,
    )


def select_best(rows):
    """Return rows sorted, with the best of each (image, type, quality) set.

    The selected row is a successful one if any succeeded, with the
    highest dc + nc + lc, the lowest key index breaking ties.

    """
    rows = sorted(rows, key=_row_sort_key)
    groups = collections.defaultdict(list)
    for row in rows:
        groups[_row_sort_key(row)[:3]].append(row)
    chosen = set()
    for group in groups.values():
        best = max(
            group,
            key=lambda row: (
                not row.error,
                row.dc + row.nc + row.lc,
                -row.key_index,
            ),
        )
        chosen.add(_row_sort_key(best))
    return [
        row._replace(selected=_row_sort_key(row) in chosen) for row in rows
    ]


def summarize(rows, scope=constants.SUMMARY_SELECTED):
    """Return list of SummaryRow of mean scores per (type, quality).

    scope SUMMARY_SELECTED averages the selected rows, SUMMARY_ALL every
    row.  Rows recording a failure are left out, and a (type, quality)
    with no rows left is absent rather than zero.

    """
    if not rows:
        raise ExperimentError("There are no result rows to summarize")
    if scope not in (constants.SUMMARY_SELECTED, constants.SUMMARY_ALL):
        raise ExperimentError("".join(("Unknown scope '", str(scope), "'")))
    groups = collections.defaultdict(list)
    for row in rows:
        if row.error:
            continue
        if scope == constants.SUMMARY_SELECTED and not row.selected:
            continue
        groups[(row.puzzle_type, row.quality)].append(row)
    summary = []
    for puzzle_type, quality in sorted(
        groups,
        key=lambda cell: (
            constants.PUZZLE_TYPE_ORDER.index(cell[0]),
            quality_sort_key(cell[1]),
        ),
    ):
        group = groups[(puzzle_type, quality)]
        count = len(group)
        summary.append(
            SummaryRow(
                scope,
                puzzle_type,
                quality,
                len({row.image_id for row in group}),
                sum(row.dc for row in group) / count,
                sum(row.nc for row in group) / count,
                sum(row.lc for row in group) / count,
            )
        )
    return summary


def write_results_csv(path, rows, summaries):
    """Write attempt rows then summary rows to CSV file at path."""
    with open(path, "w", encoding="utf-8", newline="") as output:
        writer = csv.writer(output, lineterminator="\n")
        writer.writerow(_RESULT_HEADER)
        for row in rows:
            writer.writerow(
                (
                    ATTEMPT,
                    "",
                    row.image_id,
                    row.puzzle_type,
                    row.quality,
                    row.key_index,
                    row.pieces,
                    "",
                )
                + metrics.ScoreTriple(row.dc, row.nc, row.lc).formatted()
                + (str(row.selected).lower(), row.self_test, row.error)
            )
        for summary in summaries:
            writer.writerow(
                (
                    SUMMARY,
                    summary.scope,
                    "",
                    summary.puzzle_type,
                    summary.quality,
                    "",
                    "",
                    summary.images,
                )
                + metrics.ScoreTriple(
                    summary.dc, summary.nc, summary.lc
                ).formatted()
                + ("", "", "")
            )


def write_timings_csv(path, rows):
    """Write wall time of each attempt row to CSV file at path."""
    with open(path, "w", encoding="utf-8", newline="") as output:
        writer = csv.writer(output, lineterminator="\n")
        writer.writerow(("image", "type", "quality", "key", "seconds"))
        for row in rows:
            writer.writerow(
                (
                    row.image_id,
                    row.puzzle_type,
                    row.quality,
                    row.key_index,
                    format(row.seconds, ".3f"),
                )
            )


def read_summary_csv(path):
    """Return list of SummaryRow read from a results CSV file."""
    summaries = []
    with open(path, "r", encoding="utf-8", newline="") as input_:
        for record in csv.DictReader(input_):
            if record["kind"] != SUMMARY:
                continue
            quality = record["quality"]
            summaries.append(
                SummaryRow(
                    record["scope"],
                    record["type"],
                    quality if quality == constants.LOSSLESS else int(quality),
                    int(record["images"]),
                    float(record["dc"]),
                    float(record["nc"]),
                    float(record["lc"]),
                )
            )
    return summaries


def timings_path(results_path):
    """Return path of the timings file written beside results_path."""
    stem, _ = os.path.splitext(results_path)
    return stem + "_timings.csv"


def run_experiment(plan, results_path, workers=1, reporter=None):
    """Run every cell of plan and write the results CSV.

    Return (rows, summaries).  The error log is written in the directory
    of results_path.

    """
    output_directory = os.path.dirname(os.path.abspath(results_path))
    jobs = plan.jobs(output_directory)
    if reporter is not None:
        reporter.append_text(
            "".join(
                (
                    "Running ",
                    str(len(jobs)),
                    " cells with ",
                    str(workers),
                    " workers.",
                )
            )
        )
    rows = select_best(task.Task(run_cell, jobs, workers=workers).run())
    summaries = summarize(rows, constants.SUMMARY_SELECTED) + summarize(
        rows, constants.SUMMARY_ALL
    )
    try:
        write_results_csv(results_path, rows, summaries)
        write_timings_csv(timings_path(results_path), rows)
    except OSError as exc:
        raise ExperimentError(
            "".join(("Unable to write results '", str(results_path), "'"))
        ) from exc
    if reporter is not None:
        failures = sum(1 for row in rows if row.error)
        reporter.append_text(
            "".join(
                (
                    "Experiment done: ",
                    str(len(rows)),
                    " rows, ",
                    str(failures),
                    " failed.",
                )
            )
        )
    return rows, summaries
