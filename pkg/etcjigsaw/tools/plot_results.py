# plot_results.py
# Copyright 2017 EtC Jigsaw Workbench developers
# Licence: See LICENCE (BSD licence)

"""Plot Dc, Nc, and Lc against JPEG quality from an experiment results CSV.

One panel is drawn for each measure with a line for each puzzle type.  The
lossless points are drawn at the right of the quality axis.

    python -m etcjigsaw.tools.plot_results results.csv results.png

"""
import argparse
import sys

try:
    import matplotlib

    matplotlib.use("Agg")
    from matplotlib import pyplot
except ImportError:  # The plot extra is not installed.
    pyplot = None

from ..core import constants
from ..core import experiment

MEASURES = (("dc", "Dc"), ("nc", "Nc"), ("lc", "Lc"))


def quality_positions(qualities):
    """Return dict of quality to x position and the lossless tick label."""
    numbers = sorted(q for q in qualities if q != constants.LOSSLESS)
    positions = {quality: quality for quality in numbers}
    if constants.LOSSLESS in qualities:
        step = 10
        if len(numbers) > 1:
            step = numbers[-1] - numbers[-2]
        positions[constants.LOSSLESS] = (numbers[-1] if numbers else 0) + step
    return positions


def series(summaries, scope=constants.SUMMARY_SELECTED):
    """Return dict of puzzle type to list of (quality, SummaryRow)."""
    lines = {}
    for summary in summaries:
        if summary.scope != scope:
            continue
        lines.setdefault(summary.puzzle_type, []).append(
            (summary.quality, summary)
        )
    for points in lines.values():
        points.sort(key=lambda point: experiment.quality_sort_key(point[0]))
    return lines


def plot(results_path, image_path, scope=constants.SUMMARY_SELECTED):
    """Write a three panel chart of results_path summary rows."""
    if pyplot is None:
        raise experiment.ExperimentError(
            "matplotlib is needed to plot results"
        )
    summaries = experiment.read_summary_csv(results_path)
    lines = series(summaries, scope)
    if not lines:
        raise experiment.ExperimentError(
            "".join(("No ", scope, " summary rows in '", results_path, "'"))
        )
    positions = quality_positions({s.quality for s in summaries})
    figure, axes = pyplot.subplots(1, len(MEASURES), figsize=(15, 4.5))
    for axis, (field, title) in zip(axes, MEASURES):
        for puzzle_type in constants.PUZZLE_TYPE_ORDER:
            if puzzle_type not in lines:
                continue
            points = lines[puzzle_type]
            axis.plot(
                [positions[quality] for quality, _ in points],
                [getattr(summary, field) for _, summary in points],
                marker="o",
                label="Type " + puzzle_type,
            )
        axis.set_title(title)
        axis.set_xlabel("Quality factor Q")
        axis.set_ylim(0, 1)
        axis.set_xticks(sorted(positions.values()))
        axis.set_xticklabels(
            [
                "none" if quality == constants.LOSSLESS else str(quality)
                for quality in sorted(positions, key=positions.get)
            ]
        )
        axis.grid(True, alpha=0.3)
    axes[0].legend()
    figure.tight_layout()
    figure.savefig(image_path)
    pyplot.close(figure)


def main(argv=None):
    """Plot the results file named in argv."""
    parser = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    parser.add_argument("results", help="results CSV from an experiment")
    parser.add_argument("image", help="chart file, PNG or PDF")
    parser.add_argument(
        "--all-rows",
        action="store_true",
        help="average every attempt rather than the selected ones",
    )
    args = parser.parse_args(argv)
    try:
        plot(
            args.results,
            args.image,
            (
                constants.SUMMARY_ALL
                if args.all_rows
                else constants.SUMMARY_SELECTED
            ),
        )
    except (experiment.ExperimentError, OSError) as exc:
        sys.stderr.write(str(exc) + "\n")
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
