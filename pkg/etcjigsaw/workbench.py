# workbench.py
# Copyright 2017 EtC Jigsaw Workbench developers
# Licence: See LICENCE (BSD licence)

"""Command line for the EtC jigsaw puzzle workbench.

Subcommands generate keys, encrypt and decrypt images, pass images through
the JPEG channel, attack encrypted images, score assemblies, and run
experiments.  Errors are reported on stderr with exit status 1.

"""
import argparse
import os
import sys

from . import APPLICATION_NAME
from . import RESULTS_DIRECTORY
from .core import assembly
from .core import channel
from .core import cipher
from .core import compatibility
from .core import configuration
from .core import constants
from .core import experiment
from .core import metrics
from .core import raster
from .core import task
from .core import transform

_ERRORS = (
    raster.RasterError,
    transform.TransformError,
    cipher.CipherError,
    channel.ChannelError,
    compatibility.CompatibilityError,
    assembly.AssemblyError,
    metrics.MetricsError,
    experiment.ExperimentError,
    task.TaskError,
    OSError,
)


class StderrReporter:
    """Report progress on stderr unless quiet."""

    def __init__(self, quiet=False):
        """Note whether to be quiet."""
        self.quiet = quiet

    def append_text(self, text):
        """Write text after a blank line."""
        if not self.quiet:
            sys.stderr.write("\n" + text + "\n")

    def append_text_only(self, text):
        """Write text."""
        if not self.quiet:
            sys.stderr.write(text + "\n")


def _quality(text):
    """Return quality from command line text: an integer or LOSSLESS."""
    if text == constants.LOSSLESS:
        return text
    try:
        return int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(
            "".join(("'", text, "' is not a quality or ", constants.LOSSLESS))
        ) from None


def _configured(item):
    """Return value of item in the user's configuration file."""
    return configuration.Configuration().get_configuration_value(item)


def _block_size(args):
    if args.block is not None:
        return args.block
    return int(_configured(constants.BLOCK_SIZE))


def _subsampling(args):
    if args.subsampling is not None:
        return args.subsampling
    return _configured(constants.CHROMA_SUBSAMPLING)


def _workers(args):
    if args.workers is None and not os.environ.get(
        constants.WORKERS_ENVIRONMENT_VARIABLE
    ):
        return task.worker_count(configured=_configured(constants.WORKERS))
    return task.worker_count(args.workers)


def _key_and_config(args):
    """Return key and cipher config from key file, type, and block size."""
    key, config = cipher.read_key_file(args.key)
    if config is None or args.type is not None:
        config = cipher.CipherConfig.for_puzzle_type(
            args.type or constants.TYPE_INC, _block_size(args)
        )
    return key, config


def do_keygen(args, reporter):
    """Write a new key file."""
    key = cipher.generate_key(args.seed)
    config = cipher.CipherConfig.for_puzzle_type(args.type, _block_size(args))
    cipher.write_key_file(args.out, key, config)
    reporter.append_text_only("".join(("Key written to ", args.out)))


def do_keyspace(args, reporter):
    """Print key space size and bits for a number of blocks."""
    block = _block_size(args)
    if args.image is not None:
        image = raster.read_image(args.image)
        pieces = (image.width // block) * (image.height // block)
    else:
        pieces = args.pieces
    config = cipher.CipherConfig.for_puzzle_type(args.type, block)
    print(cipher.key_space(pieces, config))
    print(format(cipher.key_space_bits(pieces, config), ".3f"))


def do_encrypt(args, reporter):
    """Encrypt an image, optionally writing the ground truth manifest."""
    key, config = _key_and_config(args)
    image = raster.read_image(args.input)
    encrypted = cipher.encrypt(image, key, config)
    raster.write_image(encrypted, args.output)
    if args.emit_truth is not None:
        rows = encrypted.height // config.block_h
        cols = encrypted.width // config.block_w
        truth = metrics.GroundTruth.from_key_expansion(
            cipher.expand_key(key, rows * cols, config), rows, cols
        )
        metrics.write_manifest(args.emit_truth, truth.as_dict())
    reporter.append_text_only(
        "".join(("Encrypted image written to ", args.output))
    )


def do_decrypt(args, reporter):
    """Decrypt an image with the correct key."""
    key, config = _key_and_config(args)
    decrypted = cipher.decrypt(raster.read_image(args.input), key, config)
    raster.write_image(decrypted, args.output)
    reporter.append_text_only(
        "".join(("Decrypted image written to ", args.output))
    )


def do_channel(args, reporter):
    """Pass an image through the user and SNS JPEG hops."""
    config = channel.ChannelConfig(
        args.quser, args.qsns, _subsampling(args)
    )
    image = raster.read_image(args.input)
    received = channel.transmit(
        image, config, keep_directory=args.keep_intermediates
    )
    raster.write_image(received, args.output)
    reporter.append_text_only(
        "".join(
            (
                "Received image written to ",
                args.output,
                ", PSNR ",
                format(channel.psnr(image, received), ".2f"),
                " dB",
            )
        )
    )


def do_attack(args, reporter):
    """Assemble an encrypted image by the jigsaw puzzle solver."""
    image = raster.read_image(args.input)
    block = _block_size(args)
    result, table, pieces = assembly.solve(
        image,
        args.type,
        block_size=block,
        rows=args.rows,
        cols=args.cols,
        prune=args.prune,
        workers=_workers(args),
        ratio_ordering=not args.no_ratio_ordering,
        reporter=reporter,
    )
    if args.emit_assembled is not None:
        raster.write_image(result.render(pieces), args.emit_assembled)
    if args.emit_table is not None:
        table.write_csv(args.emit_table)
    if args.emit_result is not None:
        metrics.write_manifest(args.emit_result, result.as_dict())
    reporter.append_text_only(
        "".join(
            (
                "Assembled ",
                str(result.rows),
                " x ",
                str(result.cols),
                " canvas, ",
                str(len(result.unplaced)),
                " pieces unplaced.",
            )
        )
    )


def do_score(args, reporter):
    """Print dc,nc,lc of a result manifest against a truth manifest."""
    result = assembly.AssemblyResult.from_dict(
        metrics.read_manifest(args.result)
    )
    truth = metrics.GroundTruth.from_dict(metrics.read_manifest(args.truth))
    if args.strict:
        triple = metrics.score(result, truth)
    else:
        triple, _ = metrics.best_score(
            result,
            truth,
            allowance=(
                constants.SCORE_ANY_SYMMETRY
                if args.any_symmetry
                else constants.SCORE_POLARITY
            ),
        )
    print(",".join(triple.formatted()))


def _results_path(args):
    """Return results path from --out or the configured results directory."""
    if args.out is not None:
        return args.out
    directory = os.path.join(
        os.path.expanduser(_configured(constants.RESULTS_DIRECTORY)),
        RESULTS_DIRECTORY,
    )
    os.makedirs(directory, exist_ok=True)
    stem = os.path.splitext(os.path.basename(args.plan))[0]
    return os.path.join(directory, stem + ".csv")


def do_experiment(args, reporter):
    """Run an experiment plan and write the results CSV."""
    plan = experiment.ExperimentPlan.read(args.plan)
    if args.budget is not None:
        settings = plan.as_dict()
        settings["budget"] = args.budget
        plan = experiment.ExperimentPlan(**settings)
    experiment.run_experiment(
        plan, _results_path(args), workers=_workers(args), reporter=reporter
    )


def _parser():
    """Return the argument parser."""
    parser = argparse.ArgumentParser(
        prog="etcjigsaw",
        description="Encrypt, compress, attack, and score EtC images.",
    )
    parser.add_argument(
        "--quiet", action="store_true", help="do not report progress"
    )
    commands = parser.add_subparsers(dest="command", required=True)

    def add_command(name, function, help_):
        command = commands.add_parser(name, help=help_)
        command.set_defaults(function=function)
        return command

    def add_block(command):
        command.add_argument("--block", type=int, help="block size in pixels")

    def add_type(command, default=None):
        command.add_argument(
            "--type",
            choices=constants.PUZZLE_TYPE_ORDER,
            default=default,
            help="puzzle type",
        )

    command = add_command("keygen", do_keygen, "write a new key file")
    command.add_argument("--seed", type=int, help="derive key from seed")
    command.add_argument("--out", required=True, help="key file")
    add_type(command, constants.TYPE_INC)
    add_block(command)

    command = add_command("keyspace", do_keyspace, "print key space size")
    source = command.add_mutually_exclusive_group(required=True)
    source.add_argument("--pieces", type=int, help="number of blocks")
    source.add_argument("--image", help="image giving number of blocks")
    add_type(command, constants.TYPE_INC)
    add_block(command)

    for name, function, help_ in (
        ("encrypt", do_encrypt, "encrypt an image"),
        ("decrypt", do_decrypt, "decrypt an image"),
    ):
        command = add_command(name, function, help_)
        command.add_argument("input", help="lossless image file")
        command.add_argument("output", help="PPM or PNG file")
        command.add_argument("--key", required=True, help="key file")
        add_type(command)
        add_block(command)
        if name == "encrypt":
            command.add_argument(
                "--emit-truth", help="write ground truth manifest"
            )

    command = add_command("channel", do_channel, "apply the JPEG hops")
    command.add_argument("input", help="lossless image file")
    command.add_argument("output", help="PPM or PNG file")
    command.add_argument(
        "--quser", type=_quality, default=constants.LOSSLESS
    )
    command.add_argument("--qsns", type=_quality, default=constants.LOSSLESS)
    command.add_argument("--subsampling", choices=constants.SUBSAMPLING)
    command.add_argument(
        "--keep-intermediates", help="directory for the JFIF files"
    )

    command = add_command("attack", do_attack, "solve an encrypted image")
    command.add_argument("input", help="lossless image file")
    add_type(command, constants.TYPE_INC)
    add_block(command)
    command.add_argument("--rows", type=int, help="canvas rows")
    command.add_argument("--cols", type=int, help="canvas columns")
    command.add_argument("--emit-assembled", help="assembled image file")
    command.add_argument("--emit-table", help="compatibility table CSV")
    command.add_argument("--emit-result", help="result manifest")
    command.add_argument(
        "--prune", action="store_true", help="one transform per action"
    )
    command.add_argument(
        "--no-ratio-ordering",
        action="store_true",
        help="merge in order of raw cost",
    )
    command.add_argument("--workers", type=int)

    command = add_command("score", do_score, "score a result manifest")
    command.add_argument("--result", required=True)
    command.add_argument("--truth", required=True)
    allowance = command.add_mutually_exclusive_group()
    allowance.add_argument(
        "--strict",
        action="store_true",
        help="score the result as given, not its best interpretation",
    )
    allowance.add_argument(
        "--any-symmetry",
        action="store_true",
        help="accept any global rotation, flip, or color order for Dc",
    )

    command = add_command("experiment", do_experiment, "run a plan")
    command.add_argument("--plan", required=True, help="JSON plan")
    command.add_argument(
        "--out", help="results CSV, default in the results directory"
    )
    command.add_argument("--budget", type=int, help="pieces per image")
    command.add_argument("--workers", type=int)
    return parser


def main(argv=None):
    """Run the command in argv and return the exit status."""
    args = _parser().parse_args(argv)
    reporter = StderrReporter(quiet=args.quiet)
    try:
        args.function(args, reporter)
    except _ERRORS as exc:
        sys.stderr.write("".join((APPLICATION_NAME, ": ", str(exc), "\n")))
        return 1
    return 0


if __name__ == "__main__":
    import multiprocessing

    multiprocessing.set_start_method("spawn")
    del multiprocessing

    sys.exit(main())
