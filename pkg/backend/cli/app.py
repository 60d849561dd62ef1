import sys
from argparse import ArgumentParser, Namespace
from logging import getLevelName
from pathlib import Path
from traceback import format_exc
from typing import Sequence

from backend.cli.routers import (
    count_command, decode_command, encode_command, entropy_command, grad_command, pca_command, resume_command, sample_command,
    select_command, train_command,
)
from core.components import Cli
from core.settings import LOG_PATH, RUNS_PATH
from core.utils import configure_logging, write_log

ENCODINGS: tuple[str, ...] = ("frqi", "mcrqi", "amplitude")


def _run_argument(parser: ArgumentParser) -> None:
    parser.add_argument("run", type=Path, help=f"run directory (relative paths are taken as given; {RUNS_PATH} is the usual parent)")


def _checkpoint_arguments(parser: ArgumentParser) -> None:
    _run_argument(parser)
    parser.add_argument("--checkpoint", type=Path, default=None, help="checkpoint manifest; defaults to the newest one")
    parser.add_argument("--seed", type=int, default=0)


def _analyze_parser(subparsers) -> None:
    analyze: ArgumentParser = subparsers.add_parser("analyze", help="post-training analysis of a checkpoint")
    tools = analyze.add_subparsers(dest="tool", required=True)

    entropy: ArgumentParser = tools.add_parser("entropy", help="layer-wise von Neumann entropies")
    _checkpoint_arguments(entropy)
    entropy.add_argument("--draws", type=int, default=None)
    entropy.add_argument("--output", type=Path, default=None, help="CSV destination; printed to stdout when omitted")
    entropy.set_defaults(handler=entropy_command)

    grad: ArgumentParser = tools.add_parser("grad", help="relative generator gradient magnitude")
    _checkpoint_arguments(grad)
    grad.add_argument("--batch", type=int, default=None)
    grad.add_argument("--summary", action="store_true", help="average the logged grad_magnitude.csv instead")
    grad.add_argument("--start", type=int, default=0)
    grad.add_argument("--stop", type=int, default=None)
    grad.set_defaults(handler=grad_command)

    pca: ArgumentParser = tools.add_parser("pca", help="principal component of one noise mode")
    _checkpoint_arguments(pca)
    pca.add_argument("--samples", type=int, default=None)
    pca.add_argument("--mode", type=int, default=None, help="1-based mode index")
    pca.add_argument("--invert", action="store_true")
    pca.add_argument("--output", type=Path, required=True)
    pca.set_defaults(handler=pca_command)


def build_parser() -> ArgumentParser:
    parser: ArgumentParser = ArgumentParser(prog=Cli.PROG, description="Quantum image WGAN simulation toolkit.")
    parser.add_argument("--log-level", default="INFO", choices=("DEBUG", "INFO", "WARNING", "ERROR"))
    parser.add_argument("--log-file", type=Path, default=LOG_PATH)
    subparsers = parser.add_subparsers(dest="command", required=True)

    encode: ArgumentParser = subparsers.add_parser("encode", help="image file to .qsv statevector")
    encode.add_argument("input", type=Path)
    encode.add_argument("output", type=Path)
    encode.add_argument("--encoding", choices=ENCODINGS, default="frqi")
    encode.add_argument("--resize", type=int, default=None)
    encode.set_defaults(handler=encode_command)

    decode: ArgumentParser = subparsers.add_parser("decode", help=".qsv statevector to image file")
    decode.add_argument("input", type=Path)
    decode.add_argument("output", type=Path)
    decode.add_argument("--encoding", choices=ENCODINGS, default="frqi")
    decode.add_argument("--shots", type=int, default=None)
    decode.add_argument("--seed", type=int, default=0)
    decode.set_defaults(handler=decode_command)

    train: ArgumentParser = subparsers.add_parser("train", help="start a training run")
    _run_argument(train)
    train.add_argument("--config", type=Path, default=None, help="RunConfig JSON; defaults apply when omitted")
    train.set_defaults(handler=train_command)

    resume: ArgumentParser = subparsers.add_parser("resume", help="continue a run from its newest checkpoint")
    _run_argument(resume)
    resume.set_defaults(handler=resume_command)

    sample: ArgumentParser = subparsers.add_parser("sample", help="draw images from a checkpoint")
    _checkpoint_arguments(sample)
    sample.add_argument("--shots", type=int, default=None)
    sample.add_argument("--count", type=int, default=1)
    sample.add_argument("--mode", type=int, default=None, help="1-based mode index")
    sample.add_argument("--invert", action="store_true")
    sample.add_argument("--columns", type=int, default=8)
    sample.add_argument("--output", type=Path, required=True)
    sample.set_defaults(handler=sample_command)

    select: ArgumentParser = subparsers.add_parser("select", help="pick the best checkpoint by smoothed MMD")
    _run_argument(select)
    select.add_argument("--window", type=int, default=None)
    select.set_defaults(handler=select_command)

    _analyze_parser(subparsers)

    count: ArgumentParser = subparsers.add_parser("count", help="number of generator parameters")
    count.add_argument("--config", type=Path, default=None)
    count.add_argument("--encoding", choices=ENCODINGS, default="frqi")
    count.add_argument("--ansatz", choices=("task_specific", "task_agnostic"), default="task_specific")
    count.add_argument("--side", type=int, default=4)
    count.add_argument("--layers", type=int, default=4)
    count.add_argument("--sublayers", type=int, default=2)
    count.add_argument("--modes", type=int, default=2)
    count.add_argument("--channel-layout", dest="channel_layout", choices=("address", "control"), default="address")
    count.set_defaults(handler=count_command)

    return parser


def run(argv: Sequence[str] | None = None) -> int:
    args: Namespace = build_parser().parse_args(argv)
    configure_logging(args.log_file, getLevelName(args.log_level))
    write_log("DEBUG", Cli, "RUN", "", f"{args.command}: {vars(args)}")

    try:
        return args.handler(args)

    except Exception as e:
        write_log("ERROR", Cli, args.command.upper(), "", f"Command failed: {e}\n{format_exc()}")
        print(f"{Cli.PROG} {args.command}: {type(e).__name__}: {e}", file=sys.stderr)
        return 1
