"""Subcommand handlers. Each takes the parsed namespace and returns an exit status."""
from argparse import Namespace
from pathlib import Path

import numpy as np
import torch

from backend.storage import Checkpoint, RunConfig, RunDirectory, load_checkpoint, read_rows
from backend.training import resume, train
from core.analysis import grad_magnitude, grad_magnitude_summary, layerwise_entropy, mode_pca, select_checkpoint
from core.components import Cli
from core.diffmath import REAL
from core.discriminator import CriticNetwork, critic_init
from core.errors import CheckpointError
from core.generator import apply_shot_deviation, count_parameters, generate_image, sample_shot_deviation
from core.image_codec import bilinear_resize, decode, encode, invert, load_any, save_any, tile_grid
from core.rng import make_rng
from core.schema import GeneratorConfig
from core.statevector import load_state, probabilities, save_state
from core.utils import write_log


def _checkpoint(args: Namespace) -> tuple[RunDirectory, Path, Checkpoint]:
    run: RunDirectory = RunDirectory.open(args.run)
    path: Path = Path(args.checkpoint) if args.checkpoint else run.latest_checkpoint()
    return run, path, load_checkpoint(path)


def _theta(checkpoint: Checkpoint) -> torch.Tensor:
    return torch.from_numpy(checkpoint.arrays["generator.theta"].copy()).to(REAL)


def _critic(checkpoint: Checkpoint) -> CriticNetwork:
    network: CriticNetwork = critic_init(checkpoint.config.critic, make_rng(0), zero=True)
    network.load_arrays(checkpoint.arrays)
    return network


def _mode(args: Namespace, config: GeneratorConfig) -> int | None:
    """CLI modes are 1-based."""
    if args.mode is None:
        return None

    if not 1 <= args.mode <= config.modes:
        raise ValueError(f"--mode must lie in [1, {config.modes}], got {args.mode}")

    return args.mode - 1


def encode_command(args: Namespace) -> int:
    image: torch.Tensor = load_any(args.input)

    if args.resize:
        image = bilinear_resize(image, args.resize)

    state = encode(image, args.encoding)
    save_state(args.output, state)
    write_log("INFO", Cli, "ENCODE", "", f"{args.input} -> {args.output} ({args.encoding}, {state.n_qubits} qubits).")
    print(f"{args.output}: {state.n_qubits} qubits")
    return 0


def decode_command(args: Namespace) -> int:
    p: torch.Tensor = probabilities(load_state(args.input))

    if args.shots is not None:
        p = apply_shot_deviation(p, sample_shot_deviation(p, args.shots, make_rng(args.seed)))

    save_any(args.output, decode(p, args.encoding))
    write_log("INFO", Cli, "DECODE", "", f"{args.input} -> {args.output} ({args.encoding}, shots={args.shots}).")
    return 0


def train_command(args: Namespace) -> int:
    config: RunConfig = RunConfig.load(args.config) if args.config else RunConfig()
    run: RunDirectory = train(config, args.run)
    print(f"{run.path}: {len(run.checkpoints())} checkpoint(s)")
    return 0


def resume_command(args: Namespace) -> int:
    run: RunDirectory = resume(args.run)
    print(f"{run.path}: {len(run.checkpoints())} checkpoint(s)")
    return 0


def sample_command(args: Namespace) -> int:
    _, path, checkpoint = _checkpoint(args)
    config: GeneratorConfig = checkpoint.config.generator

    with torch.no_grad():
        images: torch.Tensor = generate_image(config, _theta(checkpoint), make_rng(args.seed), args.shots, args.count, _mode(args, config))

    if args.invert:
        images = invert(images)

    save_any(args.output, tile_grid(images, args.columns) if args.count > 1 else images[0])
    write_log("INFO", Cli, "SAMPLE", checkpoint.config.name, f"{args.count} samples from {path} -> {args.output}.")
    return 0


def select_command(args: Namespace) -> int:
    run: RunDirectory = RunDirectory.open(args.run)
    rows: list[dict[str, str]] = [row for row in read_rows(run.metrics_path) if row["mmd_rbf"]]

    if not rows:
        raise CheckpointError(f"{run.metrics_path} has no MMD evaluations")

    series: dict[str, list[float]] = {kernel: [float(row[f"mmd_{kernel}"]) for row in rows] for kernel in ("linear", "poly", "rbf")}
    best: int = select_checkpoint(series, args.window or run.config().analysis.smoothing_window)
    iteration: int = int(rows[best]["iteration"])
    print(f"{iteration}\t{run.checkpoint_path(iteration)}")
    write_log("INFO", Cli, "SELECT", run.config().name, f"Selected iteration {iteration} of {len(rows)} evaluations.")
    return 0


def entropy_command(args: Namespace) -> int:
    _, _, checkpoint = _checkpoint(args)
    draws: int = args.draws or checkpoint.config.analysis.entropy_draws
    trace = layerwise_entropy(checkpoint.config.generator, _theta(checkpoint), make_rng(args.seed), draws=draws)
    text: str = trace.to_csv(args.output)

    if args.output is None:
        print(text, end="")

    else:
        print(f"{args.output}: {len(trace.rows)} rows")

    return 0


def grad_command(args: Namespace) -> int:
    run, _, checkpoint = _checkpoint(args)

    if args.summary:
        series: list[tuple[int, float]] = [(int(row["iteration"]), float(row["grad_magnitude"])) for row in read_rows(run.grad_path)]
        print(repr(grad_magnitude_summary(series, args.start, args.stop)))
        return 0

    batch: int = args.batch or checkpoint.config.analysis.grad_batch
    value: float = grad_magnitude(checkpoint.config.generator, _theta(checkpoint), _critic(checkpoint), make_rng(args.seed), batch, checkpoint.config.train.shots)
    print(repr(value))
    return 0


def pca_command(args: Namespace) -> int:
    _, path, checkpoint = _checkpoint(args)
    config: GeneratorConfig = checkpoint.config.generator
    count: int = args.samples or checkpoint.config.analysis.pca_samples
    mode: int = _mode(args, config) or 0

    with torch.no_grad():
        samples: torch.Tensor = generate_image(config, _theta(checkpoint), make_rng(args.seed), None, count, mode)

    result = mode_pca(samples, checkpoint.config.analysis.pca_spread)
    sheet: torch.Tensor = torch.from_numpy(np.stack([result.minus, result.mean, result.plus]))

    if args.invert:
        sheet = invert(sheet)

    save_any(args.output, tile_grid(sheet, 3))
    print(f"mode {mode + 1}: sigma1={result.sigma!r} zero_variance={result.zero_variance}")
    write_log("INFO", Cli, "PCA", checkpoint.config.name, f"Mode {mode + 1} of {path}: sigma1={result.sigma:.6g}.")
    return 0


def count_command(args: Namespace) -> int:
    if args.config:
        config: GeneratorConfig = RunConfig.load(args.config).generator

    else:
        config = GeneratorConfig(
                encoding=args.encoding, ansatz=args.ansatz, side=args.side, layers=args.layers,
                sublayers=args.sublayers, modes=args.modes, channel_layout=args.channel_layout,
        )

    print(count_parameters(config))
    return 0
