"""WGAN-GP training loop with checkpointing and bit-identical resume.

Per generator iteration the ``train`` stream is drawn in this order, for each
of the n_critic critic steps: real indices, fake modes, fake ε, shot counts
(when training with shots), interpolation coefficients u; then for the
generator step: modes, ε, shot counts. Checkpoint-time MMD draws come from the
``eval`` stream, so the evaluation cadence never shifts training draws.
"""
from dataclasses import dataclass
from math import fsum, isfinite
from pathlib import Path
from time import perf_counter

import numpy as np
import torch

from backend.storage import Checkpoint, Dataset, RunConfig, RunDirectory, append_rows, dataset_from_config, load_checkpoint, save_checkpoint, truncate_rows
from backend.training.optimizer import make_adam, moments_from_arrays, moments_to_arrays, read_moments, write_moments
from core.analysis import mmd_report, relative_norm
from core.components import Trainer
from core.diffmath import REAL, gradient
from core.discriminator import CriticNetwork, critic_init
from core.errors import CheckpointError, TrainingDivergedError
from core.generator import ParameterLayout, forward, init_params, sample_noise, sample_shot_deviation
from core.image_codec import decode
from core.losses import critic_loss, fake_batch, generator_loss
from core.rng import make_streams, rng_from_state, rng_state
from core.settings import thread_count
from core.statevector import probabilities
from core.utils import write_log

METRICS_HEADER: tuple[str, ...] = ("iteration", "loss_g", "loss_d", "mmd_linear", "mmd_poly", "mmd_rbf")
TIMING_HEADER: tuple[str, ...] = ("iteration", "wall_time")
GRAD_HEADER: tuple[str, ...] = ("iteration", "grad_magnitude")


@dataclass
class TrainingState:
    config: RunConfig
    theta: torch.Tensor
    critic: CriticNetwork
    generator_opt: torch.optim.Adam
    critic_opt: torch.optim.Adam
    streams: dict[str, np.random.Generator]
    iteration: int = 0

    @property
    def critic_params(self) -> list[torch.Tensor]:
        return list(self.critic.parameters())

    @property
    def critic_names(self) -> list[str]:
        return [name for name, _ in self.critic.named_parameters()]


def init_state(config: RunConfig) -> TrainingState:
    """Fresh parameters: generator angles first, then critic weights, both from the ``train`` stream."""
    streams: dict[str, np.random.Generator] = make_streams(config.train.seed)
    theta: torch.Tensor = init_params(config.generator, streams["train"], config.train.init_std, config.train.noise_init_scale).requires_grad_(True)
    critic: CriticNetwork = critic_init(config.critic, streams["train"])
    return TrainingState(
            config, theta, critic,
            make_adam([theta], config.train.generator_lr, config.train),
            make_adam(critic.parameters(), config.train.effective_critic_lr, config.train),
            streams,
    )


def state_to_checkpoint(state: TrainingState, status: str = "ok") -> Checkpoint:
    arrays: dict[str, np.ndarray] = {"generator.theta": state.theta.detach().numpy().copy(), **state.critic.named_arrays()}
    generator_moments, generator_step = moments_to_arrays("adam.generator", ["theta"], read_moments(state.generator_opt, [state.theta]))
    critic_moments, critic_step = moments_to_arrays("adam.critic", state.critic_names, read_moments(state.critic_opt, state.critic_params))
    return Checkpoint(
            state.config, state.iteration, arrays | generator_moments | critic_moments,
            {"adam.critic.step": critic_step, "adam.generator.step": generator_step, "generator.layout_version": ParameterLayout.version},
            {name: rng_state(rng) for name, rng in state.streams.items()},
            status,
    )


def state_from_checkpoint(checkpoint: Checkpoint) -> TrainingState:
    config: RunConfig = checkpoint.config

    if "generator.theta" not in checkpoint.arrays:
        raise CheckpointError("checkpoint has no generator parameters")

    if checkpoint.counters.get("generator.layout_version") != ParameterLayout.version:
        raise CheckpointError(f"generator parameters use layout version {checkpoint.counters.get('generator.layout_version')}, expected {ParameterLayout.version}")

    theta: torch.Tensor = torch.from_numpy(checkpoint.arrays["generator.theta"].copy()).to(REAL).requires_grad_(True)
    critic: CriticNetwork = critic_init(config.critic, np.random.default_rng(0), zero=True)
    critic.load_arrays(checkpoint.arrays)
    state: TrainingState = TrainingState(
            config, theta, critic,
            make_adam([theta], config.train.generator_lr, config.train),
            make_adam(critic.parameters(), config.train.effective_critic_lr, config.train),
            {name: rng_from_state(value) for name, value in checkpoint.rng.items()},
            checkpoint.iteration,
    )
    write_moments(state.generator_opt, [theta], moments_from_arrays("adam.generator", ["theta"], checkpoint.arrays, checkpoint.counters["adam.generator.step"]))
    write_moments(state.critic_opt, state.critic_params, moments_from_arrays("adam.critic", state.critic_names, checkpoint.arrays, checkpoint.counters["adam.critic.step"]))
    return state


def _fake(state: TrainingState, rng: np.random.Generator, batch: int, theta: torch.Tensor) -> torch.Tensor:
    generator, shots = state.config.generator, state.config.train.shots
    noise = sample_noise(generator, theta, rng, batch)
    deviation: torch.Tensor | None = None

    if shots is not None:
        with torch.no_grad():
            deviation = sample_shot_deviation(probabilities(forward(generator, theta, noise)), shots, rng)

    return fake_batch(generator, theta, noise, deviation)


def _assign(params: list[torch.Tensor], grads: list[torch.Tensor]) -> None:
    for p, g in zip(params, grads):
        p.grad = g


def train_iteration(state: TrainingState, dataset: Dataset) -> tuple[float, float, float]:
    """n_critic critic updates, then one generator update; returns (L_G, mean L_D, ‖∇L_G‖/K)."""
    train = state.config.train
    rng: np.random.Generator = state.streams["train"]
    critic_losses: list[float] = []

    for _ in range(train.n_critic):
        real: torch.Tensor = dataset.batch(rng, train.batch_size)

        with torch.no_grad():
            fake: torch.Tensor = _fake(state, rng, train.batch_size, state.theta.detach())

        u: torch.Tensor = torch.from_numpy(rng.random(train.batch_size)).to(REAL)
        loss_d: torch.Tensor = critic_loss(real, fake, state.critic, train.penalty, u=u)
        critic_losses.append(float(loss_d.detach()))

        if not isfinite(critic_losses[-1]):
            raise TrainingDivergedError(f"critic loss became {critic_losses[-1]} at iteration {state.iteration + 1}")

        state.critic_opt.zero_grad(set_to_none=True)
        _assign(state.critic_params, gradient(loss_d, state.critic_params))
        state.critic_opt.step()

    loss_g: torch.Tensor = generator_loss(_fake(state, rng, train.batch_size, state.theta), state.critic)
    generator_value: float = float(loss_g.detach())

    if not isfinite(generator_value):
        raise TrainingDivergedError(f"generator loss became {generator_value} at iteration {state.iteration + 1}")

    (grad,) = gradient(loss_g, [state.theta])
    state.generator_opt.zero_grad(set_to_none=True)
    _assign([state.theta], [grad])
    state.generator_opt.step()
    state.iteration += 1
    return generator_value, fsum(critic_losses) / len(critic_losses), relative_norm(grad)


def evaluate_mmd(state: TrainingState, dataset: Dataset) -> dict[str, float]:
    """MMD between `mmd_samples` real images and as many exact-probability generator samples."""
    k: int = state.config.train.mmd_samples
    rng: np.random.Generator = state.streams["eval"]
    real: torch.Tensor = dataset.batch(rng, k)

    with torch.no_grad():
        noise = sample_noise(state.config.generator, state.theta.detach(), rng, k)
        fake: torch.Tensor = decode(probabilities(forward(state.config.generator, state.theta.detach(), noise)), state.config.generator.encoding)

    return mmd_report(real, fake).as_dict()


def _checkpoint(state: TrainingState, run: RunDirectory, dataset: Dataset) -> dict[str, float]:
    report: dict[str, float] = evaluate_mmd(state, dataset)
    save_checkpoint(run.checkpoint_path(state.iteration), state_to_checkpoint(state))
    write_log("INFO", Trainer, "CHECKPOINT", state.config.name, f"Iteration {state.iteration}: " + ", ".join(f"{key}={value:.6g}" for key, value in report.items()))
    return report


def _is_checkpoint(iteration: int, total: int, interval: int) -> bool:
    return iteration == total or iteration % interval == 0


def _run(state: TrainingState, run: RunDirectory, dataset: Dataset) -> TrainingState:
    torch.set_num_threads(thread_count())
    train = state.config.train
    started: float = perf_counter()

    while state.iteration < train.iterations:
        try:
            loss_g, loss_d, magnitude = train_iteration(state, dataset)

        except TrainingDivergedError as e:
            save_checkpoint(run.diverged_path, state_to_checkpoint(state, status="diverged"))
            write_log("ERROR", Trainer, "TRAIN", state.config.name, f"{e}; diagnostic checkpoint written to {run.diverged_path}.")
            raise

        report: dict[str, float | None] = dict.fromkeys(METRICS_HEADER[3:])

        if _is_checkpoint(state.iteration, train.iterations, train.checkpoint_interval):
            report = _checkpoint(state, run, dataset)

        append_rows(run.metrics_path, METRICS_HEADER, [(state.iteration, loss_g, loss_d, *report.values())])
        append_rows(run.timing_path, TIMING_HEADER, [(state.iteration, perf_counter() - started)])

        if train.track_grad_magnitude:
            append_rows(run.grad_path, GRAD_HEADER, [(state.iteration, magnitude)])

    write_log("INFO", Trainer, "TRAIN", state.config.name, f"Finished at iteration {state.iteration} in {perf_counter() - started:.1f}s.")
    return state


def train(config: RunConfig, path: Path, dataset: Dataset | None = None) -> RunDirectory:
    """Start a run in `path`: iteration-0 checkpoint, then the loop up to ``config.train.iterations``."""
    run: RunDirectory = RunDirectory.create(path, config)

    if run.checkpoints():
        raise CheckpointError(f"{run.path} already holds checkpoints; resume it instead")

    streams: dict[str, np.random.Generator] = make_streams(config.train.seed)
    dataset = dataset or dataset_from_config(config.dataset, config.generator.side, streams["data"])
    state: TrainingState = init_state(config)
    write_log("INFO", Trainer, "TRAIN", config.name, f"Starting {config!r} on {dataset!r}.")
    report: dict[str, float] = _checkpoint(state, run, dataset)
    append_rows(run.metrics_path, METRICS_HEADER, [(0, None, None, *report.values())])
    _run(state, run, dataset)
    return run


def resume(path: Path, dataset: Dataset | None = None) -> RunDirectory:
    """Continue from the newest checkpoint; logs past it are dropped first."""
    run: RunDirectory = RunDirectory.open(path)
    checkpoint: Checkpoint = load_checkpoint(run.latest_checkpoint())

    if checkpoint.config.config_hash() != run.config().config_hash():
        raise CheckpointError(f"{run.latest_checkpoint()} belongs to a different configuration")

    config: RunConfig = checkpoint.config
    dataset = dataset or dataset_from_config(config.dataset, config.generator.side, make_streams(config.train.seed)["data"])
    state: TrainingState = state_from_checkpoint(checkpoint)

    for csv_path in (run.metrics_path, run.timing_path, run.grad_path):
        truncate_rows(csv_path, state.iteration)

    write_log("INFO", Trainer, "RESUME", config.name, f"Resuming at iteration {state.iteration} of {config.train.iterations}.")
    _run(state, run, dataset)
    return run
