from math import fsum
from typing import Sequence

import numpy as np
import torch

from core.diffmath import gradient
from core.discriminator import CriticNetwork
from core.errors import MetricError
from core.generator import GeneratorParams, as_vector, forward, sample_noise, sample_shot_deviation
from core.losses import fake_batch, generator_loss
from core.schema import GeneratorConfig
from core.statevector import probabilities


def relative_norm(grad: torch.Tensor) -> float:
    """‖g‖₂ / K."""
    return float(torch.linalg.vector_norm(grad)) / grad.numel()


def generator_gradient(config: GeneratorConfig, params: GeneratorParams | torch.Tensor, network: CriticNetwork,
                       rng: np.random.Generator, batch: int, shots: int | None = None) -> torch.Tensor:
    theta: torch.Tensor = as_vector(config, params).detach().requires_grad_(True)
    noise = sample_noise(config, theta, rng, batch)
    deviation: torch.Tensor | None = None

    if shots is not None:
        with torch.no_grad():
            deviation = sample_shot_deviation(probabilities(forward(config, theta, noise)), shots, rng)

    loss: torch.Tensor = generator_loss(fake_batch(config, theta, noise, deviation), network)
    return gradient(loss, [theta])[0]


def grad_magnitude(config: GeneratorConfig, params: GeneratorParams | torch.Tensor, network: CriticNetwork,
                   rng: np.random.Generator, batch: int, shots: int | None = None) -> float:
    return relative_norm(generator_gradient(config, params, network, rng, batch, shots))


def grad_magnitude_summary(series: Sequence[tuple[int, float]], start: int = 0, stop: int | None = None) -> float:
    """Mean relative magnitude over iterations in [start, stop)."""
    window: list[float] = [value for iteration, value in series if iteration >= start and (stop is None or iteration < stop)]

    if not window:
        raise MetricError(f"no gradient magnitudes recorded in iterations [{start}, {stop})")

    return fsum(window) / len(window)
