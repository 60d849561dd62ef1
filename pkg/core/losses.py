"""WGAN-GP objectives.

Critic:    -(E[D(x)] - E[D(G(z))]) + λ·E[(‖∇D(x̂)‖₂ - 1)²]
Generator: -E[D(G(z))]

x̂ = u·x + (1 - u)·G(z) with one u ~ U[0, 1) per sample pair.
"""
import numpy as np
import torch

from core.diffmath import REAL
from core.discriminator import CriticNetwork, critic_forward, critic_input_gradient
from core.errors import ShapeError
from core.generator import GeneratorParams, NoiseDraw, apply_shot_deviation, as_vector, forward
from core.image_codec import decode
from core.schema import GeneratorConfig
from core.statevector import probabilities


def fake_batch(config: GeneratorConfig, params: GeneratorParams | torch.Tensor, noise: NoiseDraw,
               shot_deviation: torch.Tensor | None = None) -> torch.Tensor:
    """Decoded generator images ``(B, C, H, W)``; the shot deviation is added as a constant."""
    p: torch.Tensor = probabilities(forward(config, as_vector(config, params), noise))

    if shot_deviation is not None:
        p = apply_shot_deviation(p, shot_deviation)

    return decode(p, config.encoding)


def interpolate(real: torch.Tensor, fake: torch.Tensor, u: torch.Tensor) -> torch.Tensor:
    u = u.reshape(-1, *([1] * (real.dim() - 1)))
    return u * real + (1 - u) * fake


def gradient_penalty(network: CriticNetwork, real: torch.Tensor, fake: torch.Tensor, u: torch.Tensor) -> torch.Tensor:
    grad: torch.Tensor = critic_input_gradient(network, interpolate(real, fake, u))
    norms: torch.Tensor = torch.linalg.vector_norm(grad.flatten(start_dim=1), dim=-1)
    return ((norms - 1) ** 2).mean()


def critic_loss(real: torch.Tensor, fake: torch.Tensor, network: CriticNetwork, penalty: float,
                rng: np.random.Generator | None = None, u: torch.Tensor | None = None) -> torch.Tensor:
    if real.shape != fake.shape:
        raise ShapeError(f"critic_loss: real batch {tuple(real.shape)} and fake batch {tuple(fake.shape)} differ")

    if real.shape[0] == 0:
        raise ShapeError("critic_loss: empty batch")

    if u is None:
        if rng is None:
            raise ValueError("critic_loss needs either an rng or explicit interpolation coefficients")

        u = torch.from_numpy(rng.random(real.shape[0])).to(REAL)

    fake = fake.detach()
    distance: torch.Tensor = critic_forward(network, real).mean() - critic_forward(network, fake).mean()
    return -distance + penalty * gradient_penalty(network, real, fake, u)


def generator_loss(fake: torch.Tensor, network: CriticNetwork) -> torch.Tensor:
    return -critic_forward(network, fake).mean()
