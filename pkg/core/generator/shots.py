"""Finite-shot measurement.

The sampled distribution replaces the exact one numerically while gradients
flow only through the exact probabilities: the deviation P̂ − P is drawn
without a tape and added back as a constant.
"""
import numpy as np
import torch

from core.diffmath import REAL
from core.errors import ShotError


def _check(p: torch.Tensor, shots: int) -> None:
    if shots < 1:
        raise ShotError(f"shot count must be at least 1, got {shots}")

    if torch.any(p < 0):
        raise ShotError("probabilities must be non-negative")

    totals: torch.Tensor = p.detach().sum(dim=-1)

    if torch.any((totals - 1).abs() > 1e-6):
        raise ShotError(f"probabilities must sum to 1, got totals in [{float(totals.min())}, {float(totals.max())}]")


def sample_shot_deviation(p: torch.Tensor, shots: int, rng: np.random.Generator) -> torch.Tensor:
    """Multinomial frequencies minus `p`, one row per batch element; carries no gradient."""
    _check(p, shots)
    exact: np.ndarray = np.clip(p.detach().numpy().astype(np.float64), 0, None)
    exact = exact / exact.sum(axis=-1, keepdims=True)
    counts: np.ndarray = rng.multinomial(shots, exact)
    return torch.from_numpy(counts / shots - exact).to(REAL)


def apply_shot_deviation(p: torch.Tensor, deviation: torch.Tensor) -> torch.Tensor:
    perturbed: torch.Tensor = (p + deviation.detach()).clamp_min(0)
    return perturbed / perturbed.sum(dim=-1, keepdim=True)


def shot_noise_perturb(p: torch.Tensor, shots: int, rng: np.random.Generator) -> torch.Tensor:
    return apply_shot_deviation(p, sample_shot_deviation(p, shots, rng))


def total_variation(p: torch.Tensor, q: torch.Tensor) -> torch.Tensor:
    return 0.5 * (p - q).abs().sum(dim=-1)
