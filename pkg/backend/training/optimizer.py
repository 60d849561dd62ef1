"""Adam through `torch.optim.Adam`, with moments that can be read out and injected.

Checkpoints carry the first/second moments and the step counter, so a
resumed optimiser continues the exact update sequence.
"""
from dataclasses import dataclass
from typing import Sequence

import numpy as np
import torch

from core.errors import CheckpointError
from core.schema import TrainConfig


@dataclass(frozen=True)
class AdamMoments:
    exp_avg: torch.Tensor
    exp_avg_sq: torch.Tensor
    step: int

    @classmethod
    def zeros_like(cls, params: torch.Tensor) -> "AdamMoments":
        return cls(torch.zeros_like(params), torch.zeros_like(params), 0)


def make_adam(params: Sequence[torch.Tensor], lr: float, config: TrainConfig) -> torch.optim.Adam:
    return torch.optim.Adam(list(params), lr=lr, betas=(config.beta1, config.beta2), eps=config.adam_eps, foreach=False)


def read_moments(optimizer: torch.optim.Adam, params: Sequence[torch.Tensor]) -> list[AdamMoments]:
    moments: list[AdamMoments] = []

    for p in params:
        state: dict = optimizer.state.get(p, {})

        if not state:
            moments.append(AdamMoments.zeros_like(p.detach()))

        else:
            moments.append(AdamMoments(state["exp_avg"].detach().clone(), state["exp_avg_sq"].detach().clone(), int(state["step"])))

    return moments


def write_moments(optimizer: torch.optim.Adam, params: Sequence[torch.Tensor], moments: Sequence[AdamMoments]) -> None:
    if len(params) != len(moments):
        raise CheckpointError(f"{len(moments)} Adam moment sets for {len(params)} parameter tensors")

    for p, m in zip(params, moments):
        if m.exp_avg.shape != p.shape or m.exp_avg_sq.shape != p.shape:
            raise CheckpointError(f"Adam moments shaped {tuple(m.exp_avg.shape)} do not fit parameter {tuple(p.shape)}")

        if m.step == 0:
            optimizer.state.pop(p, None)
            continue

        optimizer.state[p] = {
            "step": torch.tensor(float(m.step)),
            "exp_avg": m.exp_avg.detach().clone().to(p.dtype),
            "exp_avg_sq": m.exp_avg_sq.detach().clone().to(p.dtype),
        }


def moments_to_arrays(prefix: str, names: Sequence[str], moments: Sequence[AdamMoments]) -> tuple[dict[str, np.ndarray], int]:
    arrays: dict[str, np.ndarray] = {}

    for name, m in zip(names, moments):
        arrays[f"{prefix}.exp_avg.{name}"] = m.exp_avg.numpy().copy()
        arrays[f"{prefix}.exp_avg_sq.{name}"] = m.exp_avg_sq.numpy().copy()

    return arrays, (moments[0].step if moments else 0)


def moments_from_arrays(prefix: str, names: Sequence[str], arrays: dict[str, np.ndarray], step: int) -> list[AdamMoments]:
    try:
        return [
            AdamMoments(torch.from_numpy(arrays[f"{prefix}.exp_avg.{name}"].copy()), torch.from_numpy(arrays[f"{prefix}.exp_avg_sq.{name}"].copy()), step)
            for name in names
        ]

    except KeyError as e:
        raise CheckpointError(f"checkpoint has no Adam moments {e.args[0]!r}") from None


def adam_step(params: torch.Tensor, grads: torch.Tensor, moments: AdamMoments, lr: float,
              beta1: float, beta2: float, eps: float) -> tuple[torch.Tensor, AdamMoments]:
    """One bias-corrected Adam update, returning new parameters and moments."""
    p: torch.Tensor = params.detach().clone().requires_grad_(True)
    p.grad = grads.detach().clone().to(p.dtype)
    optimizer: torch.optim.Adam = torch.optim.Adam([p], lr=lr, betas=(beta1, beta2), eps=eps, foreach=False)
    write_moments(optimizer, [p], [moments])
    optimizer.step()
    return p.detach(), read_moments(optimizer, [p])[0]
