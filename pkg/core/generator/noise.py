from dataclasses import dataclass

import numpy as np
import torch

from core.components import Generator
from core.diffmath import REAL
from core.errors import ParameterLayoutError
from core.generator.layout import GeneratorParams, as_vector, layout_for
from core.schema import GeneratorConfig


@dataclass(frozen=True)
class NoiseDraw:
    """A batch of tuned latent draws.

    ``modes`` are 0-based mode indices ``(B,)``, ``epsilon`` the shared
    standard-normal vectors ``(B, A_noise)`` and ``z`` the per-layer angles
    ``(B, L, A_noise)``, differentiable in the noise-tuning parameters.
    """
    modes: np.ndarray
    epsilon: torch.Tensor
    z: torch.Tensor

    @property
    def batch(self) -> int:
        return int(self.epsilon.shape[0])


def fixed_centres(config: GeneratorConfig) -> torch.Tensor:
    """Mode centres of the untuned mixture, ``(M,)``; a single mode sits at 0."""
    if config.modes == 1:
        return torch.zeros(1, dtype=REAL)

    return torch.linspace(-Generator.UNTUNED_SPREAD, Generator.UNTUNED_SPREAD, config.modes, dtype=REAL)


def tune_noise(config: GeneratorConfig, params: GeneratorParams | torch.Tensor, modes: np.ndarray, epsilon: torch.Tensor) -> NoiseDraw:
    """z_{m,l} = μ_{m,l} + σ_{m,l} ⊙ ε, with the same ε for every layer.

    ``noise_mode="untuned"`` fixes μ_m to the evenly spaced `fixed_centres`
    on every layer and qubit with σ = 1; ``"unimodal"`` uses z = ε.
    """
    vector: torch.Tensor = as_vector(config, params)
    layout = layout_for(config)
    modes = np.asarray(modes, dtype=np.int64).reshape(-1)
    epsilon = torch.as_tensor(epsilon, dtype=REAL).reshape(len(modes), config.noise_qubits)

    if np.any(modes < 0) or np.any(modes >= config.modes):
        raise ParameterLayoutError(f"mode indices must lie in [0, {config.modes}), got {sorted(set(modes.tolist()))}")

    index: torch.Tensor = torch.from_numpy(modes)
    shared: torch.Tensor = epsilon[:, None, :].expand(-1, config.layers, -1)

    match config.noise_mode:
        case "tuned":
            mu: torch.Tensor = layout.view(vector, "noise_mu")[index]
            sigma: torch.Tensor = layout.view(vector, "noise_sigma")[index]
            z: torch.Tensor = mu + sigma * shared

        case "untuned":
            z = fixed_centres(config)[index][:, None, None] + shared

        case _:
            z = shared.clone()

    return NoiseDraw(modes, epsilon, z)


def sample_noise(config: GeneratorConfig, params: GeneratorParams | torch.Tensor, rng: np.random.Generator,
                 batch: int = 1, mode: int | None = None) -> NoiseDraw:
    """Draw modes uniformly (unless `mode` fixes one), then ε ~ N(0, I)."""
    if mode is None:
        modes: np.ndarray = rng.integers(0, config.modes, size=batch)

    else:
        modes = np.full(batch, mode, dtype=np.int64)

    epsilon: np.ndarray = rng.standard_normal((batch, config.noise_qubits))
    return tune_noise(config, params, modes, torch.from_numpy(epsilon))


def zero_noise(config: GeneratorConfig, batch: int = 1) -> NoiseDraw:
    """Untuned zero angles; useful to look at the bare circuit."""
    shape: tuple[int, int, int] = (batch, config.layers, config.noise_qubits)
    return NoiseDraw(np.zeros(batch, dtype=np.int64), torch.zeros(batch, config.noise_qubits, dtype=REAL), torch.zeros(shape, dtype=REAL))
