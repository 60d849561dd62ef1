from dataclasses import dataclass

import numpy as np
import torch

from core.components import Analysis
from core.errors import MetricError


@dataclass(frozen=True)
class ModePCA:
    """PCA of one mode's samples.

    ``components`` are unit axes (rows), ``sigmas`` the standard deviations
    along them and ``coords`` the standardised sample coordinates, so that
    ``mean + Σᵢ sigmas[i]·components[i]·coords[:, i]`` gives the samples back.
    """
    mean: np.ndarray
    axis: np.ndarray
    sigma: float
    minus: np.ndarray
    plus: np.ndarray
    components: np.ndarray
    sigmas: np.ndarray
    coords: np.ndarray
    zero_variance: bool

    def reconstruct(self) -> np.ndarray:
        flat: np.ndarray = self.mean.reshape(-1) + (self.coords * self.sigmas) @ self.components
        return flat.reshape(-1, *self.mean.shape)


def _orient(axes: np.ndarray) -> np.ndarray:
    # largest-magnitude entry positive
    signs: np.ndarray = np.sign(axes[np.arange(len(axes)), np.argmax(np.abs(axes), axis=1)])
    return axes * np.where(signs == 0, 1, signs)[:, None]


def mode_pca(samples: np.ndarray | torch.Tensor, spread: float = Analysis.PCA_SPREAD, tolerance: float = 1e-12) -> ModePCA:
    """Mean image, first principal axis, σ₁ and the images at mean ∓ spread·σ₁·axis."""
    if isinstance(samples, torch.Tensor):
        samples = samples.detach().numpy()

    samples = np.asarray(samples, dtype=np.float64)

    if samples.shape[0] < 2:
        raise MetricError(f"mode_pca needs at least 2 samples, got {samples.shape[0]}")

    shape: tuple[int, ...] = samples.shape[1:]
    flat: np.ndarray = samples.reshape(samples.shape[0], -1)
    mean: np.ndarray = flat.mean(axis=0)
    centred: np.ndarray = flat - mean
    u, s, vt = np.linalg.svd(centred, full_matrices=False)
    keep: np.ndarray = s > tolerance * max(1.0, float(np.abs(flat).max()))

    if not keep.any():
        zero: np.ndarray = np.zeros(shape)
        return ModePCA(mean.reshape(shape), zero, 0.0, mean.reshape(shape), mean.reshape(shape),
                       np.zeros((0, flat.shape[1])), np.zeros(0), np.zeros((flat.shape[0], 0)), True)

    components: np.ndarray = _orient(vt[keep])
    sigmas: np.ndarray = s[keep] / np.sqrt(flat.shape[0] - 1)
    coords: np.ndarray = (centred @ components.T) / sigmas
    axis: np.ndarray = components[0]
    minus: np.ndarray = np.clip(mean - spread * sigmas[0] * axis, 0, 1)
    plus: np.ndarray = np.clip(mean + spread * sigmas[0] * axis, 0, 1)
    return ModePCA(mean.reshape(shape), axis.reshape(shape), float(sigmas[0]), minus.reshape(shape), plus.reshape(shape),
                   components, sigmas, coords, False)
