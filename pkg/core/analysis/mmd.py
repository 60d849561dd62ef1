"""Maximum mean discrepancy between image sample sets.

Biased V-statistic, self terms included:

    MMD² = 1/k² Σᵢⱼ κ(xᵢ, xⱼ) + 1/k² Σᵢⱼ κ(yᵢ, yⱼ) - 2/k² Σᵢⱼ κ(xᵢ, yⱼ)

Gram sums are exactly rounded, so the value does not depend on sample order
and X = Y gives exactly 0.
"""
from dataclasses import dataclass
from math import fsum
from typing import Callable, Literal

import numpy as np
import torch
from scipy.spatial.distance import cdist

from core.components import Analysis
from core.errors import MetricError

KernelName = Literal["linear", "poly", "rbf"]
KERNELS: tuple[KernelName, ...] = ("linear", "poly", "rbf")


def _flatten(samples: np.ndarray | torch.Tensor) -> np.ndarray:
    if isinstance(samples, torch.Tensor):
        samples = samples.detach().numpy()

    samples = np.asarray(samples, dtype=np.float64)
    return samples.reshape(samples.shape[0], -1)


def _dot(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    return np.einsum("id,jd->ij", x, y, optimize=False)


def linear_kernel(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    return _dot(x, y)


def poly_kernel(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    return (_dot(x, y) + 1) ** Analysis.POLY_DEGREE


def rbf_kernel(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    return np.exp(-cdist(x, y, "sqeuclidean") / (2 * Analysis.RBF_BANDWIDTH ** 2))


def kernel_fn(kernel: KernelName) -> Callable[[np.ndarray, np.ndarray], np.ndarray]:
    match kernel:
        case "linear":
            return linear_kernel

        case "poly":
            return poly_kernel

        case "rbf":
            return rbf_kernel

    raise MetricError(f"Unknown kernel {kernel!r}; expected one of {KERNELS}")


def mmd(x: np.ndarray | torch.Tensor, y: np.ndarray | torch.Tensor, kernel: KernelName) -> float:
    x, y = _flatten(x), _flatten(y)

    if x.shape[0] != y.shape[0] or x.shape[0] == 0:
        raise MetricError(f"mmd needs two non-empty sets of equal size, got {x.shape[0]} and {y.shape[0]}")

    if x.shape[1] != y.shape[1]:
        raise MetricError(f"mmd: sample dimensions differ ({x.shape[1]} vs {y.shape[1]})")

    fn = kernel_fn(kernel)
    k: int = x.shape[0]
    total: float = fsum(fn(x, x).ravel()) + fsum(fn(y, y).ravel()) - 2 * fsum(fn(x, y).ravel())
    return total / (k * k)


@dataclass(frozen=True)
class MMDReport:
    linear: float
    poly: float
    rbf: float
    samples: int

    def as_dict(self) -> dict[str, float]:
        return {f"mmd_{kernel}": getattr(self, kernel) for kernel in KERNELS}


def mmd_report(x: np.ndarray | torch.Tensor, y: np.ndarray | torch.Tensor) -> MMDReport:
    values: dict[str, float] = {kernel: mmd(x, y, kernel) for kernel in KERNELS}
    return MMDReport(**values, samples=len(x))
