"""Differentiable tensor primitives on top of torch autograd.

Every value is a ``torch.Tensor`` in 64-bit precision (``REAL`` or
``COMPLEX``); the autograd tape is the computation record. Complex tensors
take part through their real/imaginary parts, trained losses are real scalars.
"""
from typing import Callable, Iterable, Sequence

import torch
import torch.nn.functional as F

from core.errors import NotDifferentiableError, ShapeError

REAL: torch.dtype = torch.float64
COMPLEX: torch.dtype = torch.complex128


def tensor(data, requires_grad: bool = False, dtype: torch.dtype = REAL) -> torch.Tensor:
    return torch.tensor(data, dtype=dtype, requires_grad=requires_grad)


def evaluate(fn: Callable[..., torch.Tensor], *inputs: torch.Tensor) -> torch.Tensor:
    """Run `fn` on `inputs` with the tape recording."""
    with torch.enable_grad():
        try:
            return fn(*inputs)

        except RuntimeError as e:
            shapes: str = ", ".join(str(tuple(x.shape)) for x in inputs if isinstance(x, torch.Tensor))
            raise ShapeError(f"{getattr(fn, '__name__', type(fn).__name__)} failed on input shapes [{shapes}]: {e}") from e


def gradient(output: torch.Tensor, wrt: Sequence[torch.Tensor], create_graph: bool = False) -> list[torch.Tensor]:
    """Exact reverse-mode gradient of a real scalar; unreachable inputs get zeros."""
    if output.numel() != 1:
        raise ShapeError(f"gradient needs a scalar output, got shape {tuple(output.shape)}")

    if output.is_complex():
        raise ShapeError("gradient needs a real scalar output, got a complex value")

    wrt = list(wrt)

    if not output.requires_grad:
        return [torch.zeros_like(w) for w in wrt]

    grads = torch.autograd.grad(output.reshape(()), wrt, create_graph=create_graph, allow_unused=True)
    return [torch.zeros_like(w) if g is None else g for w, g in zip(wrt, grads)]


def input_gradient_node(network: Callable[[torch.Tensor], torch.Tensor], x: torch.Tensor) -> torch.Tensor:
    """∇ₓ of a scalar-per-sample network, kept on the tape.

    The result is itself differentiable with respect to the network weights,
    which is what the gradient penalty needs. For a batch the network output
    has one entry per sample, and the sum's gradient gives the per-sample
    input gradients.
    """
    x = x.detach().requires_grad_(True)

    with torch.enable_grad():
        out: torch.Tensor = network(x)

        if out.shape[:1] != x.shape[:1] and out.numel() != 1:
            raise ShapeError(f"input_gradient_node needs a scalar output per sample, got shape {tuple(out.shape)} for input {tuple(x.shape)}")

        if not out.requires_grad:
            return torch.zeros_like(x)

        (grad,) = torch.autograd.grad(out.sum(), x, create_graph=True, allow_unused=True)

    if grad is None:
        return torch.zeros_like(x)

    if not torch.isfinite(grad).all():
        raise NotDifferentiableError("network gradient is not finite at the evaluation point")

    return grad


def conv2d_same(x: torch.Tensor, weight: torch.Tensor, bias: torch.Tensor | None = None, stride: int = 1) -> torch.Tensor:
    """2-D cross-correlation with zero padding k // 2, output side ceil(side / stride)."""
    if x.dim() != 4 or weight.dim() != 4:
        raise ShapeError(f"conv2d_same expects (B, C, H, W) input and (F, C, k, k) kernel, got {tuple(x.shape)} and {tuple(weight.shape)}")

    if x.shape[1] != weight.shape[1] or weight.shape[2] != weight.shape[3] or weight.shape[2] % 2 == 0:
        raise ShapeError(f"conv2d_same: kernel {tuple(weight.shape)} does not match input {tuple(x.shape)} (odd square kernel required)")

    if bias is not None and bias.shape != weight.shape[:1]:
        raise ShapeError(f"conv2d_same: bias shape {tuple(bias.shape)} does not match {weight.shape[0]} filters")

    return F.conv2d(x, weight, bias, stride=stride, padding=weight.shape[2] // 2)


def leaky_relu(x: torch.Tensor, negative_slope: float) -> torch.Tensor:
    # torch takes the negative branch at exactly 0
    return F.leaky_relu(x, negative_slope)


def dense(x: torch.Tensor, weight: torch.Tensor, bias: torch.Tensor | None = None) -> torch.Tensor:
    if x.shape[-1] != weight.shape[-1]:
        raise ShapeError(f"dense: input features {x.shape[-1]} do not match weight {tuple(weight.shape)}")

    return F.linear(x, weight, bias)


def central_difference(fn: Callable[[], torch.Tensor], params: Iterable[torch.Tensor], step: float = 1e-5) -> list[torch.Tensor]:
    """Central finite differences of a scalar `fn()` over every entry of `params`."""
    grads: list[torch.Tensor] = []

    with torch.no_grad():
        for p in params:
            g: torch.Tensor = torch.zeros_like(p)
            flat, gflat = p.view(-1), g.view(-1)

            for i in range(flat.numel()):
                original = flat[i].item()
                flat[i] = original + step
                up: float = float(fn())
                flat[i] = original - step
                down: float = float(fn())
                flat[i] = original
                gflat[i] = (up - down) / (2 * step)

            grads.append(g)

    return grads


def relative_error(a: torch.Tensor, b: torch.Tensor) -> float:
    return float(torch.linalg.norm(a - b) / max(float(torch.linalg.norm(b)), 1e-300))
