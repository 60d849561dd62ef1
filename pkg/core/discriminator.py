"""Convolutional Wasserstein critic.

Three stride-2 convolutions with "same" zero padding, each followed by a leaky
ReLU, then a dense layer to one unbounded score. Everything runs in float64
and the forward pass is twice differentiable, so the gradient penalty can be
differentiated with respect to the weights.
"""
import numpy as np
import torch
from torch import nn

from core.diffmath import REAL, conv2d_same, dense, input_gradient_node, leaky_relu
from core.errors import CheckpointError, ShapeError
from core.schema import CriticConfig


class CriticNetwork(nn.Module):
    def __init__(self, config: CriticConfig):
        super().__init__()
        self.config: CriticConfig = config
        channels: list[int] = [config.channels, *config.filters]
        self.convs: nn.ModuleList = nn.ModuleList(
                nn.Conv2d(c_in, c_out, config.kernel_size, stride=config.stride, padding=config.kernel_size // 2, dtype=REAL)
                for c_in, c_out in zip(channels[:-1], channels[1:])
        )
        final_side: int = config.layer_sides()[-1]
        self.head: nn.Linear = nn.Linear(config.filters[-1] * final_side * final_side, 1, dtype=REAL)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        expected: tuple[int, int, int] = (self.config.channels, self.config.side, self.config.side)

        if x.dim() != 4 or tuple(x.shape[1:]) != expected:
            raise ShapeError(f"critic expects a batch shaped (B, {', '.join(map(str, expected))}), got {tuple(x.shape)}")

        for conv in self.convs:
            x = leaky_relu(conv2d_same(x, conv.weight, conv.bias, self.config.stride), self.config.negative_slope)

        return dense(x.flatten(start_dim=1), self.head.weight, self.head.bias).squeeze(-1)

    def named_arrays(self) -> dict[str, np.ndarray]:
        return {f"critic.{name}": p.detach().numpy().copy() for name, p in self.named_parameters()}

    def load_arrays(self, arrays: dict[str, np.ndarray]) -> None:
        with torch.no_grad():
            for name, p in self.named_parameters():
                key: str = f"critic.{name}"

                if key not in arrays:
                    raise CheckpointError(f"checkpoint has no array {key!r}")

                if tuple(arrays[key].shape) != tuple(p.shape):
                    raise CheckpointError(f"array {key!r} has shape {tuple(arrays[key].shape)}, network needs {tuple(p.shape)}")

                p.copy_(torch.from_numpy(np.asarray(arrays[key], dtype=np.float64)))


def critic_init(config: CriticConfig, rng: np.random.Generator, zero: bool = False) -> CriticNetwork:
    """Weights ~ N(0, 1/fan_in) drawn layer by layer from `rng`, biases zero."""
    network: CriticNetwork = CriticNetwork(config)

    with torch.no_grad():
        for layer in [*network.convs, network.head]:
            fan_in: int = int(np.prod(layer.weight.shape[1:]))
            weights: np.ndarray = np.zeros(layer.weight.shape) if zero else rng.standard_normal(layer.weight.shape) / np.sqrt(fan_in)
            layer.weight.copy_(torch.from_numpy(weights))
            layer.bias.zero_()

    return network


def critic_forward(network: CriticNetwork, image: torch.Tensor) -> torch.Tensor:
    """Scores ``(B,)`` for a batch, a scalar for a single ``(C, H, W)`` image."""
    if image.dim() == 3:
        return network(image.unsqueeze(0))[0]

    return network(image)


def critic_input_gradient(network: CriticNetwork, image: torch.Tensor) -> torch.Tensor:
    """∇ₓD per sample, kept on the tape for the penalty."""
    single: bool = image.dim() == 3
    batch: torch.Tensor = image.unsqueeze(0) if single else image
    grad: torch.Tensor = input_gradient_node(network, batch)
    return grad[0] if single else grad


def reference_conv2d(x: np.ndarray, weight: np.ndarray, bias: np.ndarray, stride: int) -> np.ndarray:
    """Quadruple-loop cross-correlation with zero padding k // 2."""
    batch, channels, side, _ = x.shape
    filters, _, k, _ = weight.shape
    pad: int = k // 2
    padded: np.ndarray = np.pad(x, ((0, 0), (0, 0), (pad, pad), (pad, pad)))
    out_side: int = -(-side // stride)
    out: np.ndarray = np.zeros((batch, filters, out_side, out_side))

    for b in range(batch):
        for f in range(filters):
            for i in range(out_side):
                for j in range(out_side):
                    window: np.ndarray = padded[b, :, i * stride:i * stride + k, j * stride:j * stride + k]
                    out[b, f, i, j] = np.sum(window * weight[f]) + bias[f]

    return out
