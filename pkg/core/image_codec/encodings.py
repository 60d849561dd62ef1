"""FRQI, MCRQI and amplitude encodings and their measurement-based decoders.

Images are float tensors shaped ``(..., C, H, W)`` with values in [0, 1];
pixels are addressed in Morton order and the address register occupies the
least significant bits of the basis index. The decoders only look at
computational-basis probabilities, so they also turn states that are not
valid encodings into images: the FRQI rule depends only on the ratio
p0_j / p1_j of each pixel, and a pixel that is never observed is gray.
"""
from math import pi
from typing import Literal

import torch

from core.components import Codec
from core.diffmath import COMPLEX, REAL
from core.errors import CodecError
from core.image_codec.morton import from_morton, to_morton
from core.statevector import QuantumState

EncodingName = Literal["frqi", "mcrqi", "amplitude"]


def _address_qubits(side: int) -> int:
    if side < 1 or side & (side - 1):
        raise CodecError(f"encoding needs a power-of-two side, got {side}")

    return 2 * (side.bit_length() - 1)


def _check_image(image: torch.Tensor, channels: int) -> torch.Tensor:
    image = torch.as_tensor(image, dtype=REAL)

    if image.dim() < 3 or image.shape[-3] != channels:
        raise CodecError(f"expected an image shaped (..., {channels}, H, W), got {tuple(image.shape)}")

    if image.shape[-1] != image.shape[-2]:
        raise CodecError(f"encoding needs a square image, got {tuple(image.shape[-2:])}")

    if torch.any(image < 0) or torch.any(image > 1) or torch.any(torch.isnan(image)):
        raise CodecError("pixel values must lie in [0, 1]")

    return image


def _check_probabilities(probabilities: torch.Tensor) -> None:
    if torch.any(probabilities < 0):
        raise CodecError("probabilities must be non-negative")


def _side_from_pixels(pixels: int) -> int:
    side: int = int(round(pixels ** 0.5))

    if side * side != pixels:
        raise CodecError(f"{pixels} pixels do not form a square image")

    return side


def angle_decode(p0: torch.Tensor, p1: torch.Tensor) -> torch.Tensor:
    """x = (2/π)·arccos(√(p0/(p0+p1))), gray where p0 + p1 = 0."""
    observed: torch.Tensor = (p0 + p1) > 0
    x: torch.Tensor = (2 / pi) * torch.atan2(p1.clamp_min(Codec.SQRT_FLOOR).sqrt(), p0.clamp_min(Codec.SQRT_FLOOR).sqrt())
    return torch.where(observed, x, torch.full_like(x, Codec.GRAY))


def pixel_probabilities(probabilities: torch.Tensor, encoding: EncodingName) -> tuple[torch.Tensor, torch.Tensor]:
    """Split a basis-probability vector into the (p0_j, p1_j) blocks.

    FRQI gives (..., N) blocks; MCRQI gives (..., 4, N) blocks indexed by the
    channel selector (R, G, B, α).
    """
    match encoding:
        case "frqi":
            half: int = probabilities.shape[-1] // 2
            return probabilities[..., :half], probabilities[..., half:]

        case "mcrqi":
            blocks: torch.Tensor = probabilities.reshape(*probabilities.shape[:-1], 2, 4, -1)
            return blocks[..., 0, :, :], blocks[..., 1, :, :]

    raise CodecError(f"pixel probabilities are not defined for {encoding!r}")


def frqi_encode(image: torch.Tensor) -> QuantumState:
    image = _check_image(image, 1)
    side: int = image.shape[-1]
    a: int = _address_qubits(side)
    x: torch.Tensor = to_morton(image[..., 0, :, :])
    scale: float = 2 ** (-a / 2)
    amplitudes: torch.Tensor = torch.cat([torch.cos(pi * x / 2), torch.sin(pi * x / 2)], dim=-1) * scale
    return QuantumState(amplitudes.to(COMPLEX), a + 1)


def frqi_decode(probabilities: torch.Tensor) -> torch.Tensor:
    _check_probabilities(probabilities)
    p0, p1 = pixel_probabilities(probabilities, "frqi")
    x: torch.Tensor = angle_decode(p0, p1)
    return from_morton(x, _side_from_pixels(x.shape[-1])).unsqueeze(-3)


def mcrqi_encode(image: torch.Tensor) -> QuantumState:
    image = _check_image(image, 3)
    side: int = image.shape[-1]
    a: int = _address_qubits(side)
    rgb: torch.Tensor = to_morton(image)
    alpha: torch.Tensor = torch.zeros_like(rgb[..., :1, :])
    x: torch.Tensor = torch.cat([rgb, alpha], dim=-2)
    scale: float = 0.5 * 2 ** (-a / 2)
    amplitudes: torch.Tensor = torch.stack([torch.cos(pi * x / 2), torch.sin(pi * x / 2)], dim=-3) * scale
    return QuantumState(amplitudes.reshape(*amplitudes.shape[:-3], -1).to(COMPLEX), a + 3)


def mcrqi_decode(probabilities: torch.Tensor) -> torch.Tensor:
    """Channel-wise FRQI rule on the R, G, B blocks; the α block is ignored."""
    _check_probabilities(probabilities)
    p0, p1 = pixel_probabilities(probabilities, "mcrqi")
    x: torch.Tensor = angle_decode(p0[..., :3, :], p1[..., :3, :])
    return from_morton(x, _side_from_pixels(x.shape[-1]))


def amplitude_encode(image: torch.Tensor) -> QuantumState:
    image = _check_image(image, 1)
    a: int = _address_qubits(image.shape[-1])
    x: torch.Tensor = to_morton(image[..., 0, :, :])
    norm: torch.Tensor = torch.linalg.vector_norm(x, dim=-1, keepdim=True)

    if torch.any(norm == 0):
        raise CodecError("amplitude encoding of an all-zero image is undefined")

    return QuantumState((x / norm).to(COMPLEX), a)


def amplitude_decode(probabilities: torch.Tensor) -> torch.Tensor:
    """√p_j rescaled by its maximum; the global scale is not recoverable."""
    _check_probabilities(probabilities)
    root: torch.Tensor = probabilities.clamp_min(Codec.SQRT_FLOOR).sqrt()
    peak: torch.Tensor = root.amax(dim=-1, keepdim=True)
    x: torch.Tensor = root / peak
    return from_morton(x, _side_from_pixels(x.shape[-1])).unsqueeze(-3)


def encode(image: torch.Tensor, encoding: EncodingName) -> QuantumState:
    match encoding:
        case "frqi":
            return frqi_encode(image)

        case "mcrqi":
            return mcrqi_encode(image)

        case "amplitude":
            return amplitude_encode(image)

    raise CodecError(f"Unknown encoding {encoding!r}")


def decode(probabilities: torch.Tensor, encoding: EncodingName) -> torch.Tensor:
    match encoding:
        case "frqi":
            return frqi_decode(probabilities)

        case "mcrqi":
            return mcrqi_decode(probabilities)

        case "amplitude":
            return amplitude_decode(probabilities)

    raise CodecError(f"Unknown encoding {encoding!r}")
