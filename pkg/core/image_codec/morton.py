from functools import lru_cache

import torch

from core.errors import CodecError


def _bits(side: int) -> int:
    if side < 1 or side & (side - 1):
        raise CodecError(f"Morton indexing needs a power-of-two side, got {side}")

    return side.bit_length() - 1


def morton_index(row: int, col: int, side: int) -> int:
    """Interleave row and column bits as y_{k-1} x_{k-1} … y_0 x_0."""
    bits: int = _bits(side)

    if not (0 <= row < side and 0 <= col < side):
        raise CodecError(f"pixel ({row}, {col}) outside a {side}x{side} image")

    j: int = 0

    for b in reversed(range(bits)):
        j = (j << 2) | (((row >> b) & 1) << 1) | ((col >> b) & 1)

    return j


def morton_inverse(j: int, side: int) -> tuple[int, int]:
    bits: int = _bits(side)

    if not 0 <= j < side * side:
        raise CodecError(f"Morton index {j} outside a {side}x{side} image")

    row = col = 0

    for b in range(bits):
        col |= ((j >> (2 * b)) & 1) << b
        row |= ((j >> (2 * b + 1)) & 1) << b

    return row, col


@lru_cache(maxsize=None)
def _order(side: int) -> tuple[int, ...]:
    return tuple(morton_inverse(j, side)[0] * side + morton_inverse(j, side)[1] for j in range(side * side))


def morton_order(side: int) -> torch.Tensor:
    """Row-major flat pixel index for each Morton index j."""
    return torch.tensor(_order(side), dtype=torch.long)


def to_morton(image: torch.Tensor) -> torch.Tensor:
    """(..., H, W) -> (..., H*W) in Morton order."""
    side: int = image.shape[-1]

    if image.shape[-2] != side:
        raise CodecError(f"Morton ordering needs a square image, got {tuple(image.shape[-2:])}")

    return image.reshape(*image.shape[:-2], side * side)[..., morton_order(side)]


def from_morton(vector: torch.Tensor, side: int) -> torch.Tensor:
    """(..., H*W) Morton vector -> (..., H, W)."""
    inverse: torch.Tensor = torch.argsort(morton_order(side))
    return vector[..., inverse].reshape(*vector.shape[:-1], side, side)
