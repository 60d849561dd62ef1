from math import ceil

import torch
import torch.nn.functional as F

from core.diffmath import REAL
from core.errors import CodecError


def bilinear_resize(image: torch.Tensor, new_side: int) -> torch.Tensor:
    """Corner-aligned bilinear resize of ``(..., C, H, W)`` to ``(..., C, new_side, new_side)``."""
    if new_side < 1:
        raise CodecError(f"bilinear_resize: target side must be positive, got {new_side}")

    image = torch.as_tensor(image, dtype=REAL)

    if image.dim() < 3:
        raise CodecError(f"bilinear_resize expects (..., C, H, W), got {tuple(image.shape)}")

    if image.shape[-2:] == (new_side, new_side):
        return image.clone()

    lead: torch.Size = image.shape[:-3]
    flat: torch.Tensor = image.reshape(-1, *image.shape[-3:])
    resized: torch.Tensor = F.interpolate(flat, size=(new_side, new_side), mode="bilinear", align_corners=True)
    return resized.clamp(0, 1).reshape(*lead, image.shape[-3], new_side, new_side)


def invert(image: torch.Tensor) -> torch.Tensor:
    return 1 - image


def tile_grid(images: torch.Tensor, columns: int = 8, padding: int = 1) -> torch.Tensor:
    """Lay a batch ``(B, C, H, W)`` out as one ``(C, H', W')`` sheet, row by row."""
    if images.dim() != 4 or images.shape[0] == 0:
        raise CodecError(f"tile_grid expects a non-empty (B, C, H, W) batch, got {tuple(images.shape)}")

    count, channels, height, width = images.shape
    columns = max(1, min(columns, count))
    rows: int = ceil(count / columns)
    sheet: torch.Tensor = torch.zeros(channels, rows * (height + padding) - padding, columns * (width + padding) - padding, dtype=images.dtype)

    for i in range(count):
        top, left = (i // columns) * (height + padding), (i % columns) * (width + padding)
        sheet[:, top:top + height, left:left + width] = images[i]

    return sheet
