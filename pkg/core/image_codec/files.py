"""Image files: binary PGM (P5) / PPM (P6) through Pillow, and ``.imgf64`` raw dumps.

``.imgf64`` layout: height, width, channels as little-endian uint32, followed by
the pixels as little-endian float64 in (height, width, channel) row-major order.
"""
from io import BytesIO
from pathlib import Path

import numpy as np
import torch
from PIL import Image

from core.components import Codec
from core.diffmath import REAL
from core.errors import CodecError
from core.utils import atomic_write, write_log

_HEADER: int = 12


def _to_hwc(image: torch.Tensor) -> np.ndarray:
    array: np.ndarray = torch.as_tensor(image, dtype=REAL).detach().numpy()

    if array.ndim != 3 or array.shape[0] not in (1, 3):
        raise CodecError(f"expected an image shaped (C, H, W) with C in (1, 3), got {array.shape}")

    return np.ascontiguousarray(np.transpose(array, (1, 2, 0)))


def _from_hwc(array: np.ndarray) -> torch.Tensor:
    return torch.from_numpy(np.ascontiguousarray(np.transpose(array, (2, 0, 1)))).to(REAL)


def quantize(image: torch.Tensor) -> np.ndarray:
    """[0, 1] -> 8-bit with round-half-up."""
    array: np.ndarray = torch.as_tensor(image, dtype=REAL).detach().numpy()

    if np.any(array < 0) or np.any(array > 1) or np.any(np.isnan(array)):
        raise CodecError("pixel values must lie in [0, 1]")

    return np.floor(array * 255 + 0.5).astype(np.uint8)


def write_image(path: Path, image: torch.Tensor) -> None:
    hwc: np.ndarray = quantize(torch.from_numpy(_to_hwc(image)))
    picture: Image.Image = Image.fromarray(hwc[..., 0] if hwc.shape[-1] == 1 else hwc)
    buffer: BytesIO = BytesIO()
    picture.save(buffer, format="PPM")
    atomic_write(path, buffer.getvalue())
    write_log("INFO", Codec, "WRITE_IMAGE", "", f"Wrote {hwc.shape[1]}x{hwc.shape[0]} {picture.mode} image to {path}.")


def read_image(path: Path) -> torch.Tensor:
    try:
        with Image.open(path) as picture:
            if picture.mode not in ("L", "RGB"):
                picture = picture.convert("RGB" if "A" in picture.mode or picture.mode == "P" else "L")

            array: np.ndarray = np.asarray(picture, dtype=np.float64) / 255

    except OSError as e:
        raise CodecError(f"{path}: not a readable PGM/PPM image ({e})") from e

    if array.ndim == 2:
        array = array[..., None]

    return _from_hwc(array)


def write_raw(path: Path, image: torch.Tensor) -> None:
    hwc: np.ndarray = _to_hwc(image)
    header: bytes = np.array(hwc.shape, dtype="<u4").tobytes()
    atomic_write(path, header + hwc.astype("<f8").tobytes())
    write_log("INFO", Codec, "WRITE_RAW", "", f"Wrote raw image {hwc.shape} to {path}.")


def read_raw(path: Path) -> torch.Tensor:
    raw: bytes = Path(path).read_bytes()

    if len(raw) < _HEADER:
        raise CodecError(f"{path}: missing {Codec.RAW_SUFFIX} header")

    height, width, channels = (int(v) for v in np.frombuffer(raw[:_HEADER], dtype="<u4"))
    expected: int = _HEADER + 8 * height * width * channels

    if len(raw) != expected:
        raise CodecError(f"{path}: expected {expected} bytes for a {height}x{width}x{channels} image, got {len(raw)}")

    array: np.ndarray = np.frombuffer(raw[_HEADER:], dtype="<f8").reshape(height, width, channels)
    return _from_hwc(array.astype(np.float64))


def load_any(path: Path) -> torch.Tensor:
    if Path(path).suffix == Codec.RAW_SUFFIX:
        return read_raw(path)

    return read_image(path)


def save_any(path: Path, image: torch.Tensor) -> None:
    if Path(path).suffix == Codec.RAW_SUFFIX:
        write_raw(path, image)

    else:
        write_image(path, image)
