import gzip
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np
import torch

from backend.storage.schema import DatasetConfig, SyntheticKind
from core.components import Storage
from core.diffmath import REAL
from core.errors import BadMagicError, CountMismatchError, DatasetError, TruncatedFileError
from core.image_codec import bilinear_resize
from core.utils import write_log

_GZIP_MAGIC: bytes = b"\x1f\x8b"


@dataclass(frozen=True)
class Dataset:
    images: torch.Tensor
    labels: np.ndarray | None
    provenance: str

    def __post_init__(self) -> None:
        if self.images.dim() != 4 or self.images.shape[0] == 0:
            raise DatasetError(f"a dataset needs a non-empty (N, C, H, W) image stack, got {tuple(self.images.shape)}")

        if self.labels is not None and len(self.labels) != self.images.shape[0]:
            raise CountMismatchError(f"{len(self.labels)} labels for {self.images.shape[0]} images")

    def __len__(self) -> int:
        return int(self.images.shape[0])

    @property
    def side(self) -> int:
        return int(self.images.shape[-1])

    @property
    def channels(self) -> int:
        return int(self.images.shape[1])

    def batch(self, rng: np.random.Generator, size: int) -> torch.Tensor:
        """Uniform draw with replacement."""
        return self.images[torch.from_numpy(rng.integers(0, len(self), size=size))]

    def __repr__(self) -> str:
        return f"Dataset({len(self)} x {self.channels}x{self.side}x{self.side}, {self.provenance})"


def _read(path: Path) -> bytes:
    raw: bytes = Path(path).read_bytes()
    return gzip.decompress(raw) if raw[:2] == _GZIP_MAGIC else raw


def _header(raw: bytes, path: Path, magic: int, words: int) -> np.ndarray:
    if len(raw) < 4 * words:
        raise TruncatedFileError(f"{path}: header needs {4 * words} bytes, got {len(raw)}")

    header: np.ndarray = np.frombuffer(raw[:4 * words], dtype=">u4").astype(np.int64)

    if header[0] != magic:
        raise BadMagicError(f"{path}: magic {int(header[0])}, expected {magic}")

    return header


def _payload(raw: bytes, path: Path, offset: int, expected: int) -> np.ndarray:
    if len(raw) - offset < expected:
        raise TruncatedFileError(f"{path}: payload needs {expected} bytes, got {len(raw) - offset}")

    return np.frombuffer(raw[offset:offset + expected], dtype=np.uint8)


def load_idx(images: Path, labels: Path | None = None, classes: Sequence[int] | None = None, resize: int | None = None) -> Dataset:
    """Big-endian IDX image (and label) files, gzip or plain, pixels scaled by 1/255."""
    raw: bytes = _read(images)
    _, count, rows, cols = _header(raw, images, Storage.IDX_IMAGES_MAGIC, 4)
    pixels: np.ndarray = _payload(raw, images, 16, int(count * rows * cols)).reshape(count, 1, rows, cols)
    stack: torch.Tensor = torch.from_numpy(pixels.astype(np.float64) / 255).to(REAL)
    label_array: np.ndarray | None = None

    if labels is not None:
        raw_labels: bytes = _read(labels)
        _, label_count = _header(raw_labels, labels, Storage.IDX_LABELS_MAGIC, 2)

        if label_count != count:
            raise CountMismatchError(f"{labels}: {int(label_count)} labels for {int(count)} images in {images}")

        label_array = _payload(raw_labels, labels, 8, int(label_count)).astype(np.int64)

    if classes is not None:
        if label_array is None:
            raise DatasetError("a class filter needs a labels file")

        keep: np.ndarray = np.isin(label_array, list(classes))
        stack, label_array = stack[torch.from_numpy(keep)], label_array[keep]

        if len(label_array) == 0:
            raise DatasetError(f"no images of classes {list(classes)} in {images}")

    if resize is not None and resize != int(cols):
        stack = bilinear_resize(stack, resize)

    provenance: str = f"idx:{Path(images).name}" + (f" classes={list(classes)}" if classes is not None else "") + (f" resize={resize}" if resize else "")
    write_log("INFO", Storage, "LOAD IDX", "", f"Loaded {stack.shape[0]} images from {images} ({provenance}).")
    return Dataset(stack, label_array, provenance)


def _quadrant_mask(side: int, quadrant: int) -> np.ndarray:
    half: int = side // 2
    mask: np.ndarray = np.zeros((side, side))
    top, left = (quadrant // 2) * half, (quadrant % 2) * half
    mask[top:top + half, left:left + half] = 1
    return mask


def make_synthetic(kind: SyntheticKind, side: int, count: int, rng: np.random.Generator) -> Dataset:
    """Small labelled toy datasets.

    - ``quadrant``: one quadrant white, the rest black; label = quadrant in Morton order
    - ``bimodal``: a bright centre square or its bright complement, with slight intensity
      jitter, so the centre pixel sits near 0 or near 1; label = pattern
    - ``bars``: one full-length white row (label 0) or column (label 1)
    - ``color_quadrant``: one quadrant in a pure red, green or blue; label = 3·quadrant + color
    """
    if side < 2 or side & (side - 1):
        raise DatasetError(f"synthetic images need a power-of-two side >= 2, got {side}")

    if count < 1:
        raise DatasetError(f"cannot build an empty dataset (count={count})")

    labels: np.ndarray
    images: np.ndarray

    match kind:
        case "quadrant":
            labels = rng.integers(0, 4, size=count)
            images = np.stack([_quadrant_mask(side, q) for q in labels])[:, None]

        case "bimodal":
            labels = rng.integers(0, 2, size=count)
            centre: np.ndarray = np.zeros((side, side))
            lo, hi = side // 4, side - side // 4
            centre[lo:hi, lo:hi] = 1
            jitter: np.ndarray = np.abs(rng.normal(0, 0.05, size=(count, side, side))).clip(0, 0.3)
            patterns: np.ndarray = np.where(labels[:, None, None] == 0, centre, 1 - centre)
            images = np.abs(patterns - jitter)[:, None]

        case "bars":
            labels = rng.integers(0, 2, size=count)
            positions: np.ndarray = rng.integers(0, side, size=count)
            images = np.zeros((count, 1, side, side))

            for i, (orientation, position) in enumerate(zip(labels, positions)):
                if orientation == 0:
                    images[i, 0, position, :] = 1

                else:
                    images[i, 0, :, position] = 1

        case "color_quadrant":
            quadrants: np.ndarray = rng.integers(0, 4, size=count)
            colors: np.ndarray = rng.integers(0, 3, size=count)
            images = np.zeros((count, 3, side, side))

            for i, (q, c) in enumerate(zip(quadrants, colors)):
                images[i, c] = _quadrant_mask(side, q)

            labels = 3 * quadrants + colors

        case _:
            raise DatasetError(f"Unknown synthetic dataset kind {kind!r}")

    write_log("INFO", Storage, "SYNTHETIC", "", f"Built {count} {kind!r} images of side {side}.")
    return Dataset(torch.from_numpy(images.astype(np.float64)), labels.astype(np.int64), f"synthetic:{kind}")


def dataset_from_config(config: DatasetConfig, side: int, rng: np.random.Generator) -> Dataset:
    if config.source == "synthetic":
        return make_synthetic(config.kind, side, config.count, rng)

    dataset: Dataset = load_idx(config.images, config.labels, config.classes, config.resize or side)

    if dataset.side != side:
        raise DatasetError(f"{config!r} yields side {dataset.side}, the generator needs {side}")

    return dataset
