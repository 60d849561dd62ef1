"""Checkpoint and CSV persistence.

A checkpoint is a JSON manifest plus one sidecar ``.bin`` of little-endian
float64 arrays. The manifest lists every array with its shape and offset (in
values) inside the sidecar; keys are sorted and arrays are laid out in name
order, so save -> load -> save reproduces both files byte for byte. The
sidecar is written before the manifest, which only appears once complete.
"""
import csv
import json
from dataclasses import dataclass, field
from io import StringIO
from pathlib import Path
from typing import Any, Iterable, Sequence

import numpy as np

from backend.storage.schema import RunConfig
from core.components import Storage
from core.errors import CheckpointError
from core.utils import atomic_write, lock_for, write_log


@dataclass
class Checkpoint:
    config: RunConfig
    iteration: int
    arrays: dict[str, np.ndarray]
    counters: dict[str, int] = field(default_factory=dict)
    rng: dict[str, Any] = field(default_factory=dict)
    status: str = "ok"
    version: int = Storage.FORMAT_VERSION


def _sidecar(path: Path) -> Path:
    return Path(path).with_suffix(".bin")


def save_checkpoint(path: Path, checkpoint: Checkpoint) -> None:
    path = Path(path)
    index: list[dict[str, Any]] = []
    chunks: list[bytes] = []
    offset: int = 0

    for name in sorted(checkpoint.arrays):
        array: np.ndarray = np.asarray(checkpoint.arrays[name], dtype="<f8")
        index.append({"name": name, "offset": offset, "shape": list(array.shape)})
        chunks.append(np.ascontiguousarray(array).tobytes())
        offset += array.size

    manifest: dict[str, Any] = {
        "arrays": index,
        "config": checkpoint.config.model_dump(mode="json"),
        "config_hash": checkpoint.config.config_hash(),
        "counters": {key: int(value) for key, value in checkpoint.counters.items()},
        "data": _sidecar(path).name,
        "iteration": int(checkpoint.iteration),
        "rng": checkpoint.rng,
        "status": checkpoint.status,
        "values": offset,
        "version": checkpoint.version,
    }
    atomic_write(_sidecar(path), b"".join(chunks))
    atomic_write(path, (json.dumps(manifest, sort_keys=True, indent=2) + "\n").encode())
    write_log("INFO", Storage, "SAVE CHECKPOINT", checkpoint.config.name, f"Iteration {checkpoint.iteration} saved to {path} ({offset} values).")


def load_checkpoint(path: Path) -> Checkpoint:
    path = Path(path)

    try:
        manifest: dict[str, Any] = json.loads(path.read_text(encoding="utf-8"))

    except (OSError, json.JSONDecodeError) as e:
        raise CheckpointError(f"{path}: unreadable checkpoint manifest ({e})") from e

    if manifest.get("version") != Storage.FORMAT_VERSION:
        raise CheckpointError(f"{path}: unsupported checkpoint version {manifest.get('version')!r}, expected {Storage.FORMAT_VERSION}")

    config: RunConfig = RunConfig.model_validate(manifest["config"])

    if config.config_hash() != manifest["config_hash"]:
        raise CheckpointError(f"{path}: embedded configuration does not match its hash {manifest['config_hash'][:12]}")

    raw: bytes = (path.parent / manifest["data"]).read_bytes()

    if len(raw) != 8 * manifest["values"]:
        raise CheckpointError(f"{path}: sidecar holds {len(raw)} bytes, expected {8 * manifest['values']}")

    values: np.ndarray = np.frombuffer(raw, dtype="<f8")
    arrays: dict[str, np.ndarray] = {}

    for entry in manifest["arrays"]:
        size: int = int(np.prod(entry["shape"], dtype=np.int64))
        arrays[entry["name"]] = values[entry["offset"]:entry["offset"] + size].astype(np.float64).reshape(entry["shape"])

    write_log("INFO", Storage, "LOAD CHECKPOINT", config.name, f"Iteration {manifest['iteration']} loaded from {path}.")
    return Checkpoint(config, manifest["iteration"], arrays, manifest["counters"], manifest["rng"], manifest["status"], manifest["version"])


def _cell(value: Any) -> str:
    if value is None:
        return ""

    if isinstance(value, float):
        return repr(value)

    return str(value)


def append_rows(path: Path, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> None:
    path = Path(path)
    buffer: StringIO = StringIO()
    writer = csv.writer(buffer, lineterminator="\n")

    with lock_for(path):
        if not path.exists():
            path.parent.mkdir(parents=True, exist_ok=True)
            writer.writerow(header)

        for row in rows:
            writer.writerow([_cell(value) for value in row])

        with path.open("a", encoding="utf-8", newline="") as f:
            f.write(buffer.getvalue())


def read_rows(path: Path) -> list[dict[str, str]]:
    with Path(path).open(encoding="utf-8", newline="") as f:
        return list(csv.DictReader(f))


def truncate_rows(path: Path, iteration: int) -> None:
    """Drop rows logged after `iteration`, so a resumed run appends where the checkpoint left off."""
    path = Path(path)

    if not path.exists():
        return

    with path.open(encoding="utf-8", newline="") as f:
        rows: list[list[str]] = list(csv.reader(f))

    if not rows:
        return

    kept: list[list[str]] = [rows[0], *(row for row in rows[1:] if int(row[0]) <= iteration)]
    buffer: StringIO = StringIO()
    csv.writer(buffer, lineterminator="\n").writerows(kept)
    atomic_write(path, buffer.getvalue().encode())
