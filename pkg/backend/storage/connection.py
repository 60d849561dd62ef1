import re
from pathlib import Path

from backend.storage.schema import RunConfig
from core.components import Storage
from core.errors import CheckpointError
from core.utils import atomic_write, write_log

_CHECKPOINT: re.Pattern = re.compile(r"ckpt_(\d{8})\.json")


class RunDirectory:
    """One training run on disk.

    ``config.json`` and ``config.hash`` pin the exact configuration,
    ``metrics.csv`` / ``timing.csv`` / ``grad_magnitude.csv`` hold the logs
    and ``checkpoints/`` the ``ckpt_XXXXXXXX.json`` manifests with their
    ``.bin`` sidecars.
    """

    def __init__(self, path: Path):
        self.path: Path = Path(path)

    @property
    def config_path(self) -> Path:
        return self.path / "config.json"

    @property
    def hash_path(self) -> Path:
        return self.path / "config.hash"

    @property
    def metrics_path(self) -> Path:
        return self.path / "metrics.csv"

    @property
    def timing_path(self) -> Path:
        return self.path / "timing.csv"

    @property
    def grad_path(self) -> Path:
        return self.path / "grad_magnitude.csv"

    @property
    def checkpoint_dir(self) -> Path:
        return self.path / "checkpoints"

    @property
    def diverged_path(self) -> Path:
        return self.checkpoint_dir / "diverged.json"

    def checkpoint_path(self, iteration: int) -> Path:
        return self.checkpoint_dir / f"ckpt_{iteration:08d}.json"

    @classmethod
    def create(cls, path: Path, config: RunConfig) -> "RunDirectory":
        run: RunDirectory = cls(path)

        if run.config_path.exists():
            existing: RunConfig = run.config()

            if existing.config_hash() != config.config_hash():
                raise CheckpointError(f"{run.path} already holds a different run ({existing.config_hash()[:12]})")

            write_log("INFO", Storage, "CREATE RUN", config.name, f"Reusing run directory {run.path}.")
            return run

        run.checkpoint_dir.mkdir(parents=True, exist_ok=True)
        atomic_write(run.config_path, (config.model_dump_json(indent=2) + "\n").encode())
        atomic_write(run.hash_path, (config.config_hash() + "\n").encode())
        write_log("INFO", Storage, "CREATE RUN", config.name, f"Run directory {run.path} created (hash {config.config_hash()[:12]}).")
        return run

    @classmethod
    def open(cls, path: Path) -> "RunDirectory":
        run: RunDirectory = cls(path)

        if not run.config_path.exists():
            raise CheckpointError(f"{run.path} is not a run directory (no config.json)")

        recorded: str = run.hash_path.read_text(encoding="utf-8").strip()

        if run.config().config_hash() != recorded:
            raise CheckpointError(f"{run.config_path} does not match its recorded hash {recorded[:12]}")

        return run

    def config(self) -> RunConfig:
        return RunConfig.load(self.config_path)

    def checkpoints(self) -> list[tuple[int, Path]]:
        if not self.checkpoint_dir.exists():
            return []

        found: list[tuple[int, Path]] = []

        for path in self.checkpoint_dir.iterdir():
            match = _CHECKPOINT.fullmatch(path.name)

            if match:
                found.append((int(match.group(1)), path))

        return sorted(found)

    def latest_checkpoint(self) -> Path:
        found: list[tuple[int, Path]] = self.checkpoints()

        if not found:
            raise CheckpointError(f"{self.path} holds no checkpoints")

        return found[-1][1]

    def __repr__(self) -> str:
        return f"RunDirectory(path={str(self.path)!r})"
