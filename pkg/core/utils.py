import os
from logging import basicConfig, FileHandler, getLevelName, getLogger, INFO, WARNING
from pathlib import Path

from filelock import BaseFileLock, FileLock

from core.components import Component
from core.settings import LOG_PATH

LOG_FORMAT: str = "[%(asctime)s] [%(levelname)s] [%(name)s] %(message)s"
_LOCKS: dict[Path, BaseFileLock] = {}


def lock_for(path: Path) -> BaseFileLock:
    path = Path(path).resolve()

    if path not in _LOCKS:
        _LOCKS[path] = FileLock(f"{path}.lock")

    return _LOCKS[path]


def configure_logging(path: Path = LOG_PATH, level: int = INFO) -> None:
    basicConfig(level=level, filename=path, filemode="a", format=LOG_FORMAT, force=True)
    getLogger("PIL").setLevel(WARNING)
    getLogger("matplotlib").setLevel(WARNING)


def active_log_path() -> Path:
    """File the root logger currently writes to; the configured default before `configure_logging`."""
    for handler in getLogger().handlers:
        if isinstance(handler, FileHandler):
            return Path(handler.baseFilename)

    return LOG_PATH


def write_log(level: str, component: type[Component], func: str, run: str, message: str) -> None:
    with lock_for(active_log_path()):
        getLogger(f"qimagegen.{component}").log(getLevelName(level), f"[{func}] [{run}] {message}")


def atomic_write(path: Path, data: bytes) -> None:
    """Write `data` to a temporary sibling and move it into place."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp: Path = path.with_name(f".{path.name}.tmp")

    with lock_for(path):
        with tmp.open("wb") as f:
            f.write(data)
            f.flush()
            os.fsync(f.fileno())

        os.replace(tmp, path)
