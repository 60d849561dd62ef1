import os
from pathlib import Path

from dotenv import load_dotenv

load_dotenv()

_MISSING: object = object()


def getenv(key: str, default: str | object = _MISSING) -> str:
    value: str | None = os.getenv(key)

    if value is None or not value.strip():
        if default is _MISSING:
            raise RuntimeError(f"Environment variable '{key}' is missing or empty. Check your .env file or system environment.")

        return str(default)

    return value


LOG_PATH: Path = Path(getenv("QIMAGEGEN_LOG", "qimagegen.log"))
RUNS_PATH: Path = Path(getenv("QIMAGEGEN_RUNS", "runs"))


def thread_count() -> int:
    raw: str = getenv("QIMAGEGEN_THREADS", "1")

    try:
        threads: int = int(raw)

    except ValueError:
        raise RuntimeError(f"QIMAGEGEN_THREADS must be a positive integer, got {raw!r}.") from None

    if threads < 1:
        raise RuntimeError(f"QIMAGEGEN_THREADS must be a positive integer, got {threads}.")

    return threads
