from __future__ import annotations

import os
import platform
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Any, Dict

import numpy as np
import scipy

from ..errors import ConfigError

THREADS_VAR = "FRAMEWEAVE_THREADS"


@dataclass
class RuntimeEnv:
    os: str            # "linux" | "darwin" | "windows"
    is_wsl: bool
    platform: str
    python: str
    numpy: str
    scipy: str
    threads: int

    def as_dict(self) -> Dict[str, Any]:
        return asdict(self)


def threads_from_env() -> int:
    raw = os.getenv(THREADS_VAR, "1").strip() or "1"
    try:
        n = int(raw)
    except ValueError:
        raise ConfigError(THREADS_VAR, f"expected a positive integer, got {raw!r}") from None
    if n < 1:
        raise ConfigError(THREADS_VAR, f"expected a positive integer, got {n}")
    return n


def detect_env() -> RuntimeEnv:
    osname = platform.system().lower()
    is_wsl = False
    if osname == "linux":
        try:
            txt = Path("/proc/version").read_text(errors="ignore").lower()
            is_wsl = "microsoft" in txt or "wsl" in txt
        except OSError:
            pass

    return RuntimeEnv(
        os=osname,
        is_wsl=is_wsl,
        platform=platform.platform(),
        python=platform.python_version(),
        numpy=np.__version__,
        scipy=scipy.__version__,
        threads=threads_from_env(),
    )
