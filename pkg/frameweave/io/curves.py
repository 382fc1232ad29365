"""CSV curves: one header row, then ``%.17g`` rows."""
from __future__ import annotations

from pathlib import Path
from typing import List, Sequence, Tuple

import numpy as np

from ..errors import ReportError


def write_curve(path: Path, header: Sequence[str], columns: Sequence[np.ndarray]) -> int:
    path = Path(path)
    data = np.column_stack([np.asarray(c, dtype=float) for c in columns])
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        np.savetxt(path, data, fmt="%.17g", delimiter=",", header=",".join(header), comments="")
    except OSError as e:
        raise ReportError(path, f"cannot write curve: {e}") from e
    return int(data.shape[0])


def read_curve(path: Path) -> Tuple[List[str], np.ndarray]:
    path = Path(path)
    try:
        with path.open(encoding="utf-8") as fh:
            header = fh.readline().strip().split(",")
        data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    except (OSError, ValueError) as e:
        raise ReportError(path, f"cannot read curve: {e}") from e
    return header, data
