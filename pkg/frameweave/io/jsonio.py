from __future__ import annotations

import dataclasses
import json
import math
from pathlib import Path
from typing import Any

import numpy as np

from ..errors import ReportError


def to_jsonable(obj: Any) -> Any:
    """Plain JSON types; non-finite floats become strings so reports stay strict JSON."""
    if hasattr(obj, "as_dict"):
        return to_jsonable(obj.as_dict())
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return to_jsonable(dataclasses.asdict(obj))
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [to_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, np.generic):
        return to_jsonable(obj.item())
    if isinstance(obj, bool) or obj is None or isinstance(obj, (int, str)):
        return obj
    if isinstance(obj, float):
        if math.isfinite(obj):
            return obj
        return "nan" if math.isnan(obj) else ("inf" if obj > 0 else "-inf")
    if isinstance(obj, complex):
        return {"re": to_jsonable(obj.real), "im": to_jsonable(obj.imag)}
    return str(obj)


def dumps_report(results: Any) -> str:
    # repr-based float output is the shortest string that round-trips (<= 17 digits)
    return json.dumps(to_jsonable(results), sort_keys=True, indent=2, allow_nan=False) + "\n"


def emit_report(results: Any, path: Path) -> None:
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(dumps_report(results), encoding="utf-8")
    except OSError as e:
        raise ReportError(path, f"cannot write report: {e}") from e


def must_json(s: str) -> dict:
    s = s.strip()
    if not s.startswith("{"):
        i = s.find("{")
        j = s.rfind("}")
        if i >= 0 and j > i:
            s = s[i : j + 1]
    return json.loads(s)


def load_report(path: Path) -> dict:
    path = Path(path)
    try:
        return must_json(path.read_text(encoding="utf-8"))
    except (OSError, ValueError) as e:
        raise ReportError(path, f"cannot read report: {e}") from e
