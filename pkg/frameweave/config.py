from __future__ import annotations

import os
import sys

if sys.version_info >= (3, 11):
    import tomllib
else:  # pragma: no cover - Python 3.10 fallback
    import tomli as tomllib
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from .errors import ConfigError, FrameweaveError
from .runtime.env import threads_from_env
from .systems.frame_core import DEFAULT_GRID_POINTS, DEFAULT_REFINE_POINTS, SystemParams, WeavingPattern
from .systems.gabor import GaborSystem
from .systems.generators import (
    GaborGenerator,
    WaveletGenerator,
    make_indicator_gabor,
    make_indicator_wavelet,
    make_powerlaw_wavelet,
    make_tapered_wavelet,
    with_envelope,
)
from .systems.weaving import DEFAULT_TOL

ALLOWED_COMMANDS = {
    "bounds",
    "weave-certify",
    "weave-sample",
    "weave-enumerate",
    "gabor-bounds",
    "gabor-certify",
    "density-gate",
    "reconstruct",
    "erasure",
    "fusion-demo",
    "counterexample",
}

# keys each section accepts; anything else is a typo worth reporting
SECTION_KEYS: Dict[str, set] = {
    "generator": {"kind", "alpha", "cutoff", "low", "high", "C", "D", "env_alpha", "env_beta", "u_radius"},
    "system": {"a", "b", "N"},
    "pattern": {"kind", "value", "window", "window_start", "choices", "extension"},
    "numeric": {"grid_points", "refine_points", "tol", "seed", "k_max", "samples", "window", "extension"},
    "gabor": {"kind", "length", "a", "b", "N"},
    "signal": {"count", "band", "bumps", "points", "both_signs", "iteration_tol"},
    "erasure": {"erased", "fallback"},
    "packet": {"path", "ambient_dim", "count", "max_dim", "weighted", "trials", "samples"},
    "counterexample": {"sizes"},
    "output": {"dir", "curves"},
}

DEFAULT_OUT = "artifacts/latest"
GRID_VAR = "FRAMEWEAVE_GRID"
SEED_VAR = "FRAMEWEAVE_SEED"

_MISSING = object()


@dataclass
class RunConfig:
    command: str
    sections: Dict[str, Dict[str, Any]] = field(default_factory=dict)
    source: Optional[Path] = None
    out_dir: Path = Path(DEFAULT_OUT)
    grid_points: int = DEFAULT_GRID_POINTS
    refine_points: int = DEFAULT_REFINE_POINTS
    tol: float = DEFAULT_TOL
    seed: int = 0
    threads: int = 1
    write_curves: bool = True

    def section(self, name: str) -> Dict[str, Any]:
        return self.sections.get(name, {})

    def get(self, section: str, key: str, kind: type = float, default: Any = _MISSING) -> Any:
        return _typed(self.section(section), section, key, kind, default)

    def rng(self) -> np.random.Generator:
        return np.random.default_rng(self.seed)

    def inputs(self) -> Dict[str, Any]:
        return {
            "config": str(self.source) if self.source else None,
            "sections": self.sections,
            "numeric": {
                "grid_points": self.grid_points,
                "refine_points": self.refine_points,
                "tol": self.tol,
                "seed": self.seed,
            },
        }


def _typed(values: Dict[str, Any], section: str, key: str, kind: type, default: Any) -> Any:
    name = f"{section}.{key}"
    if key not in values:
        if default is _MISSING:
            raise ConfigError(name, "missing required key")
        return default
    v = values[key]
    if kind is float:
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            raise ConfigError(name, f"expected a number, got {v!r}")
        return float(v)
    if kind is int:
        if isinstance(v, bool) or not isinstance(v, int):
            raise ConfigError(name, f"expected an integer, got {v!r}")
        return int(v)
    if kind is bool:
        if not isinstance(v, bool):
            raise ConfigError(name, f"expected true/false, got {v!r}")
        return v
    if kind is str:
        if not isinstance(v, str):
            raise ConfigError(name, f"expected a string, got {v!r}")
        return v
    if kind is list:
        if not isinstance(v, list):
            raise ConfigError(name, f"expected a list, got {v!r}")
        return v
    raise TypeError(kind)


def _int_pair(cfg: RunConfig, section: str, key: str, default: Any = _MISSING) -> Tuple[int, int]:
    v = cfg.get(section, key, list, default)
    if v is default and default is not _MISSING:
        return default
    if len(v) != 2 or not all(isinstance(x, int) and not isinstance(x, bool) for x in v) or v[1] < v[0]:
        raise ConfigError(f"{section}.{key}", f"expected [lo, hi] integers with lo <= hi, got {v!r}")
    return int(v[0]), int(v[1])


def _float_pair(cfg: RunConfig, section: str, key: str, default: Any = _MISSING) -> Tuple[float, float]:
    v = cfg.get(section, key, list, default)
    if v is default and default is not _MISSING:
        return default
    if len(v) != 2 or not all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in v):
        raise ConfigError(f"{section}.{key}", f"expected [lo, hi] numbers, got {v!r}")
    return float(v[0]), float(v[1])


def _resolve(cli_value: Optional[int], section: Dict[str, Any], key: str, env_var: str, default: int) -> int:
    """CLI flag > config file > environment > built-in default."""
    if cli_value is not None:
        return int(cli_value)
    if key in section:
        return _typed(section, "numeric", key, int, _MISSING)
    raw = os.getenv(env_var, "").strip()
    if raw:
        try:
            return int(raw)
        except ValueError:
            raise ConfigError(env_var, f"expected an integer, got {raw!r}") from None
    return default


def validate_sections(raw: Dict[str, Any]) -> Dict[str, Dict[str, Any]]:
    for name, body in raw.items():
        if name not in SECTION_KEYS:
            raise ConfigError(name, "unknown section")
        if not isinstance(body, dict):
            raise ConfigError(name, "expected a [section] table")
        for key in body:
            if key not in SECTION_KEYS[name]:
                raise ConfigError(f"{name}.{key}", "unknown key")
    return raw


def load_config(
    command: str,
    path: Optional[Path] = None,
    out: Optional[str] = None,
    seed: Optional[int] = None,
    grid: Optional[int] = None,
) -> RunConfig:
    if command not in ALLOWED_COMMANDS:
        raise ConfigError("command", f"unknown command {command!r}; expected one of {sorted(ALLOWED_COMMANDS)}")

    raw: Dict[str, Any] = {}
    if path is not None:
        path = Path(path)
        if not path.is_file():
            raise ConfigError("config", f"file not found: {path}")
        try:
            with path.open("rb") as fh:
                raw = tomllib.load(fh)
        except tomllib.TOMLDecodeError as e:
            raise ConfigError("config", f"{path}: {e}") from e
    sections = validate_sections(raw)

    numeric = sections.get("numeric", {})
    output = sections.get("output", {})
    cfg = RunConfig(command=command, sections=sections, source=path)
    cfg.grid_points = _resolve(grid, numeric, "grid_points", GRID_VAR, DEFAULT_GRID_POINTS)
    cfg.seed = _resolve(seed, numeric, "seed", SEED_VAR, 0)
    cfg.refine_points = cfg.get("numeric", "refine_points", int, DEFAULT_REFINE_POINTS)
    cfg.tol = cfg.get("numeric", "tol", float, DEFAULT_TOL)
    cfg.out_dir = Path(out if out is not None else _typed(output, "output", "dir", str, DEFAULT_OUT))
    cfg.write_curves = _typed(output, "output", "curves", bool, True)
    cfg.threads = threads_from_env()

    if cfg.grid_points < 16:
        raise ConfigError("numeric.grid_points", f"must be >= 16, got {cfg.grid_points}")
    if cfg.refine_points < 1:
        raise ConfigError("numeric.refine_points", f"must be positive, got {cfg.refine_points}")
    if cfg.tol <= 0:
        raise ConfigError("numeric.tol", f"must be positive, got {cfg.tol}")
    if cfg.seed < 0:
        raise ConfigError("numeric.seed", f"must be non-negative, got {cfg.seed}")
    return cfg


def _wrap(key: str, exc: FrameweaveError) -> ConfigError:
    return ConfigError(key, str(exc))


def build_wavelet(cfg: RunConfig) -> WaveletGenerator:
    kind = cfg.get("generator", "kind", str, "powerlaw")
    try:
        if kind == "powerlaw":
            gen = make_powerlaw_wavelet(cfg.get("generator", "alpha"), cfg.get("generator", "cutoff", float, 1.0))
        elif kind == "tapered":
            gen = make_tapered_wavelet(cfg.get("generator", "alpha"), cfg.get("generator", "cutoff", float, 1.0))
        elif kind == "indicator":
            gen = make_indicator_wavelet(cfg.get("generator", "low"), cfg.get("generator", "high"))
        else:
            raise ConfigError("generator.kind", f"unknown wavelet kind {kind!r}")
    except ConfigError:
        raise
    except FrameweaveError as e:
        raise _wrap("generator", e) from e

    overrides = {
        attr: cfg.get("generator", key)
        for key, attr in (("C", "C"), ("D", "D"), ("env_alpha", "alpha"), ("env_beta", "beta"), ("u_radius", "u_radius"))
        if key in cfg.section("generator")
    }
    return with_envelope(gen, **overrides) if overrides else gen


def build_params(cfg: RunConfig) -> SystemParams:
    try:
        return SystemParams(
            a=cfg.get("system", "a"),
            b=cfg.get("system", "b"),
            N=cfg.get("system", "N", int, 1),
        )
    except ConfigError:
        raise
    except FrameweaveError as e:
        raise _wrap("system", e) from e


def build_pattern(cfg: RunConfig, N: int, section: str = "pattern") -> WeavingPattern:
    kind = cfg.get(section, "kind", str, "constant")
    try:
        if kind == "constant":
            return WeavingPattern.constant(N, cfg.get(section, "value", int, 0))
        if kind == "alternating":
            window = _int_pair(cfg, section, "window", None)
            return WeavingPattern.alternating(N, window)
        if kind == "explicit":
            choices = cfg.get(section, "choices", list)
            return WeavingPattern.explicit(
                N,
                cfg.get(section, "window_start", int, 0),
                choices,
                cfg.get(section, "extension", str, "constant"),
            )
        if kind == "random":
            return WeavingPattern.random(N, _int_pair(cfg, section, "window"), cfg.rng())
    except ConfigError:
        raise
    except FrameweaveError as e:
        raise _wrap(section, e) from e
    raise ConfigError(f"{section}.kind", f"unknown pattern kind {kind!r}")


def build_gabor_generator(cfg: RunConfig) -> GaborGenerator:
    kind = cfg.get("gabor", "kind", str, "indicator")
    if kind != "indicator":
        raise ConfigError("gabor.kind", f"unknown Gabor window kind {kind!r}")
    try:
        return make_indicator_gabor(cfg.get("gabor", "length"))
    except FrameweaveError as e:
        raise _wrap("gabor.length", e) from e


def build_gabor(cfg: RunConfig) -> GaborSystem:
    gen = build_gabor_generator(cfg)
    N = cfg.get("gabor", "N", int, 1)
    pattern = build_pattern(cfg, N) if "pattern" in cfg.sections else None
    try:
        return GaborSystem(gen=gen, a=cfg.get("gabor", "a"), b=cfg.get("gabor", "b"), N=N, pattern=pattern)
    except FrameweaveError as e:
        raise _wrap("gabor", e) from e


def int_list(cfg: RunConfig, section: str, key: str, default: Optional[Sequence[int]] = None) -> List[int]:
    v = cfg.get(section, key, list, _MISSING if default is None else list(default))
    if not all(isinstance(x, int) and not isinstance(x, bool) for x in v):
        raise ConfigError(f"{section}.{key}", f"expected a list of integers, got {v!r}")
    return [int(x) for x in v]


def float_pair(cfg: RunConfig, section: str, key: str, default: Tuple[float, float]) -> Tuple[float, float]:
    return _float_pair(cfg, section, key, default)


def int_pair(cfg: RunConfig, section: str, key: str, default: Tuple[int, int]) -> Tuple[int, int]:
    return _int_pair(cfg, section, key, default)
