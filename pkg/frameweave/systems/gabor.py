"""Gabor counterpart: translates γ_n = nNa + ℓ_n a of a compactly supported window.

With b ≤ 1/|I| the Gabor frame operator is multiplication by the time-side
multiplier (1/b) Σ_n |g(x − γ_n)|², so every bound is a 1-D sweep in x.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, NamedTuple, Optional, Tuple

import numpy as np

from ..errors import InvalidArgumentError, PreconditionError
from .frame_core import (
    DEFAULT_GRID_POINTS,
    DEFAULT_REFINE_POINTS,
    BoundsCertificate,
    GridInfo,
    WeavingPattern,
    refine_extreme,
)
from .generators import GaborGenerator, eval_time
from .weaving import WeaveCertificate

logger = logging.getLogger(__name__)

_CHUNK = 8192


@dataclass(frozen=True)
class GaborSystem:
    gen: GaborGenerator
    a: float
    b: float
    N: int = 1
    pattern: Optional[WeavingPattern] = None
    n_range: Optional[Tuple[int, int]] = None  # finite section; None means all n

    def __post_init__(self) -> None:
        if not (math.isfinite(self.a) and self.a > 0):
            raise InvalidArgumentError(f"translation step a must be > 0, got {self.a}")
        if not (math.isfinite(self.b) and self.b > 0):
            raise InvalidArgumentError(f"modulation step b must be > 0, got {self.b}")
        if int(self.N) != self.N or self.N < 1:
            raise InvalidArgumentError(f"N must be an integer >= 1, got {self.N}")
        if self.pattern is None:
            object.__setattr__(self, "pattern", WeavingPattern.constant(self.N))
        elif self.pattern.N != self.N:
            raise InvalidArgumentError(f"pattern order {self.pattern.N} does not match N={self.N}")

    @property
    def painless(self) -> bool:
        return self.b * self.gen.support_length <= 1.0 + 1e-12

    def require_painless(self) -> None:
        if not self.painless:
            raise PreconditionError(
                f"b = {self.b} exceeds 1/|I| = {1.0 / self.gen.support_length}; modulation cross terms survive"
            )

    def nodes(self, ns: np.ndarray) -> np.ndarray:
        """γ_n = nNa + ℓ_n a."""
        ns = np.asarray(ns, dtype=np.int64)
        return (ns * self.N + self.pattern.choices_for(ns)).astype(float) * self.a

    def index_range(self, x_lo: float, x_hi: float) -> Tuple[int, int]:
        """All n whose translated window can meet [x_lo, x_hi]."""
        s0, s1 = self.gen.support
        step = self.N * self.a
        n_lo = math.floor((x_lo - s1 - (self.N - 1) * self.a) / step)
        n_hi = math.ceil((x_hi - s0) / step)
        if self.n_range is not None:
            n_lo, n_hi = max(n_lo, self.n_range[0]), min(n_hi, self.n_range[1])
        return n_lo, n_hi

    def as_dict(self) -> Dict[str, Any]:
        return {
            "a": self.a,
            "b": self.b,
            "N": int(self.N),
            "pattern": self.pattern.as_dict(),
            "n_range": list(self.n_range) if self.n_range is not None else None,
        }


class DensityVerdict(NamedTuple):
    ok: bool
    message: str
    product: float


@dataclass
class CoverReport:
    floor_eps: float
    stated_interval: Tuple[float, float]
    stated_ok: bool
    strengthened_interval: Tuple[float, float]
    strengthened_ok: bool
    worst_stated: Optional[float] = None
    worst_strengthened: Optional[float] = None
    notes: List[str] = field(default_factory=list)

    def as_dict(self) -> Dict[str, Any]:
        out = dict(vars(self))
        out["stated_interval"] = list(self.stated_interval)
        out["strengthened_interval"] = list(self.strengthened_interval)
        return out


def density_gate(a: float, b: float, N: int) -> DensityVerdict:
    """abN ≤ 1 is needed to split a Gabor frame into N woven packets."""
    if a <= 0 or b <= 0 or N < 1:
        raise InvalidArgumentError(f"density gate needs positive a, b, N; got a={a}, b={b}, N={N}")
    ab = a * b
    if ab > 1.0 + 1e-12:
        return DensityVerdict(False, f"ab = {ab:.3f} > 1: no Gabor frame exists for these parameters", ab * N)
    product = ab * N
    if product > 1.0 + 1e-12:
        return DensityVerdict(False, f"abN = {product:.3f} > 1", product)
    return DensityVerdict(True, f"abN = {product:.3f} <= 1", product)


def max_weaving_order(a: float, b: float) -> int:
    """Largest N with abN ≤ 1; unlike the wavelet case it is finite."""
    if a <= 0 or b <= 0:
        raise InvalidArgumentError("a and b must be positive")
    return int(math.floor(1.0 / (a * b) + 1e-12))


def time_multiplier(system: GaborSystem, x):
    """(1/b) Σ_n |g(x − γ_n)|² over the n with support overlap."""
    system.require_painless()
    xs = np.atleast_1d(np.asarray(x, dtype=float))
    out = np.zeros(xs.shape, dtype=float)
    if xs.size:
        n_lo, n_hi = system.index_range(float(xs.min()), float(xs.max()))
        if n_hi >= n_lo:
            nodes = system.nodes(np.arange(n_lo, n_hi + 1))
            for s in range(0, xs.size, _CHUNK):
                chunk = xs[s : s + _CHUNK]
                out[s : s + _CHUNK] = np.sum(eval_time(system.gen, chunk[:, None] - nodes[None, :]) ** 2, axis=1)
        out /= system.b
    if np.ndim(x) == 0:
        return float(out[0])
    return out


def gabor_cross_term_sum(system: GaborSystem, x, k_max: int):
    """Σ_{0<|k|≤k_max} |Σ_n g(x − γ_n) g(x − γ_n − k/b)|; zero in the painless regime."""
    if k_max < 1:
        raise InvalidArgumentError(f"k_max must be >= 1, got {k_max}")
    xs = np.atleast_1d(np.asarray(x, dtype=float))
    ks = np.concatenate([np.arange(-k_max, 0), np.arange(1, k_max + 1)]).astype(float)
    n_lo, n_hi = system.index_range(float(xs.min()), float(xs.max()))
    nodes = system.nodes(np.arange(n_lo, n_hi + 1))
    out = np.empty(xs.shape, dtype=float)
    for i, xi in enumerate(xs):
        base = eval_time(system.gen, xi - nodes)
        if not np.any(base):
            out[i] = 0.0
            continue
        shifted = eval_time(system.gen, xi - nodes[:, None] - ks[None, :] / system.b)
        out[i] = float(np.sum(np.abs(np.sum(base[:, None] * shifted, axis=0))))
    if np.ndim(x) == 0:
        return float(out[0])
    return out


def _tile_edges(system: GaborSystem, lo: float, hi: float) -> np.ndarray:
    n_lo, n_hi = system.index_range(lo, hi)
    if n_hi < n_lo:
        return np.empty(0)
    nodes = system.nodes(np.arange(n_lo, n_hi + 1))
    edges = np.concatenate([nodes + system.gen.support[0], nodes + system.gen.support[1]])
    return edges[(edges >= lo) & (edges < hi)]


def gabor_frame_bounds(
    system: GaborSystem,
    grid_points: int = DEFAULT_GRID_POINTS,
    refine_points: int = DEFAULT_REFINE_POINTS,
) -> BoundsCertificate:
    """Frame bounds from the time multiplier over one period of length P·N·a."""
    system.require_painless()
    if grid_points < 16:
        raise InvalidArgumentError(f"grid_points must be >= 16, got {grid_points}")
    step = system.N * system.a
    notes: List[str] = []
    period = system.pattern.period
    if period is not None and system.n_range is None:
        lo, hi = 0.0, period * step
        points = grid_points * period
    else:
        n0, n1 = system.pattern.window if system.n_range is None else system.n_range
        s0, s1 = system.gen.support
        lo = n0 * step + s1 + (system.N - 1) * system.a
        hi = (n1 + 1) * step + s0
        if hi <= lo:
            lo, hi = n0 * step, (n1 + 1) * step
            notes.append("window too short for an interior span; swept the whole window")
        notes.append("non-periodic pattern: bounds certified only on the window's interior span")
        points = grid_points * max(n1 - n0 + 1, 1)

    xs = np.union1d(np.linspace(lo, hi, points, endpoint=False), _tile_edges(system, lo, hi))

    def evaluate(v: np.ndarray) -> np.ndarray:
        return time_multiplier(system, v)

    values = evaluate(xs)
    i_min, i_max = int(np.argmin(values)), int(np.argmax(values))
    A, x_min = refine_extreme(evaluate, xs, values, i_min, refine_points, want_min=True)
    B, x_max = refine_extreme(evaluate, xs, values, i_max, refine_points, want_min=False)

    certified = A > 0.0
    if not certified:
        notes.append("A_num = 0: the translates leave gaps, not a frame")
        logger.warning("Gabor system not certified (A_num = 0) for %s", system.as_dict())
    return BoundsCertificate(
        A_num=A,
        B_num=B,
        tail_bound=0.0,
        grid=GridInfo(lo=lo, hi=hi, points=int(xs.size), log_spaced=False, both_signs=False, refine_points=refine_points),
        certified=certified,
        resolution=max(abs(float(values[i_min]) - A), abs(float(values[i_max]) - B)),
        argmin=x_min,
        argmax=x_max,
        pattern=system.pattern.as_dict(),
        notes=notes,
    )


def _choice_sums(gen: GaborGenerator, a: float, N: int, xs: np.ndarray, ns: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    shifts = (ns[:, None] * N + np.arange(N)[None, :]).astype(float) * a
    lower = np.empty(xs.shape, dtype=float)
    upper = np.empty(xs.shape, dtype=float)
    for s in range(0, xs.size, _CHUNK):
        chunk = xs[s : s + _CHUNK]
        sq = eval_time(gen, chunk[:, None, None] - shifts[None, :, :]) ** 2
        lower[s : s + _CHUNK] = sq.min(axis=2).sum(axis=1)
        upper[s : s + _CHUNK] = sq.max(axis=2).sum(axis=1)
    return lower, upper


def gabor_weave_certificate(
    gen: GaborGenerator,
    a: float,
    b: float,
    N: int,
    grid_points: int = DEFAULT_GRID_POINTS,
    refine_points: int = DEFAULT_REFINE_POINTS,
) -> WeaveCertificate:
    """(L, U) from Σ_n min_ℓ / max_ℓ |g(x − nNa − ℓa)|², swept over [0, Na)."""
    system = GaborSystem(gen=gen, a=a, b=b, N=N)
    system.require_painless()
    if grid_points < 16:
        raise InvalidArgumentError(f"grid_points must be >= 16, got {grid_points}")
    lo, hi = 0.0, N * a
    n_lo, n_hi = system.index_range(lo, hi)
    ns = np.arange(n_lo, n_hi + 1)

    shifts = (ns[:, None] * N + np.arange(N)[None, :]).astype(float) * a
    edges = np.concatenate([(shifts + gen.support[0]).ravel(), (shifts + gen.support[1]).ravel()])
    xs = np.union1d(np.linspace(lo, hi, grid_points, endpoint=False), edges[(edges >= lo) & (edges < hi)])

    def lower_of(v: np.ndarray) -> np.ndarray:
        return _choice_sums(gen, a, N, v, ns)[0] / b

    def upper_of(v: np.ndarray) -> np.ndarray:
        return _choice_sums(gen, a, N, v, ns)[1] / b

    lower, upper = _choice_sums(gen, a, N, xs, ns)
    lower /= b
    upper /= b
    i_min, i_max = int(np.argmin(lower)), int(np.argmax(upper))
    L, x_min = refine_extreme(lower_of, xs, lower, i_min, refine_points, want_min=True)
    U, x_max = refine_extreme(upper_of, xs, upper, i_max, refine_points, want_min=False)

    sq = eval_time(gen, x_min - shifts) ** 2
    active = sq.max(axis=1) > 0
    witness = {int(n): int(l) for n, l, on in zip(ns, sq.argmin(axis=1), active) if on}

    return WeaveCertificate(
        L_weave=L,
        U_weave=U,
        tail_bound=0.0,
        grid=GridInfo(lo=lo, hi=hi, points=int(xs.size), log_spaced=False, both_signs=False, refine_points=refine_points),
        certified=bool(L > 0.0),
        resolution=max(abs(float(lower[i_min]) - L), abs(float(upper[i_max]) - U)),
        argmin=x_min,
        argmax=x_max,
        witness=witness,
    )


def _covered(gen: GaborGenerator, end: float, grid_points: int) -> Tuple[bool, Optional[float]]:
    xs = np.linspace(0.0, end, grid_points, endpoint=False)
    vals = np.abs(eval_time(gen, xs))
    i = int(np.argmin(vals))
    ok = bool(vals[i] >= gen.floor_eps)
    return ok, (None if ok else float(xs[i]))


def verify_cover(gen: GaborGenerator, a: float, N: int, grid_points: int = DEFAULT_GRID_POINTS) -> CoverReport:
    """Check |g| ≥ ε on [0, aN) and on the stronger [0, (2N−1)a).

    The stronger interval is what the woven lower bound needs when ℓ_{n−1} = 0
    and ℓ_n = N−1 leave the largest gap between consecutive translates.
    """
    if a <= 0 or N < 1:
        raise InvalidArgumentError(f"verify_cover needs a > 0 and N >= 1, got a={a}, N={N}")
    stated_end = a * N
    strong_end = (2 * N - 1) * a
    stated_ok, worst_p = _covered(gen, stated_end, grid_points)
    strong_ok, worst_s = _covered(gen, strong_end, grid_points)
    notes = []
    if stated_ok and not strong_ok:
        notes.append("floor holds on [0, aN) only; woven lower bound falls back to numerical verification")
    return CoverReport(
        floor_eps=gen.floor_eps,
        stated_interval=(0.0, stated_end),
        stated_ok=stated_ok,
        strengthened_interval=(0.0, strong_end),
        strengthened_ok=strong_ok,
        worst_stated=worst_p,
        worst_strengthened=worst_s,
        notes=notes,
    )
