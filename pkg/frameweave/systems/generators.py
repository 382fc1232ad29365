"""Generating functions for the wavelet (frequency side) and Gabor (time side) systems.

Every profile is real valued and piecewise analytic, so each downstream
multiplier can be evaluated exactly on a grid. Indicators use half-open
intervals; a.e. statements about tilings become everywhere statements.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace
from typing import Any, Callable, Dict, Optional, Tuple

import numpy as np
from scipy.optimize import minimize_scalar

from ..errors import InvalidArgumentError

logger = logging.getLogger(__name__)

Profile = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class Envelope:
    """Constants of the two-sided power envelope C|γ|^β ≤ |ψ̂(γ)| ≤ D|γ|^α on U."""

    C: float
    D: float
    alpha: float
    beta: float
    u_radius: float

    def as_dict(self) -> Dict[str, float]:
        return {
            "C": self.C,
            "D": self.D,
            "alpha": self.alpha,
            "beta": self.beta,
            "u_radius": self.u_radius,
        }


@dataclass(frozen=True)
class WaveletGenerator:
    kind: str
    params: Dict[str, float]
    support: Tuple[float, float]
    sup_norm: float
    envelope: Envelope
    even: bool
    profile: Profile = field(repr=False, compare=False)

    @property
    def support_length(self) -> float:
        return self.support[1] - self.support[0]

    @property
    def support_radius(self) -> float:
        return max(abs(self.support[0]), abs(self.support[1]))


@dataclass(frozen=True)
class GaborGenerator:
    kind: str
    params: Dict[str, float]
    support: Tuple[float, float]
    sup_norm: float
    floor_eps: float
    cover_interval: Tuple[float, float]  # half-open [lo, hi)
    profile: Profile = field(repr=False, compare=False)

    @property
    def support_length(self) -> float:
        return self.support[1] - self.support[0]


@dataclass(frozen=True)
class InequalityCheck:
    passed: bool
    worst_gamma: Optional[float]
    worst_margin: float  # most negative slack; >= 0 when passed


@dataclass(frozen=True)
class EnvelopeReport:
    grid_points: int
    lower: InequalityCheck
    upper: InequalityCheck
    sup_norm_ok: bool
    support_ok: bool

    @property
    def passed(self) -> bool:
        return self.lower.passed and self.upper.passed and self.sup_norm_ok and self.support_ok

    def as_dict(self) -> Dict[str, Any]:
        return {
            "passed": self.passed,
            "grid_points": self.grid_points,
            "lower": vars(self.lower),
            "upper": vars(self.upper),
            "sup_norm_ok": self.sup_norm_ok,
            "support_ok": self.support_ok,
        }


def _require_positive(**values: float) -> None:
    for name, v in values.items():
        if not (isinstance(v, (int, float)) and math.isfinite(v) and v > 0):
            raise InvalidArgumentError(f"{name} must be a positive real, got {v!r}")


def make_powerlaw_wavelet(alpha: float, cutoff: float) -> WaveletGenerator:
    """ψ̂(γ) = |γ|^alpha on [−cutoff, cutoff], zero elsewhere.

    The envelope holds with equality: C = D = 1, α = β = alpha, U = I.
    """
    _require_positive(alpha=alpha, cutoff=cutoff)

    def profile(g: np.ndarray) -> np.ndarray:
        mag = np.abs(g)
        return np.where(mag <= cutoff, mag**alpha, 0.0)

    return WaveletGenerator(
        kind="powerlaw",
        params={"alpha": float(alpha), "cutoff": float(cutoff)},
        support=(-float(cutoff), float(cutoff)),
        sup_norm=float(cutoff) ** alpha,
        envelope=Envelope(C=1.0, D=1.0, alpha=float(alpha), beta=float(alpha), u_radius=float(cutoff)),
        even=True,
        profile=profile,
    )


def make_tapered_wavelet(alpha: float, cutoff: float) -> WaveletGenerator:
    """Power law with a cos² taper that reaches zero at ±cutoff.

    On U = [−cutoff/2, cutoff/2] the taper stays above 1/2, which gives C = 1/2, D = 1.
    """
    _require_positive(alpha=alpha, cutoff=cutoff)

    def profile(g: np.ndarray) -> np.ndarray:
        mag = np.abs(g)
        taper = np.cos(np.pi * g / (2.0 * cutoff)) ** 2
        return np.where(mag <= cutoff, mag**alpha * taper, 0.0)

    res = minimize_scalar(
        lambda t: -float(profile(np.asarray(t))),
        bounds=(0.0, cutoff),
        method="bounded",
        options={"xatol": 1e-12},
    )
    sup_norm = float(-res.fun)

    return WaveletGenerator(
        kind="tapered",
        params={"alpha": float(alpha), "cutoff": float(cutoff)},
        support=(-float(cutoff), float(cutoff)),
        sup_norm=sup_norm,
        envelope=Envelope(C=0.5, D=1.0, alpha=float(alpha), beta=float(alpha), u_radius=cutoff / 2.0),
        even=True,
        profile=profile,
    )


def make_indicator_wavelet(
    low: float,
    high: float,
    envelope: Optional[Envelope] = None,
) -> WaveletGenerator:
    """ψ̂ = 1 on the half-open band [low, high).

    Such a generator never satisfies the lower envelope near 0 unless 0 lies
    inside the band; the default envelope is a claim for validate_envelope to test.
    """
    if not (math.isfinite(low) and math.isfinite(high)) or high <= low:
        raise InvalidArgumentError(f"indicator band needs low < high, got [{low}, {high})")

    def profile(g: np.ndarray) -> np.ndarray:
        return np.where((g >= low) & (g < high), 1.0, 0.0)

    if envelope is None:
        envelope = Envelope(C=1.0, D=1.0, alpha=1.0, beta=1.0, u_radius=max(abs(low), abs(high)))

    return WaveletGenerator(
        kind="indicator",
        params={"low": float(low), "high": float(high)},
        support=(float(low), float(high)),
        sup_norm=1.0,
        envelope=envelope,
        even=False,
        profile=profile,
    )


def with_envelope(gen: WaveletGenerator, **changes: float) -> WaveletGenerator:
    """Copy of ``gen`` with some envelope constants replaced (claimed constants)."""
    try:
        env = replace(gen.envelope, **changes)
    except TypeError as e:
        raise InvalidArgumentError(str(e)) from e
    return replace(gen, envelope=env)


def eval_freq(gen: WaveletGenerator, gamma):
    """ψ̂(gamma); exactly 0 outside the support. Accepts scalars or arrays."""
    g = np.asarray(gamma, dtype=float)
    lo, hi = gen.support
    inside = (g >= lo) & (g <= hi)
    out = np.where(inside, gen.profile(g), 0.0)
    if out.ndim == 0:
        return float(out)
    return out


def eval_time(gen: GaborGenerator, x):
    g = np.asarray(x, dtype=float)
    lo, hi = gen.support
    inside = (g >= lo) & (g <= hi)
    out = np.where(inside, gen.profile(g), 0.0)
    if out.ndim == 0:
        return float(out)
    return out


def _check(lhs: np.ndarray, rhs: np.ndarray, grid: np.ndarray) -> InequalityCheck:
    # lhs <= rhs with a relative allowance for rounding
    slack = rhs - lhs + 1e-12 * np.maximum(np.abs(rhs), np.abs(lhs))
    i = int(np.argmin(slack))
    worst = float(slack[i])
    return InequalityCheck(passed=worst >= 0.0, worst_gamma=float(grid[i]), worst_margin=worst)


def validate_envelope(gen: WaveletGenerator, grid_points: int) -> EnvelopeReport:
    """Check the generator's invariants on a grid; failures are reported, not raised.

    The envelope grid is symmetric over U and excludes γ = 0, where both sides vanish.
    """
    if grid_points < 2:
        raise InvalidArgumentError(f"grid_points must be >= 2, got {grid_points}")

    env = gen.envelope
    half = max(grid_points // 2, 1)
    pos = env.u_radius * np.arange(1, half + 1, dtype=float) / half
    grid = np.concatenate([-pos[::-1], pos])
    mag = np.abs(eval_freq(gen, grid))
    t = np.abs(grid)

    lower = _check(env.C * t**env.beta, mag, grid)
    upper = _check(mag, env.D * t**env.alpha, grid)

    lo, hi = gen.support
    width = max(gen.support_length, 1.0)
    inner = np.linspace(lo, hi, grid_points)
    outer = np.concatenate(
        [np.linspace(lo - width, lo, grid_points, endpoint=False), np.linspace(hi, hi + width, grid_points + 1)[1:]]
    )
    sup_ok = bool(np.all(np.abs(eval_freq(gen, inner)) <= gen.sup_norm * (1 + 1e-12)))
    support_ok = bool(np.all(gen.profile(outer) == 0.0))

    report = EnvelopeReport(
        grid_points=int(grid.size),
        lower=lower,
        upper=upper,
        sup_norm_ok=sup_ok,
        support_ok=support_ok,
    )
    if not report.passed:
        logger.info("envelope check failed for %s %s: %s", gen.kind, gen.params, report.as_dict())
    return report


def make_indicator_gabor(length: float) -> GaborGenerator:
    """g = indicator of [0, length), floor ε = 1 on the same half-open interval."""
    _require_positive(length=length)

    def profile(x: np.ndarray) -> np.ndarray:
        return np.where((x >= 0.0) & (x < length), 1.0, 0.0)

    return GaborGenerator(
        kind="indicator",
        params={"length": float(length)},
        support=(0.0, float(length)),
        sup_norm=1.0,
        floor_eps=1.0,
        cover_interval=(0.0, float(length)),
        profile=profile,
    )


def describe_generator(gen) -> Dict[str, Any]:
    out: Dict[str, Any] = {
        "kind": gen.kind,
        "params": dict(gen.params),
        "support": list(gen.support),
        "sup_norm": gen.sup_norm,
    }
    if isinstance(gen, WaveletGenerator):
        out["envelope"] = gen.envelope.as_dict()
    else:
        out["floor_eps"] = gen.floor_eps
        out["cover_interval"] = list(gen.cover_interval)
    return out
