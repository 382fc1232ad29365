"""The N packet families {V_{Nj+ℓ}}_j and certification of their weaving.

A pattern ℓ = (ℓ_j) picks one family per scale index j. Every summand of the
painless multiplier depends on a single ℓ_j, so taking the pointwise min (max)
over ℓ inside the sum bounds the multiplier of every pattern at once.
"""
from __future__ import annotations

import itertools
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from ..errors import InvalidArgumentError
from .frame_core import (
    DEFAULT_GRID_POINTS,
    DEFAULT_REFINE_POINTS,
    BoundsCertificate,
    GridInfo,
    SystemParams,
    WeavingPattern,
    breakpoints,
    frame_bounds,
    full_grid,
    refine_extreme,
    truncation_level,
)
from .generators import WaveletGenerator, eval_freq

logger = logging.getLogger(__name__)

ENUMERATION_BUDGET = 1_000_000
DEFAULT_TOL = 1e-3

_CHUNK = 4096


@dataclass(frozen=True)
class PacketFamily:
    """Family ℓ: the spaces V_{Nj+ℓ} = span{D_{a^{Nj+ℓ}} T_{kb} ψ}_k, j ∈ ℤ."""

    params: SystemParams
    family_index: int

    def __post_init__(self) -> None:
        if int(self.family_index) != self.family_index or not 0 <= self.family_index < self.params.N:
            raise InvalidArgumentError(
                f"family index {self.family_index} outside {{0, …, {self.params.N - 1}}}"
            )

    def scale(self, j: int) -> float:
        return float(self.params.a) ** (self.params.N * j + self.family_index)

    def scales(self, js: Sequence[int]) -> List[float]:
        return [self.scale(int(j)) for j in js]

    def descriptor(self, j: int, k_range: Tuple[int, int]) -> List[Tuple[float, float]]:
        """Index set {(λ, kb)} generating V_{Nj+ℓ} for k in the given range."""
        lam = self.scale(j)
        return [(lam, k * self.params.b) for k in range(k_range[0], k_range[1] + 1)]

    def pattern(self) -> WeavingPattern:
        return WeavingPattern.constant(self.params.N, self.family_index)


@dataclass
class WeaveCertificate:
    L_weave: float
    U_weave: float
    tail_bound: float
    grid: GridInfo
    certified: bool
    resolution: float = 0.0
    argmin: Optional[float] = None
    argmax: Optional[float] = None
    witness: Dict[int, int] = field(default_factory=dict)

    def as_dict(self) -> Dict[str, Any]:
        out = {k: v for k, v in vars(self).items() if k not in ("grid", "witness")}
        out["grid"] = self.grid.as_dict()
        out["witness"] = {str(j): int(l) for j, l in sorted(self.witness.items())}
        return out


@dataclass
class PatternBounds:
    pattern: WeavingPattern
    A_num: float
    B_num: float

    def as_dict(self) -> Dict[str, Any]:
        return {"choices": list(self.pattern.choices), "A_num": self.A_num, "B_num": self.B_num}


@dataclass
class SamplingReport:
    count: int
    seed: int
    window: Tuple[int, int]
    L_weave: float
    U_weave: float
    tol: float
    min_A: float
    max_B: float
    violations: List[int]
    entries: List[PatternBounds]

    @property
    def all_within(self) -> bool:
        return not self.violations

    def as_dict(self) -> Dict[str, Any]:
        return {
            "count": self.count,
            "seed": self.seed,
            "window": list(self.window),
            "L_weave": self.L_weave,
            "U_weave": self.U_weave,
            "tol": self.tol,
            "min_A": self.min_A,
            "max_B": self.max_B,
            "all_within": self.all_within,
            "violations": list(self.violations),
            "entries": [e.as_dict() for e in self.entries],
        }


@dataclass
class ExhaustiveReport:
    window: Tuple[int, int]
    extension: str
    patterns: int
    L_weave: float
    U_weave: float
    tol: float
    min_A: float
    max_B: float
    worst_lower: Tuple[int, ...]
    worst_upper: Tuple[int, ...]
    violations: int

    @property
    def gap(self) -> float:
        """How far the exhaustive minimum sits above the certified lower bound."""
        return self.min_A - self.L_weave

    @property
    def all_within(self) -> bool:
        return self.violations == 0

    def as_dict(self) -> Dict[str, Any]:
        out = dict(vars(self))
        out["window"] = list(self.window)
        out["worst_lower"] = list(self.worst_lower)
        out["worst_upper"] = list(self.worst_upper)
        out["gap"] = self.gap
        out["all_within"] = self.all_within
        return out


def packet_family(params: SystemParams, ell: int) -> PacketFamily:
    return PacketFamily(params=params, family_index=ell)


def woven_bounds(
    gen: WaveletGenerator,
    params: SystemParams,
    pattern: WeavingPattern,
    grid_points: int = DEFAULT_GRID_POINTS,
    refine_points: int = DEFAULT_REFINE_POINTS,
) -> BoundsCertificate:
    """Frame bounds of the mixed system {D_{a^{ℓ_j + Nj}} T_{kb} ψ}."""
    return frame_bounds(gen, params, pattern, grid_points, refine_points)


def _envelope_sums(
    gen: WaveletGenerator,
    params: SystemParams,
    gamma: np.ndarray,
    js: np.ndarray,
) -> Tuple[np.ndarray, np.ndarray]:
    """Σ_j min_ℓ and Σ_j max_ℓ of |ψ̂(γ a^{−(Nj+ℓ)})|², unscaled by 1/b."""
    a, N = float(params.a), int(params.N)
    exps = (N * js[:, None] + np.arange(N)[None, :]).astype(float)
    scales = a**exps
    lower = np.empty(gamma.shape, dtype=float)
    upper = np.empty(gamma.shape, dtype=float)
    for s in range(0, gamma.size, _CHUNK):
        g = gamma[s : s + _CHUNK]
        sq = eval_freq(gen, g[:, None, None] / scales[None, :, :]) ** 2
        lower[s : s + _CHUNK] = sq.min(axis=2).sum(axis=1)
        upper[s : s + _CHUNK] = sq.max(axis=2).sum(axis=1)
    return lower, upper


def weave_certificate(
    gen: WaveletGenerator,
    params: SystemParams,
    grid_points: int = DEFAULT_GRID_POINTS,
    refine_points: int = DEFAULT_REFINE_POINTS,
) -> WeaveCertificate:
    """Bounds (L, U) valid for every choice pattern simultaneously.

    L > 0 certifies that each pattern gives a frame, i.e. the N families are woven.
    The min/max sums are exactly a^N-periodic in γ, so one period is swept.
    """
    params.require_painless(gen)
    if grid_points < 16:
        raise InvalidArgumentError(f"grid_points must be >= 16, got {grid_points}")
    a, N = float(params.a), int(params.N)
    lo, hi = 1.0, a**N
    positive = np.exp(np.linspace(0.0, math.log(hi), grid_points))
    positive = np.union1d(positive, breakpoints(gen.support, a, N, range(N), lo, hi))
    both = not gen.even
    gamma = full_grid(positive, both)

    trunc = truncation_level(gen, params, WeavingPattern.constant(N), (lo, hi))
    js = np.arange(trunc.j_min_eff, trunc.j_max_eff + 1)

    def lower_of(xs: np.ndarray) -> np.ndarray:
        return _envelope_sums(gen, params, xs, js)[0] / params.b

    def upper_of(xs: np.ndarray) -> np.ndarray:
        return _envelope_sums(gen, params, xs, js)[1] / params.b

    lower, upper = _envelope_sums(gen, params, gamma, js)
    lower /= params.b
    upper /= params.b
    i_min, i_max = int(np.argmin(lower)), int(np.argmax(upper))
    L, x_min = refine_extreme(lower_of, gamma, lower, i_min, refine_points, want_min=True, span=(lo, hi))
    U, x_max = refine_extreme(upper_of, gamma, upper, i_max, refine_points, want_min=False, span=(lo, hi))

    scales = a ** (N * js[:, None] + np.arange(N)[None, :]).astype(float)
    sq = eval_freq(gen, x_min / scales) ** 2
    active = sq.max(axis=1) > 0
    witness = {int(j): int(l) for j, l, on in zip(js, sq.argmin(axis=1), active) if on}

    cert = WeaveCertificate(
        L_weave=L,
        U_weave=U,
        tail_bound=trunc.tail_bound,
        grid=GridInfo(lo=lo, hi=hi, points=int(gamma.size), log_spaced=True, both_signs=both, refine_points=refine_points),
        certified=bool(L > trunc.tail_bound),
        resolution=max(abs(float(lower[i_min]) - L), abs(float(upper[i_max]) - U)),
        argmin=x_min,
        argmax=x_max,
        witness=witness,
    )
    logger.info("weave certificate N=%d: L=%.12g U=%.12g", N, L, U)
    return cert


def _evaluate_patterns(
    gen: WaveletGenerator,
    params: SystemParams,
    patterns: Sequence[WeavingPattern],
    grid_points: int,
    refine_points: int,
    threads: int,
) -> List[PatternBounds]:
    def run(p: WeavingPattern) -> PatternBounds:
        cert = woven_bounds(gen, params, p, grid_points, refine_points)
        return PatternBounds(pattern=p, A_num=cert.A_num, B_num=cert.B_num)

    if threads <= 1:
        return [run(p) for p in patterns]
    # map keeps submission order, so reports do not depend on scheduling
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(run, patterns))


def sample_patterns(
    gen: WaveletGenerator,
    params: SystemParams,
    count: int,
    seed: int,
    window: Tuple[int, int],
    grid_points: int = DEFAULT_GRID_POINTS,
    refine_points: int = DEFAULT_REFINE_POINTS,
    tol: float = DEFAULT_TOL,
    threads: int = 1,
    certificate: Optional[WeaveCertificate] = None,
) -> SamplingReport:
    """Seeded uniform random patterns on ``window``, each checked against the certificate.

    Patterns come from numpy's PCG64 generator seeded with ``seed``, so reports
    are reproducible bit for bit.
    """
    if count < 1:
        raise InvalidArgumentError(f"count must be >= 1, got {count}")
    if certificate is None:
        certificate = weave_certificate(gen, params, grid_points, refine_points)
    rng = np.random.default_rng(seed)
    patterns = [WeavingPattern.random(params.N, window, rng) for _ in range(count)]
    entries = _evaluate_patterns(gen, params, patterns, grid_points, refine_points, threads)

    lo, hi = certificate.L_weave - tol, certificate.U_weave + tol
    violations = [i for i, e in enumerate(entries) if not (lo <= e.A_num and e.B_num <= hi)]
    if violations:
        logger.warning("%d sampled patterns fall outside the weave certificate", len(violations))
    return SamplingReport(
        count=count,
        seed=seed,
        window=(int(window[0]), int(window[1])),
        L_weave=certificate.L_weave,
        U_weave=certificate.U_weave,
        tol=tol,
        min_A=min(e.A_num for e in entries),
        max_B=max(e.B_num for e in entries),
        violations=violations,
        entries=entries,
    )


def enumerate_patterns(
    gen: WaveletGenerator,
    params: SystemParams,
    window: Tuple[int, int],
    grid_points: int = DEFAULT_GRID_POINTS,
    refine_points: int = DEFAULT_REFINE_POINTS,
    tol: float = DEFAULT_TOL,
    extension: str = "constant",
    threads: int = 1,
    certificate: Optional[WeaveCertificate] = None,
) -> ExhaustiveReport:
    """Exact min/max of the woven bounds over every pattern on ``window``."""
    lo_w, hi_w = int(window[0]), int(window[1])
    length = max(hi_w - lo_w + 1, 0)
    total = int(params.N) ** length
    if total > ENUMERATION_BUDGET:
        raise InvalidArgumentError(
            f"enumerating {params.N}^{length} = {total} patterns exceeds the budget of {ENUMERATION_BUDGET}"
        )
    if certificate is None:
        certificate = weave_certificate(gen, params, grid_points, refine_points)

    patterns = [
        WeavingPattern.explicit(params.N, lo_w, choices, extension)
        for choices in itertools.product(range(params.N), repeat=length)
    ]
    entries = _evaluate_patterns(gen, params, patterns, grid_points, refine_points, threads)

    worst_lower = min(entries, key=lambda e: e.A_num)
    worst_upper = max(entries, key=lambda e: e.B_num)
    lo, hi = certificate.L_weave - tol, certificate.U_weave + tol
    violations = sum(1 for e in entries if not (lo <= e.A_num and e.B_num <= hi))
    report = ExhaustiveReport(
        window=(lo_w, hi_w),
        extension=extension,
        patterns=len(entries),
        L_weave=certificate.L_weave,
        U_weave=certificate.U_weave,
        tol=tol,
        min_A=worst_lower.A_num,
        max_B=worst_upper.B_num,
        worst_lower=worst_lower.pattern.choices,
        worst_upper=worst_upper.pattern.choices,
        violations=violations,
    )
    logger.info("enumerated %d patterns: min A=%.12g (gap %.3g)", report.patterns, report.min_A, report.gap)
    return report
