"""Frame bounds of dilation/translation systems {D_{λ_j} T_{kb} ψ} in the painless regime.

With b ≤ 1/|I| every cross term of the frame operator vanishes, so the frame
operator is multiplication by

    m(γ) = (1/b) Σ_j |ψ̂(γ/λ_j)|²,   λ_j = a^{ℓ_j + N j},

and the frame bounds are the essential inf/sup of m. The sums are truncated:
low j terms vanish exactly by support, high j terms are bounded by the
D|γ|^α envelope and reported as ``tail_bound``.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Any, Dict, Iterable, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np

from ..errors import InvalidArgumentError, PreconditionError
from .generators import WaveletGenerator, eval_freq, validate_envelope

logger = logging.getLogger(__name__)

EXTENSIONS = {"constant", "periodic"}

DEFAULT_GRID_POINTS = 4096
DEFAULT_REFINE_POINTS = 256
DEFAULT_TAIL_REL = 1e-12

_CHUNK = 8192


@dataclass(frozen=True)
class SystemParams:
    a: float
    b: float
    N: int = 1

    def __post_init__(self) -> None:
        if not (math.isfinite(self.a) and self.a > 1):
            raise InvalidArgumentError(f"dilation base a must be > 1, got {self.a}")
        if not (math.isfinite(self.b) and self.b > 0):
            raise InvalidArgumentError(f"translation step b must be > 0, got {self.b}")
        if int(self.N) != self.N or self.N < 1:
            raise InvalidArgumentError(f"weaving order N must be an integer >= 1, got {self.N}")

    def painless(self, gen: WaveletGenerator) -> bool:
        return self.b * gen.support_length <= 1.0 + 1e-12

    def require_painless(self, gen: WaveletGenerator) -> None:
        if not self.painless(gen):
            raise PreconditionError(
                f"b = {self.b} exceeds 1/|I| = {1.0 / gen.support_length}; cross terms do not vanish, "
                "use the Gram oracle instead"
            )

    def as_dict(self) -> Dict[str, Any]:
        return {"a": self.a, "b": self.b, "N": int(self.N)}


@dataclass(frozen=True)
class WeavingPattern:
    """Per-index family choices ℓ_j ∈ {0, …, N−1} on a finite window.

    Outside the window the choice is either 0 (``constant``) or the window
    repeated (``periodic``). Constant choices ℓ ≡ c are periodic windows of length one.
    """

    N: int
    window_start: int = 0
    choices: Tuple[int, ...] = ()
    extension: str = "constant"

    def __post_init__(self) -> None:
        if int(self.N) != self.N or self.N < 1:
            raise InvalidArgumentError(f"N must be an integer >= 1, got {self.N}")
        if self.extension not in EXTENSIONS:
            raise InvalidArgumentError(f"extension must be one of {sorted(EXTENSIONS)}, got {self.extension!r}")
        for c in self.choices:
            if int(c) != c or not 0 <= c < self.N:
                raise InvalidArgumentError(f"choice {c} outside {{0, …, {self.N - 1}}}")
        if self.extension == "periodic" and not self.choices:
            object.__setattr__(self, "extension", "constant")

    @classmethod
    def constant(cls, N: int, value: int = 0) -> "WeavingPattern":
        if value == 0:
            return cls(N=N)
        return cls(N=N, window_start=0, choices=(value,), extension="periodic")

    @classmethod
    def alternating(cls, N: int, window: Optional[Tuple[int, int]] = None) -> "WeavingPattern":
        """ℓ_j = j mod 2 (mod N), periodic unless a window is given."""
        if window is None:
            return cls(N=N, window_start=0, choices=(0, 1 % N), extension="periodic")
        lo, hi = window
        return cls(N=N, window_start=lo, choices=tuple((j % 2) % N for j in range(lo, hi + 1)))

    @classmethod
    def explicit(
        cls,
        N: int,
        window_start: int,
        choices: Sequence[int],
        extension: str = "constant",
    ) -> "WeavingPattern":
        return cls(N=N, window_start=int(window_start), choices=tuple(int(c) for c in choices), extension=extension)

    @classmethod
    def random(cls, N: int, window: Tuple[int, int], rng: np.random.Generator) -> "WeavingPattern":
        lo, hi = window
        size = max(hi - lo + 1, 0)
        return cls(N=N, window_start=lo, choices=tuple(int(c) for c in rng.integers(0, N, size=size)))

    @property
    def window(self) -> Tuple[int, int]:
        return self.window_start, self.window_start + len(self.choices) - 1

    @property
    def period(self) -> Optional[int]:
        """Length of the repeating block, or None for a genuinely windowed pattern."""
        if self.extension == "periodic":
            return len(self.choices)
        if all(c == 0 for c in self.choices):
            return 1
        return None

    @property
    def is_constant(self) -> bool:
        return len(set(self.choices) | ({0} if self.extension == "constant" else set())) <= 1

    def distinct_choices(self) -> List[int]:
        vals = set(self.choices)
        if self.extension == "constant" or not vals:
            vals.add(0)
        return sorted(vals)

    def choices_for(self, js: np.ndarray) -> np.ndarray:
        js = np.asarray(js, dtype=np.int64)
        if not self.choices:
            return np.zeros_like(js)
        block = np.asarray(self.choices, dtype=np.int64)
        offset = js - self.window_start
        if self.extension == "periodic":
            return block[np.mod(offset, block.size)]
        inside = (offset >= 0) & (offset < block.size)
        return np.where(inside, block[np.clip(offset, 0, block.size - 1)], 0)

    def choice(self, j: int) -> int:
        return int(self.choices_for(np.asarray([j]))[0])

    def exponents(self, js: np.ndarray) -> np.ndarray:
        js = np.asarray(js, dtype=np.int64)
        return self.choices_for(js) + self.N * js

    def scales(self, params: SystemParams, js: np.ndarray) -> np.ndarray:
        """λ_j = a^{ℓ_j + N j}."""
        return float(params.a) ** self.exponents(js).astype(float)

    def as_dict(self) -> Dict[str, Any]:
        return {
            "N": int(self.N),
            "window_start": int(self.window_start),
            "choices": list(self.choices),
            "extension": self.extension,
        }


@dataclass(frozen=True)
class Truncation:
    j_min_eff: int
    j_max_eff: int
    tail_bound: float


@dataclass(frozen=True)
class GridInfo:
    lo: float
    hi: float
    points: int
    log_spaced: bool
    both_signs: bool
    refine_points: int

    def as_dict(self) -> Dict[str, Any]:
        return dict(vars(self))


@dataclass
class BoundsCertificate:
    A_num: float
    B_num: float
    tail_bound: float
    grid: GridInfo
    certified: bool
    A_analytic: Optional[float] = None
    B_analytic: Optional[float] = None
    J_const: Optional[int] = None
    K_const: Optional[int] = None
    L_weave: Optional[float] = None
    U_weave: Optional[float] = None
    resolution: float = 0.0
    argmin: Optional[float] = None
    argmax: Optional[float] = None
    pattern: Optional[Dict[str, Any]] = None
    notes: List[str] = field(default_factory=list)

    def as_dict(self) -> Dict[str, Any]:
        out = {k: v for k, v in vars(self).items() if k != "grid"}
        out["grid"] = self.grid.as_dict()
        return out


class AnalyticBounds(NamedTuple):
    A_analytic: float
    B_analytic: float
    J_const: int
    K_const: int


def admissible_b(gen: WaveletGenerator) -> float:
    """Largest painless translation step, 1/|I|."""
    length = gen.support_length
    if not math.isfinite(length) or length <= 0:
        raise InvalidArgumentError(f"generator support {gen.support} is not a bounded interval")
    return 1.0 / length


def _magnitude_range(gamma_range: Tuple[float, float]) -> Tuple[float, float]:
    lo, hi = float(gamma_range[0]), float(gamma_range[1])
    if lo > hi:
        lo, hi = hi, lo
    if lo > 0:
        return lo, hi
    if hi < 0:
        return -hi, -lo
    if lo == 0 and hi > 0:
        raise InvalidArgumentError("gamma_range must be bounded away from 0; pass magnitudes [g_lo, g_hi] with g_lo > 0")
    if hi == 0 and lo < 0:
        raise InvalidArgumentError("gamma_range must be bounded away from 0")
    if lo == 0 and hi == 0:
        raise InvalidArgumentError("gamma_range contains only 0")
    raise InvalidArgumentError("gamma_range straddles 0; pass the symmetric magnitude range instead")


def tail_bound_for(gen: WaveletGenerator, params: SystemParams, gamma_hi: float, j_max_eff: int) -> float:
    """Envelope bound on (1/b) Σ_{j > j_max_eff} |ψ̂(γ/λ_j)|² for |γ| ≤ gamma_hi.

    Valid once gamma_hi / a^{N(j_max_eff+1)} lies inside U.
    """
    env = gen.envelope
    a, N = float(params.a), int(params.N)
    ratio = a ** (-2.0 * env.alpha * N)
    lead = env.D**2 * gamma_hi ** (2.0 * env.alpha) * a ** (-2.0 * env.alpha * N * (j_max_eff + 1))
    return lead / (1.0 - ratio) / params.b


def _analytic(gen: WaveletGenerator, params: SystemParams) -> AnalyticBounds:
    env = gen.envelope
    a, N, b = float(params.a), int(params.N), float(params.b)
    u = env.u_radius
    if not (math.isfinite(u) and u > 0):
        raise InvalidArgumentError(f"envelope neighbourhood U = [-{u}, {u}] is degenerate")

    J = math.floor(math.log(u) / (N * math.log(a)))
    while a ** (N * J) > u:
        J -= 1
    while a ** (N * (J + 1)) <= u:
        J += 1

    lo, hi = gen.support
    K = None
    for k in range(1, 10_001):
        p = a ** (N * (J - 1 + k))
        q = a ** (N * (J + k))
        hits_pos = p <= hi and q >= lo
        hits_neg = -q <= hi and -p >= lo
        if not (hits_pos or hits_neg):
            K = k
            break
    if K is None:
        raise InvalidArgumentError(f"no K separates the dilated annulus from I = {gen.support}")

    A = env.C**2 * a ** (-2.0 * env.beta * N) / a ** (2.0 * env.beta * (N - 1 - N * J)) / b
    B = (env.D**2 * a ** (2.0 * env.alpha * N * J) / (1.0 - a ** (-2.0 * env.alpha * N)) + K * gen.sup_norm**2) / b
    return AnalyticBounds(A, B, J, K)


def analytic_bounds(gen: WaveletGenerator, params: SystemParams) -> AnalyticBounds:
    """Lower/upper frame bounds valid for every pattern, from the envelope constants.

    J is the largest integer with [a^{N(J−1)}, a^{NJ}] ⊆ U; K is the smallest
    positive integer with [a^{N(J−1+K)}, a^{N(J+K)}] (and its mirror) disjoint
    from the closed support I.
    """
    params.require_painless(gen)
    report = validate_envelope(gen, 1024)
    if not report.passed:
        raise PreconditionError(f"envelope constants do not hold for {gen.kind}: {report.as_dict()}")
    return _analytic(gen, params)


def _reference_scale(gen: WaveletGenerator, params: SystemParams) -> float:
    try:
        A = _analytic(gen, params).A_analytic
    except InvalidArgumentError:
        return 1.0
    return A if A > 0 and math.isfinite(A) else 1.0


def truncation_level(
    gen: WaveletGenerator,
    params: SystemParams,
    pattern: WeavingPattern,
    gamma_range: Tuple[float, float],
    tail_target: Optional[float] = None,
) -> Truncation:
    """Effective j-range for γ in ``gamma_range`` (magnitudes, 0 excluded).

    Terms below j_min_eff vanish exactly; the remainder above j_max_eff is at
    most ``tail_bound``, which is pushed below ``tail_target`` (default 1e-12
    of the analytic lower bound).
    """
    g_lo, g_hi = _magnitude_range(gamma_range)
    a, N = float(params.a), int(params.N)
    log_a = math.log(a)
    reach = gen.support_radius

    # λ_j <= a^{Nj+N-1}; the term vanishes once g_lo / λ_j leaves the support
    j_min = math.floor((math.log(g_lo / reach) / log_a - (N - 1)) / N)

    if tail_target is None:
        tail_target = DEFAULT_TAIL_REL * _reference_scale(gen, params)

    env = gen.envelope
    # from here on g_hi / a^{Nj} <= u_radius, where the envelope applies
    j_env = math.ceil(math.log(g_hi / env.u_radius) / (N * log_a)) - 1
    ratio = a ** (-2.0 * env.alpha * N)
    need = tail_target * (1.0 - ratio) * params.b / (env.D**2 * g_hi ** (2.0 * env.alpha))
    j_tail = math.ceil(math.log(need) / (-2.0 * env.alpha * N * log_a)) - 1 if need < 1 else j_env
    j_max = max(j_env, j_tail, j_min)
    tail = tail_bound_for(gen, params, g_hi, j_max)
    while tail > tail_target:
        j_max += 1
        tail = tail_bound_for(gen, params, g_hi, j_max)

    logger.debug(
        "truncation for |γ| in [%g, %g]: j in [%d, %d], tail %.3e", g_lo, g_hi, j_min, j_max, tail
    )
    return Truncation(j_min_eff=int(j_min), j_max_eff=int(j_max), tail_bound=float(tail))


def _squared_sum(gen: WaveletGenerator, gamma: np.ndarray, scales: np.ndarray) -> np.ndarray:
    out = np.empty(gamma.shape, dtype=float)
    for s in range(0, gamma.size, _CHUNK):
        g = gamma[s : s + _CHUNK]
        out[s : s + _CHUNK] = np.sum(eval_freq(gen, g[:, None] / scales[None, :]) ** 2, axis=1)
    return out


def _at_zero(gen: WaveletGenerator) -> float:
    return 0.0 if eval_freq(gen, 0.0) == 0.0 else math.inf


def multiplier(
    gen: WaveletGenerator,
    params: SystemParams,
    pattern: WeavingPattern,
    gamma,
    truncation: Optional[Truncation] = None,
):
    """m(γ) = (1/b) Σ_j |ψ̂(γ/λ_j)|² over the effective j-range; scalar or array γ."""
    params.require_painless(gen)
    g = np.atleast_1d(np.asarray(gamma, dtype=float))
    out = np.zeros(g.shape, dtype=float)
    nz = g != 0
    if np.any(~nz):
        out[~nz] = _at_zero(gen)
    if np.any(nz):
        mags = np.abs(g[nz])
        if truncation is None:
            truncation = truncation_level(gen, params, pattern, (float(mags.min()), float(mags.max())))
        js = np.arange(truncation.j_min_eff, truncation.j_max_eff + 1)
        out[nz] = _squared_sum(gen, g[nz], pattern.scales(params, js)) / params.b
    if np.ndim(gamma) == 0:
        return float(out[0])
    return out


def multiplier_from_scales(gen: WaveletGenerator, b: float, scales: Iterable[float], gamma):
    """(1/b) Σ |ψ̂(γ/λ)|² for an arbitrary finite list of positive scales."""
    lam = np.asarray(list(scales), dtype=float)
    if lam.size == 0 or np.any(lam <= 0) or not np.all(np.isfinite(lam)):
        raise InvalidArgumentError("scales must be a non-empty list of positive reals")
    if b * gen.support_length > 1.0 + 1e-12:
        raise PreconditionError(f"b = {b} exceeds 1/|I| = {1.0 / gen.support_length}")
    g = np.atleast_1d(np.asarray(gamma, dtype=float))
    out = _squared_sum(gen, g, lam) / b
    if np.ndim(gamma) == 0:
        return float(out[0])
    return out


def cross_term_sum(
    gen: WaveletGenerator,
    params: SystemParams,
    pattern: WeavingPattern,
    gamma,
    k_max: int,
):
    """Σ_{0<|k|≤k_max} Σ_j |ψ̂(γ/λ_j) ψ̂(γ/λ_j + k/b)|.

    The j-range is the pattern window joined with the effective range for γ.
    """
    if k_max < 1:
        raise InvalidArgumentError(f"k_max must be >= 1, got {k_max}")
    g = np.atleast_1d(np.asarray(gamma, dtype=float))
    lo_w, hi_w = pattern.window
    if not pattern.choices:
        lo_w, hi_w = 0, 0
    nz = np.abs(g[g != 0])
    if nz.size:
        tr = truncation_level(gen, params, pattern, (float(nz.min()), float(nz.max())))
        lo_w, hi_w = min(lo_w, tr.j_min_eff), max(hi_w, tr.j_max_eff)
    js = np.arange(lo_w, hi_w + 1)
    scales = pattern.scales(params, js)
    ks = np.concatenate([np.arange(-k_max, 0), np.arange(1, k_max + 1)]).astype(float)

    out = np.empty(g.shape, dtype=float)
    for i, gi in enumerate(g):
        u = gi / scales
        base = eval_freq(gen, u)
        if not np.any(base):
            out[i] = 0.0
            continue
        shifted = eval_freq(gen, u[:, None] + ks[None, :] / params.b)
        out[i] = float(np.sum(np.abs(base[:, None] * shifted)))
    if np.ndim(gamma) == 0:
        return float(out[0])
    return out


def _log_grid(lo: float, hi: float, points: int) -> np.ndarray:
    return np.exp(np.linspace(math.log(lo), math.log(hi), points))


def sweep_range(
    gen: WaveletGenerator,
    params: SystemParams,
    pattern: WeavingPattern,
    grid_points: int,
) -> Tuple[np.ndarray, bool]:
    """Positive-magnitude sweep grid and whether the pattern is periodic.

    Periodic patterns cover one multiplicative period [1, a^{NP}]; windowed
    patterns cover the window's dilation range plus one period on each side.
    """
    a, N = float(params.a), int(params.N)
    period = pattern.period
    if period is not None:
        return _log_grid(1.0, a ** (N * period), grid_points * period), True
    lo_w, hi_w = pattern.window
    reach = gen.support_radius
    periods = hi_w - lo_w + 3
    return _log_grid(reach * a ** (N * (lo_w - 1)), reach * a ** (N * (hi_w + 2)), grid_points * periods), False


def breakpoints(
    edges: Iterable[float],
    base: float,
    period: int,
    residues: Iterable[int],
    lo: float,
    hi: float,
) -> np.ndarray:
    """Points e·base^p inside [lo, hi] with p mod ``period`` in ``residues``.

    These are the magnitudes where one term of a dilation sum switches on or off.
    """
    log_base = math.log(base)
    keep = set(residues)
    pts = []
    for e in {abs(e) for e in edges if e != 0}:
        p_lo = math.floor(math.log(lo / e) / log_base)
        p_hi = math.ceil(math.log(hi / e) / log_base)
        for p in range(p_lo, p_hi + 1):
            if p % period not in keep:
                continue
            v = e * base ** float(p)
            if lo <= v <= hi:
                pts.append(v)
    return np.asarray(sorted(pts), dtype=float)


def refine_extreme(
    evaluate,
    grid: np.ndarray,
    values: np.ndarray,
    index: int,
    refine_points: int,
    want_min: bool,
    span: Optional[Tuple[float, float]] = None,
) -> Tuple[float, float]:
    """One local refinement pass between the neighbours of ``grid[index]``.

    ``span`` restricts refinement points to lo <= |x| <= hi.
    """
    left = grid[max(index - 1, 0)]
    right = grid[min(index + 1, grid.size - 1)]
    best_v, best_x = float(values[index]), float(grid[index])
    if right > left and refine_points > 0:
        xs = np.linspace(left, right, refine_points)
        if span is not None:
            mag = np.abs(xs)
            xs = xs[(mag >= span[0]) & (mag <= span[1])]
        if xs.size == 0:
            return best_v, best_x
        vs = evaluate(xs)
        k = int(np.argmin(vs) if want_min else np.argmax(vs))
        if (vs[k] < best_v) if want_min else (vs[k] > best_v):
            best_v, best_x = float(vs[k]), float(xs[k])
    return best_v, best_x


def full_grid(positive: np.ndarray, both_signs: bool) -> np.ndarray:
    if not both_signs:
        return positive
    return np.concatenate([-positive[::-1], positive])


def frame_bounds(
    gen: WaveletGenerator,
    params: SystemParams,
    pattern: WeavingPattern,
    grid_points: int = DEFAULT_GRID_POINTS,
    refine_points: int = DEFAULT_REFINE_POINTS,
) -> BoundsCertificate:
    """Numerical frame bounds A, B of {D_{λ_j} T_{kb} ψ} for the given pattern."""
    params.require_painless(gen)
    if grid_points < 16:
        raise InvalidArgumentError(f"grid_points must be >= 16, got {grid_points}")
    if pattern.N != params.N:
        raise InvalidArgumentError(f"pattern order N={pattern.N} does not match system N={params.N}")

    positive, periodic = sweep_range(gen, params, pattern, grid_points)
    lo, hi = float(positive[0]), float(positive[-1])
    edges = breakpoints(gen.support, params.a, params.N, pattern.distinct_choices(), lo, hi)
    positive = np.union1d(positive, edges)
    both = not gen.even
    gamma = full_grid(positive, both)

    trunc = truncation_level(gen, params, pattern, (lo, hi))

    def evaluate(xs: np.ndarray) -> np.ndarray:
        return multiplier(gen, params, pattern, xs, truncation=trunc)

    values = evaluate(gamma)
    i_min, i_max = int(np.argmin(values)), int(np.argmax(values))
    A, x_min = refine_extreme(evaluate, gamma, values, i_min, refine_points, want_min=True, span=(lo, hi))
    B, x_max = refine_extreme(evaluate, gamma, values, i_max, refine_points, want_min=False, span=(lo, hi))
    resolution = max(abs(float(values[i_min]) - A), abs(float(values[i_max]) - B))

    notes: List[str] = []
    if not both:
        notes.append("even generator: swept positive frequencies only")
    if not periodic:
        notes.append("windowed pattern: swept window range plus one period on each side")
    notes.append("A_num is a grid infimum; the essential infimum may be a one-sided limit that is not attained")

    cert = BoundsCertificate(
        A_num=A,
        B_num=B,
        tail_bound=trunc.tail_bound,
        grid=GridInfo(lo=lo, hi=hi, points=int(gamma.size), log_spaced=True, both_signs=both, refine_points=refine_points),
        certified=bool(A > trunc.tail_bound and math.isfinite(B)),
        resolution=resolution,
        argmin=x_min,
        argmax=x_max,
        pattern=pattern.as_dict(),
        notes=notes,
    )
    if validate_envelope(gen, 1024).passed:
        ab = _analytic(gen, params)
        cert.A_analytic, cert.B_analytic = ab.A_analytic, ab.B_analytic
        cert.J_const, cert.K_const = ab.J_const, ab.K_const
    else:
        cert.notes.append("envelope constants do not hold; analytic bounds omitted")

    if not cert.certified:
        logger.warning("system not certified: A_num=%.6g <= tail_bound=%.3g", A, trunc.tail_bound)
    logger.info("frame bounds A=%.12g B=%.12g over %d points", A, B, gamma.size)
    return cert


def multiplier_curve(
    gen: WaveletGenerator,
    params: SystemParams,
    pattern: WeavingPattern,
    grid_points: int,
) -> Tuple[np.ndarray, np.ndarray]:
    """(γ, m(γ)) with exactly ``grid_points`` rows, log-spaced over the full sweep range."""
    positive, _ = sweep_range(gen, params, pattern, grid_points)
    xs = _log_grid(float(positive[0]), float(positive[-1]), grid_points)
    return xs, multiplier(gen, params, pattern, xs)
