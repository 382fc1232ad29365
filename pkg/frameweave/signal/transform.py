"""Frequency-domain signals, analysis coefficients and painless reconstruction.

Signals live on a uniform γ-grid; every integral is a trapezoid sum on that grid.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Dict, Iterable, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np
from scipy.integrate import trapezoid

from ..errors import ConvergenceError, InvalidArgumentError, NotInvertibleError
from ..io.curves import read_curve, write_curve
from ..systems.frame_core import (
    DEFAULT_GRID_POINTS,
    DEFAULT_REFINE_POINTS,
    BoundsCertificate,
    SystemParams,
    WeavingPattern,
    frame_bounds,
    multiplier,
    truncation_level,
)
from ..systems.generators import WaveletGenerator, eval_freq
from ..systems.weaving import WeaveCertificate, weave_certificate

logger = logging.getLogger(__name__)

DEFAULT_SIGNAL_POINTS = 1 << 14
GRAM_ATOM_LIMIT = 4096
_STEP_RTOL = 1e-9


@dataclass(frozen=True)
class FreqSignal:
    """Samples f̂(γ) of a finite-energy signal on a uniform grid."""

    grid: np.ndarray
    values: np.ndarray

    def __post_init__(self) -> None:
        grid = np.asarray(self.grid, dtype=float)
        values = np.asarray(self.values, dtype=complex)
        if grid.ndim != 1 or grid.size < 2:
            raise InvalidArgumentError("signal grid must be 1-D with at least 2 points")
        if values.shape != grid.shape:
            raise InvalidArgumentError(f"values shape {values.shape} does not match grid {grid.shape}")
        steps = np.diff(grid)
        step = float(steps.mean())
        if step <= 0 or not np.allclose(steps, step, rtol=_STEP_RTOL, atol=0.0):
            raise InvalidArgumentError("signal grid must be uniform and increasing")
        if not np.all(np.isfinite(values)):
            raise InvalidArgumentError("signal values must be finite")
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "values", values)

    @property
    def step(self) -> float:
        return float(self.grid[1] - self.grid[0])

    @property
    def energy(self) -> float:
        return float(trapezoid(np.abs(self.values) ** 2, dx=self.step))

    @property
    def norm(self) -> float:
        return math.sqrt(self.energy)

    def support(self) -> np.ndarray:
        return self.values != 0

    def like(self, values: np.ndarray) -> "FreqSignal":
        return FreqSignal(self.grid, values)

    def to_csv(self, path: Path) -> int:
        return write_curve(path, ["gamma", "re", "im"], [self.grid, self.values.real, self.values.imag])

    @classmethod
    def from_csv(cls, path: Path) -> "FreqSignal":
        header, data = read_curve(path)
        if data.shape[1] not in (2, 3):
            raise InvalidArgumentError(f"{path}: expected columns gamma,re[,im], got {header}")
        values = data[:, 1] + (1j * data[:, 2] if data.shape[1] == 3 else 0.0)
        return cls(data[:, 0], values)


def uniform_grid(lo: float, hi: float, points: int = DEFAULT_SIGNAL_POINTS) -> np.ndarray:
    if not hi > lo or points < 2:
        raise InvalidArgumentError(f"bad grid [{lo}, {hi}] with {points} points")
    return np.linspace(lo, hi, points)


def default_grid(params: SystemParams, band_hi: float, points: int = DEFAULT_SIGNAL_POINTS) -> np.ndarray:
    """Symmetric grid [−a^{N·J}, a^{N·J}] with J the least integer such that a^{N·J} >= band_hi."""
    if band_hi <= 0:
        raise InvalidArgumentError(f"band_hi must be positive, got {band_hi}")
    J = math.ceil(math.log(band_hi) / (params.N * math.log(params.a)) - 1e-12)
    edge = float(params.a) ** (params.N * J)
    return uniform_grid(-edge, edge, points)


@dataclass(frozen=True)
class BumpSignal:
    """Σ c_i φ((γ − μ_i)/w_i) with φ the standard C^∞ bump on (−1, 1)."""

    centers: Tuple[float, ...]
    widths: Tuple[float, ...]
    coeffs: Tuple[complex, ...]

    def __call__(self, gamma) -> np.ndarray:
        g = np.asarray(gamma, dtype=float)
        out = np.zeros(g.shape, dtype=complex)
        for mu, w, c in zip(self.centers, self.widths, self.coeffs):
            x = (g - mu) / w
            inside = np.abs(x) < 1
            out[inside] += c * np.exp(-1.0 / (1.0 - x[inside] ** 2))
        return out

    def sample(self, grid: np.ndarray) -> FreqSignal:
        return FreqSignal(grid, self(grid))

    @property
    def band(self) -> Tuple[float, float]:
        lo = min(m - w for m, w in zip(self.centers, self.widths))
        hi = max(m + w for m, w in zip(self.centers, self.widths))
        return lo, hi


def random_band_limited(
    rng: np.random.Generator,
    band: Tuple[float, float],
    count: int = 6,
    both_signs: bool = False,
) -> BumpSignal:
    """Random smooth f̂ supported inside ``band`` (mirrored to −band when ``both_signs``)."""
    lo, hi = float(band[0]), float(band[1])
    if not 0 < lo < hi:
        raise InvalidArgumentError(f"band must satisfy 0 < lo < hi, got {band}")
    if count < 1:
        raise InvalidArgumentError(f"count must be >= 1, got {count}")
    span = hi - lo
    widths = rng.uniform(0.05, 0.25, size=count) * span
    centers = lo + widths + rng.uniform(0.0, 1.0, size=count) * (span - 2 * widths)
    coeffs = rng.normal(size=count) + 1j * rng.normal(size=count)
    if both_signs:
        signs = rng.choice([-1.0, 1.0], size=count)
        centers = centers * signs
    return BumpSignal(
        centers=tuple(float(c) for c in centers),
        widths=tuple(float(w) for w in widths),
        coeffs=tuple(complex(c) for c in coeffs),
    )


def atom_spectrum(
    gen: WaveletGenerator,
    params: SystemParams,
    pattern: WeavingPattern,
    grid: np.ndarray,
    j: int,
    k: int,
) -> FreqSignal:
    """Fourier transform of D_λ T_{kb} ψ: λ^{-1/2} ψ̂(γ/λ) e^{−2πi k b γ/λ}."""
    lam = float(pattern.scales(params, np.array([j]))[0])
    g = np.asarray(grid, dtype=float)
    phase = np.exp(-2j * math.pi * k * params.b * g / lam)
    return FreqSignal(g, eval_freq(gen, g / lam) * phase / math.sqrt(lam))


def atom_spectra(
    gen: WaveletGenerator,
    params: SystemParams,
    pattern: WeavingPattern,
    grid: np.ndarray,
    j_range: Tuple[int, int],
    k_range: Tuple[int, int],
) -> List[FreqSignal]:
    return [
        atom_spectrum(gen, params, pattern, grid, j, k)
        for j in range(j_range[0], j_range[1] + 1)
        for k in range(k_range[0], k_range[1] + 1)
    ]


@dataclass
class CoefficientTable:
    j_values: np.ndarray
    k_values: np.ndarray
    scales: np.ndarray
    coeffs: np.ndarray
    warnings: List[str] = field(default_factory=list)

    def energy(self) -> float:
        return float(np.sum(np.abs(self.coeffs) ** 2))

    def entry(self, j: int, k: int) -> complex:
        return complex(self.coeffs[int(j - self.j_values[0]), int(k - self.k_values[0])])

    def as_dict(self) -> Dict[str, Any]:
        return {
            "j_range": [int(self.j_values[0]), int(self.j_values[-1])],
            "k_range": [int(self.k_values[0]), int(self.k_values[-1])],
            "energy": self.energy(),
            "max_abs": float(np.max(np.abs(self.coeffs))) if self.coeffs.size else 0.0,
            "warnings": list(self.warnings),
        }


def analysis(
    gen: WaveletGenerator,
    params: SystemParams,
    pattern: WeavingPattern,
    f: FreqSignal,
    j_range: Tuple[int, int],
    k_range: Tuple[int, int],
) -> CoefficientTable:
    """c_{j,k} = ⟨f, D_{λ_j} T_{kb} ψ⟩ evaluated as ∫ f̂ · conj(atom spectrum) dγ."""
    params.require_painless(gen)
    j0, j1 = int(j_range[0]), int(j_range[1])
    k0, k1 = int(k_range[0]), int(k_range[1])
    if j1 < j0 or k1 < k0:
        raise InvalidArgumentError(f"empty index ranges j={j_range} k={k_range}")

    js = np.arange(j0, j1 + 1)
    ks = np.arange(k0, k1 + 1)
    scales = pattern.scales(params, js)
    coeffs = np.zeros((js.size, ks.size), dtype=complex)
    warnings: List[str] = []
    g = f.grid
    s_lo, s_hi = gen.support

    for row, (j, lam) in enumerate(zip(js, scales)):
        if lam * s_lo < g[0] or lam * s_hi > g[-1]:
            warnings.append(f"atom j={int(j)} covers [{lam * s_lo:g}, {lam * s_hi:g}] beyond the signal grid")
        weight = f.values * eval_freq(gen, g / lam) / math.sqrt(lam)
        nz = np.flatnonzero(weight)
        if nz.size == 0:
            continue
        # integrand vanishes outside [nz[0], nz[-1]], so the trapezoid sum can be restricted
        sl = slice(max(nz[0] - 1, 0), min(nz[-1] + 2, g.size))
        phase = np.exp(2j * math.pi * params.b * np.outer(ks, g[sl]) / lam)
        coeffs[row] = trapezoid(weight[sl][None, :] * phase, dx=f.step, axis=1)

    if warnings:
        logger.warning("analysis: %d atom(s) extend beyond the signal grid", len(warnings))
    return CoefficientTable(j_values=js, k_values=ks, scales=scales, coeffs=coeffs, warnings=warnings)


class Reconstruction(NamedTuple):
    signal: FreqSignal
    relative_error: float


def reconstruct_painless(
    gen: WaveletGenerator,
    params: SystemParams,
    pattern: WeavingPattern,
    f: FreqSignal,
) -> Reconstruction:
    """Apply S (multiplication by m) and invert it pointwise on supp f̂."""
    params.require_painless(gen)
    supp = f.support()
    out = np.zeros_like(f.values)
    if not np.any(supp):
        return Reconstruction(f.like(out), 0.0)
    if np.any(supp & (f.grid == 0)):
        raise NotInvertibleError("signal has mass at γ = 0, where the multiplier vanishes")

    mags = np.abs(f.grid[supp])
    tr = truncation_level(gen, params, pattern, (float(mags.min()), float(mags.max())))
    m = multiplier(gen, params, pattern, f.grid[supp], truncation=tr)
    if float(m.min()) <= tr.tail_bound:
        worst = float(f.grid[supp][int(np.argmin(m))])
        raise NotInvertibleError(
            f"multiplier {float(m.min()):.3e} does not exceed the truncation tail "
            f"{tr.tail_bound:.3e} at γ = {worst:g}"
        )
    Sf = m * f.values[supp]
    out[supp] = Sf / m
    rec = f.like(out)
    err = f.like(out - f.values).norm / f.norm
    return Reconstruction(rec, float(err))


def apply_frame_operator(
    gen: WaveletGenerator,
    params: SystemParams,
    pattern: WeavingPattern,
    grid: np.ndarray,
) -> Callable[[FreqSignal], FreqSignal]:
    nz = np.abs(np.asarray(grid, dtype=float))
    nz = nz[nz > 0]
    tr = truncation_level(gen, params, pattern, (float(nz.min()), float(nz.max())))
    m = multiplier(gen, params, pattern, np.where(grid == 0, 1.0, grid), truncation=tr)
    m = np.where(np.asarray(grid) == 0, 0.0, m)

    def apply(h: FreqSignal) -> FreqSignal:
        return h.like(m * h.values)

    return apply


def frame_iteration(
    apply_S: Callable[[FreqSignal], FreqSignal],
    f: FreqSignal,
    A: float,
    B: float,
    tol: float = 1e-8,
    max_iter: int = 100,
    history: Optional[List[float]] = None,
) -> Tuple[FreqSignal, int]:
    """Solve S h = f by h ← h + 2/(A+B) (f − S h); returns (h, iterations).

    Relative residuals are appended to ``history`` when a list is given.
    """
    if not (0 < A <= B) or not math.isfinite(B):
        raise InvalidArgumentError(f"need 0 < A <= B < inf, got A={A}, B={B}")
    if max_iter < 1:
        raise InvalidArgumentError(f"max_iter must be >= 1, got {max_iter}")
    f_norm = float(np.linalg.norm(f.values))
    h = f.like(np.zeros_like(f.values))
    if f_norm == 0:
        return h, 0
    relax = 2.0 / (A + B)
    residuals: List[float] = history if history is not None else []
    for it in range(max_iter + 1):
        r = f.values - apply_S(h).values
        rel = float(np.linalg.norm(r)) / f_norm
        residuals.append(rel)
        if rel <= tol:
            logger.debug("frame iteration converged after %d steps (residual %.3e)", it, rel)
            return h, it
        if it == max_iter:
            break
        h = h.like(h.values + relax * r)
    raise ConvergenceError(
        f"frame iteration did not reach tol={tol} in {max_iter} steps (last residual {residuals[-1]:.3e})",
        residuals=residuals,
        last_iterate=h,
    )


class GramEstimate(NamedTuple):
    lambda_min: float
    lambda_max: float
    iterations: int


def gram_matrix(atoms: Sequence[FreqSignal]) -> np.ndarray:
    grid = atoms[0].grid
    for at in atoms[1:]:
        if at.grid.shape != grid.shape or not np.array_equal(at.grid, grid):
            raise InvalidArgumentError("all atoms must share one grid")
    Phi = np.column_stack([at.values for at in atoms])
    w = np.full(grid.size, atoms[0].step)
    w[0] *= 0.5
    w[-1] *= 0.5
    G = (Phi.conj().T * w) @ Phi
    return 0.5 * (G + G.conj().T)


def _power(M: np.ndarray, v: np.ndarray, tol: float, max_iter: int, label: str) -> Tuple[float, int]:
    lam = 0.0
    for it in range(1, max_iter + 1):
        w = M @ v
        nrm = float(np.linalg.norm(w))
        if nrm == 0.0:
            return 0.0, it
        lam_new = float(np.real(np.vdot(v, w)))
        v = w / nrm
        if it > 1 and abs(lam_new - lam) <= tol * max(1.0, abs(lam_new)):
            return lam_new, it
        lam = lam_new
    raise ConvergenceError(f"{label} power iteration did not converge in {max_iter} steps", last_iterate=v)


def gram_oracle(
    atoms: Sequence[FreqSignal],
    tol: float = 1e-8,
    max_iter: int = 20000,
    seed: int = 0,
) -> GramEstimate:
    """Extreme eigenvalues of the Gram matrix of a finite atom family.

    λ_max by power iteration, λ_min by power iteration on λ_max·I − G.
    """
    n = len(atoms)
    if n == 0:
        raise InvalidArgumentError("need at least one atom")
    if n > GRAM_ATOM_LIMIT:
        raise InvalidArgumentError(f"{n} atoms exceed the Gram limit of {GRAM_ATOM_LIMIT}")
    G = gram_matrix(atoms)
    rng = np.random.default_rng(seed)
    v0 = rng.normal(size=n) + 1j * rng.normal(size=n)
    v0 /= np.linalg.norm(v0)

    lam_max, it1 = _power(G, v0, tol, max_iter, "largest-eigenvalue")
    shifted = lam_max * np.eye(n) - G
    mu, it2 = _power(shifted, v0, tol, max_iter, "shifted")
    lam_min = max(lam_max - mu, 0.0)
    logger.debug("gram oracle on %d atoms: [%.6g, %.6g] in %d+%d steps", n, lam_min, lam_max, it1, it2)
    return GramEstimate(lam_min, lam_max, it1 + it2)


@dataclass
class ErasureReport:
    erased: List[int]
    pattern: WeavingPattern
    relative_error: float
    base_relative_error: float
    bounds: BoundsCertificate
    weave: WeaveCertificate

    @property
    def within_certificate(self) -> bool:
        tol = max(self.bounds.resolution or 0.0, self.weave.resolution or 0.0, 1e-9)
        return self.bounds.A_num >= self.weave.L_weave - tol and self.bounds.B_num <= self.weave.U_weave + tol

    def as_dict(self) -> Dict[str, Any]:
        return {
            "erased": list(self.erased),
            "pattern": self.pattern.as_dict(),
            "relative_error": self.relative_error,
            "base_relative_error": self.base_relative_error,
            "bounds": self.bounds.as_dict(),
            "weave": self.weave.as_dict(),
            "within_certificate": self.within_certificate,
        }


def erasure_pattern(N: int, erased: Iterable[int], fallback: WeavingPattern) -> WeavingPattern:
    """ℓ_j = fallback's choice on erased scales, 0 elsewhere."""
    erased = sorted({int(j) for j in erased})
    if not erased:
        return WeavingPattern.constant(N)
    lo, hi = erased[0], erased[-1]
    choices = []
    for j in range(lo, hi + 1):
        if j in erased:
            ell = fallback.choice(j)
            if ell == 0:
                raise InvalidArgumentError(f"fallback pattern picks family 0 at erased scale j={j}")
            choices.append(ell)
        else:
            choices.append(0)
    return WeavingPattern.explicit(N, lo, choices, "constant")


def erasure_experiment(
    gen: WaveletGenerator,
    params: SystemParams,
    f: FreqSignal,
    erased: Iterable[int],
    fallback: WeavingPattern,
    grid_points: int = DEFAULT_GRID_POINTS,
    refine_points: int = DEFAULT_REFINE_POINTS,
    certificate: Optional[WeaveCertificate] = None,
) -> ErasureReport:
    """Drop family 0 on the erased scales, substitute the fallback family, reconstruct."""
    if fallback.N != params.N:
        raise InvalidArgumentError(f"fallback pattern has N={fallback.N}, system has N={params.N}")
    erased_list = sorted({int(j) for j in erased})
    mixed = erasure_pattern(params.N, erased_list, fallback)
    base = reconstruct_painless(gen, params, WeavingPattern.constant(params.N), f)
    rec = reconstruct_painless(gen, params, mixed, f)
    bounds = frame_bounds(gen, params, mixed, grid_points, refine_points)
    if certificate is None:
        certificate = weave_certificate(gen, params, grid_points, refine_points)
    report = ErasureReport(
        erased=erased_list,
        pattern=mixed,
        relative_error=rec.relative_error,
        base_relative_error=base.relative_error,
        bounds=bounds,
        weave=certificate,
    )
    logger.info(
        "erasure of %d scale(s): rel err %.3e, bounds [%.6g, %.6g]",
        len(erased_list),
        rec.relative_error,
        bounds.A_num,
        bounds.B_num,
    )
    return report
