"""Finite-dimensional laboratory for fusion frames and information packets.

A packet is a list of subspaces W_j of ℝ^M (or ℂ^M), each given by spanning
vectors (rows). Finite dimensions cannot show unconditional convergence; the
proxy used throughout is the existence of an expansion with a tiny residual.
"""
from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy import linalg

from ..errors import InvalidArgumentError, NotAFusionFrameError, NotAnInformationPacketError

logger = logging.getLogger(__name__)

RANK_TOL = 1e-12
DENSE_LIMIT = 512
COND_LIMIT = 1e12
WEAVE_BUDGET = 1 << 16


def orthonormal_basis(vectors: np.ndarray, tol: float = RANK_TOL) -> np.ndarray:
    """Columns spanning the row space of ``vectors`` (rank-revealing pivoted QR)."""
    V = np.atleast_2d(np.asarray(vectors))
    q, r, _ = linalg.qr(V.T, mode="economic", pivoting=True)
    diag = np.abs(np.diag(r))
    if diag.size == 0 or diag[0] == 0:
        return q[:, :0]
    rank = int(np.sum(diag > tol * diag[0]))
    return q[:, :rank]


def projection(vectors: np.ndarray) -> np.ndarray:
    Q = orthonormal_basis(vectors)
    return Q @ Q.conj().T


@dataclass(frozen=True)
class FinitePacket:
    ambient_dim: int
    subspaces: Tuple[np.ndarray, ...]
    weights: Optional[Tuple[float, ...]] = None

    def __post_init__(self) -> None:
        if self.ambient_dim < 1:
            raise InvalidArgumentError(f"ambient dimension must be >= 1, got {self.ambient_dim}")
        subs = []
        for j, s in enumerate(self.subspaces):
            arr = np.atleast_2d(np.asarray(s))
            if arr.size == 0:
                raise InvalidArgumentError(f"subspace {j} has an empty spanning list")
            if arr.shape[1] != self.ambient_dim:
                raise InvalidArgumentError(
                    f"subspace {j} vectors have length {arr.shape[1]}, ambient dimension is {self.ambient_dim}"
                )
            subs.append(arr)
        object.__setattr__(self, "subspaces", tuple(subs))
        if self.weights is not None:
            if len(self.weights) != len(subs):
                raise InvalidArgumentError(f"{len(self.weights)} weights for {len(subs)} subspaces")
            if any(not w > 0 for w in self.weights):
                raise InvalidArgumentError("weights must be strictly positive")
            object.__setattr__(self, "weights", tuple(float(w) for w in self.weights))

    def __len__(self) -> int:
        return len(self.subspaces)

    def with_weights(self, weights: Sequence[float]) -> "FinitePacket":
        return FinitePacket(self.ambient_dim, self.subspaces, tuple(weights))

    def bases(self) -> List[np.ndarray]:
        return [orthonormal_basis(s) for s in self.subspaces]

    def projections(self) -> List[np.ndarray]:
        return [Q @ Q.conj().T for Q in self.bases()]

    def dtype(self):
        return np.result_type(*self.subspaces)

    def as_dict(self) -> Dict[str, Any]:
        return {
            "ambient_dim": self.ambient_dim,
            "subspaces": len(self.subspaces),
            "dims": [int(Q.shape[1]) for Q in self.bases()],
            "weights": list(self.weights) if self.weights is not None else None,
        }


@dataclass
class ExpansionResult:
    components: List[np.ndarray]
    residual_norm: float

    def total(self) -> np.ndarray:
        return np.sum(self.components, axis=0)


@dataclass(frozen=True)
class FusionBounds:
    A_est: float
    B_est: float
    method: str
    trials: int

    def __iter__(self):
        return iter((self.A_est, self.B_est))


def onb_packet(M: int, weights: bool = True) -> FinitePacket:
    eye = np.eye(M)
    return FinitePacket(M, tuple(eye[j : j + 1] for j in range(M)), (1.0,) * M if weights else None)


def counterexample_packet(M: int, weights: bool = True) -> FinitePacket:
    """W_j = span{e_1, e_j}, j = 1..M (W_1 = span{e_1})."""
    if M < 2:
        raise InvalidArgumentError(f"M must be >= 2, got {M}")
    eye = np.eye(M)
    subs = tuple(np.vstack([eye[0], eye[j]]) for j in range(M))
    return FinitePacket(M, subs, (1.0,) * M if weights else None)


def random_packet(
    rng: np.random.Generator,
    ambient_dim: int,
    count: int,
    max_dim: Optional[int] = None,
    weights: bool = True,
) -> FinitePacket:
    """Random subspaces whose dimensions add up to at least ``ambient_dim``."""
    max_dim = max_dim or ambient_dim
    dims = rng.integers(1, max_dim + 1, size=count)
    while dims.sum() < ambient_dim:
        dims[rng.integers(0, count)] += 1
    dims = np.minimum(dims, ambient_dim)
    subs = tuple(rng.standard_normal((int(d), ambient_dim)) for d in dims)
    w = tuple(float(x) for x in rng.uniform(0.5, 2.0, size=count)) if weights else None
    return FinitePacket(ambient_dim, subs, w)


def fusion_operator(packet: FinitePacket) -> np.ndarray:
    if packet.weights is None:
        raise InvalidArgumentError("fusion frame operations need weights")
    S = np.zeros((packet.ambient_dim, packet.ambient_dim), dtype=packet.dtype())
    for w, P in zip(packet.weights, packet.projections()):
        S += w**2 * P
    return S


def fusion_bounds(packet: FinitePacket, trials: int = 1000, seed: int = 0) -> FusionBounds:
    """Extreme eigenvalues of S = Σ ω_j² P_j.

    Dense eigensolve up to dimension 512; above that, Rayleigh quotients of
    ``trials`` random vectors give inner estimates.
    """
    if packet.weights is None:
        raise InvalidArgumentError("fusion_bounds needs weights")
    M = packet.ambient_dim
    if M <= DENSE_LIMIT:
        evals = linalg.eigvalsh(fusion_operator(packet))
        return FusionBounds(float(evals[0]), float(evals[-1]), "dense", 0)

    if trials < 1:
        raise InvalidArgumentError(f"trials must be >= 1, got {trials}")
    rng = np.random.default_rng(seed)
    bases = packet.bases()
    lo, hi = np.inf, -np.inf
    for _ in range(trials):
        f = rng.standard_normal(M)
        f /= np.linalg.norm(f)
        q = sum(w**2 * float(np.linalg.norm(Q.conj().T @ f) ** 2) for w, Q in zip(packet.weights, bases))
        lo, hi = min(lo, q), max(hi, q)
    logger.info("Rayleigh estimate over %d trials in dimension %d", trials, M)
    return FusionBounds(float(lo), float(hi), "rayleigh", trials)


def fusion_decompose(packet: FinitePacket, f: np.ndarray) -> ExpansionResult:
    """f_j = ω_j² S⁻¹ P_j f, the fusion frame decomposition."""
    f = np.asarray(f)
    S = fusion_operator(packet)
    evals = linalg.eigvalsh(S)
    if evals[0] <= RANK_TOL * max(evals[-1], 1.0):
        raise NotAFusionFrameError(f"fusion frame operator is singular (smallest eigenvalue {evals[0]:.3e})")
    comps = []
    for w, P in zip(packet.weights, packet.projections()):
        comps.append(w**2 * linalg.solve(S, P @ f, assume_a="her"))
    residual = float(np.linalg.norm(f - np.sum(comps, axis=0)))
    return ExpansionResult(components=comps, residual_norm=residual)


def packet_from_frame(frame_vectors, cover: Sequence[Sequence[int]]) -> FinitePacket:
    """W_j = span{f_k : k ∈ σ_j}; the σ_j may overlap but must cover every index."""
    F = np.atleast_2d(np.asarray(frame_vectors))
    K = F.shape[0]
    used = set()
    for sigma in cover:
        for k in sigma:
            if not 0 <= int(k) < K:
                raise InvalidArgumentError(f"index {k} outside the frame's index set 0..{K - 1}")
            used.add(int(k))
    missing = sorted(set(range(K)) - used)
    if missing:
        raise InvalidArgumentError(f"cover misses frame indices {missing}")
    subs = tuple(F[sorted({int(k) for k in sigma})] for sigma in cover if len(sigma))
    return FinitePacket(F.shape[1], subs)


def map_packet(packet: FinitePacket, T) -> FinitePacket:
    """Subspaces T(W_j) for an invertible T."""
    T = np.asarray(T)
    if T.shape != (packet.ambient_dim, packet.ambient_dim):
        raise InvalidArgumentError(f"T must be {packet.ambient_dim}x{packet.ambient_dim}, got {T.shape}")
    cond = np.linalg.cond(T)
    if not np.isfinite(cond) or cond > COND_LIMIT:
        raise InvalidArgumentError(f"T is numerically singular (condition {cond:.3e})")
    return FinitePacket(packet.ambient_dim, tuple(s @ T.T for s in packet.subspaces), packet.weights)


def _contained(inner: np.ndarray, outer: np.ndarray, tol: float = 1e-10) -> bool:
    Q = orthonormal_basis(outer)
    resid = inner.T - Q @ (Q.conj().T @ inner.T)
    scale = max(float(np.linalg.norm(inner)), 1.0)
    return float(np.linalg.norm(resid)) <= tol * scale


def enlarge_packet(packet: FinitePacket, supersets: Sequence) -> FinitePacket:
    """Replace each W_j by U_j ⊇ W_j."""
    if len(supersets) != len(packet):
        raise InvalidArgumentError(f"{len(supersets)} supersets for {len(packet)} subspaces")
    subs = []
    for j, (w, u) in enumerate(zip(packet.subspaces, supersets)):
        u = np.atleast_2d(np.asarray(u))
        if u.shape[1] != packet.ambient_dim:
            raise InvalidArgumentError(f"superset {j} has the wrong vector length {u.shape[1]}")
        if not _contained(w, u):
            raise InvalidArgumentError(f"W_{j} is not contained in the proposed U_{j}")
        subs.append(u)
    return FinitePacket(packet.ambient_dim, tuple(subs), packet.weights)


def expand_in_packet(packet: FinitePacket, f) -> ExpansionResult:
    """f = Σ f_j with f_j ∈ W_j, from the minimal-norm coefficients of the stacked system."""
    f = np.asarray(f)
    Phi = np.vstack(packet.subspaces).T
    s = linalg.svdvals(Phi)
    rank = int(np.sum(s > RANK_TOL * s[0])) if s.size and s[0] > 0 else 0
    if rank < packet.ambient_dim:
        raise NotAnInformationPacketError(
            f"subspaces span a {rank}-dimensional space inside dimension {packet.ambient_dim}"
        )
    coeffs, *_ = linalg.lstsq(Phi, f)
    comps = []
    start = 0
    for sub in packet.subspaces:
        stop = start + sub.shape[0]
        comps.append(sub.T @ coeffs[start:stop])
        start = stop
    residual = float(np.linalg.norm(f - np.sum(comps, axis=0)))
    return ExpansionResult(components=comps, residual_norm=residual)


def counterexample_growth(M: int) -> Tuple[float, float, float]:
    """(Σ_j ‖P_j e_1‖², Σ_j ‖P_j e_k‖² for k ≥ 2, their ratio) with unit weights."""
    if int(M) != M or M < 2:
        raise InvalidArgumentError(f"M must be an integer >= 2, got {M}")
    packet = counterexample_packet(int(M))
    projs = packet.projections()
    e1 = np.zeros(M)
    e1[0] = 1.0
    ek = np.zeros(M)
    ek[1] = 1.0
    at_e1 = float(sum(np.linalg.norm(P @ e1) ** 2 for P in projs))
    at_ek = float(sum(np.linalg.norm(P @ ek) ** 2 for P in projs))
    return at_e1, at_ek, at_e1 / at_ek


def frame_bounds_of(vectors: np.ndarray) -> Tuple[float, float]:
    """Optimal frame bounds of a finite family (rows) for its ambient space."""
    V = np.atleast_2d(np.asarray(vectors))
    evals = linalg.eigvalsh(V.T @ V.conj())
    return float(evals[0]), float(evals[-1])


@dataclass
class WovenFramesReport:
    frames: int
    selections: int
    worst_lower: float
    worst_upper: float
    worst_selection: Tuple[int, ...]

    @property
    def woven(self) -> bool:
        return self.worst_lower > RANK_TOL

    def as_dict(self) -> Dict[str, Any]:
        out = dict(vars(self))
        out["worst_selection"] = list(self.worst_selection)
        out["woven"] = self.woven
        return out


def woven_frames_bounds(frames: Sequence) -> WovenFramesReport:
    """Check every mixed selection {f^{(σ_k)}_k}_k of N finite frames with a common index set."""
    arrs = [np.atleast_2d(np.asarray(F)) for F in frames]
    if not arrs:
        raise InvalidArgumentError("need at least one frame")
    shape = arrs[0].shape
    if any(F.shape != shape for F in arrs):
        raise InvalidArgumentError("frames must share the index set and ambient dimension")
    K, N = shape[0], len(arrs)
    total = N**K
    if total > WEAVE_BUDGET:
        raise InvalidArgumentError(f"{N}^{K} = {total} selections exceed the budget of {WEAVE_BUDGET}")
    stack = np.stack(arrs)  # N x K x M
    worst_lo, worst_hi, worst_sel = np.inf, -np.inf, ()
    rows = np.arange(K)
    for sel in itertools.product(range(N), repeat=K):
        lo, hi = frame_bounds_of(stack[list(sel), rows])
        if lo < worst_lo:
            worst_lo, worst_sel = lo, sel
        worst_hi = max(worst_hi, hi)
    return WovenFramesReport(
        frames=N,
        selections=total,
        worst_lower=worst_lo,
        worst_upper=worst_hi,
        worst_selection=tuple(int(s) for s in worst_sel),
    )
