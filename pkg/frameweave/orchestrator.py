# frameweave/orchestrator.py
from __future__ import annotations

import datetime as _dt
import logging
import math
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

from . import __version__
from .config import (
    RunConfig,
    build_gabor,
    build_params,
    build_pattern,
    build_wavelet,
    float_pair,
    int_list,
    int_pair,
)
from .errors import ConfigError, NotAFusionFrameError, NotAnInformationPacketError, PreconditionError
from .io.curves import write_curve
from .io.jsonio import emit_report
from .io.matrix_text import load_packet
from .lab.packets import (
    counterexample_growth,
    expand_in_packet,
    fusion_bounds,
    fusion_decompose,
    random_packet,
)
from .runtime.env import detect_env
from .signal.transform import (
    DEFAULT_SIGNAL_POINTS,
    apply_frame_operator,
    default_grid,
    erasure_experiment,
    frame_iteration,
    random_band_limited,
    reconstruct_painless,
)
from .systems.frame_core import SystemParams, WeavingPattern, analytic_bounds, frame_bounds, multiplier_curve
from .systems.gabor import (
    density_gate,
    gabor_frame_bounds,
    gabor_weave_certificate,
    max_weaving_order,
    time_multiplier,
    verify_cover,
)
from .systems.generators import describe_generator
from .systems.weaving import enumerate_patterns, sample_patterns, weave_certificate

logger = logging.getLogger(__name__)

STATUS_OK = 0
STATUS_ERROR = 1
STATUS_NOT_CERTIFIED = 2

ROUND_TRIP_TOL = 1e-10
ORDER_TOL = 1e-9


def _now_iso() -> str:
    return _dt.datetime.now(_dt.timezone.utc).isoformat().replace("+00:00", "Z")


@dataclass
class RunOutcome:
    status: int
    summary: str
    report: Dict[str, Any]
    files: List[Path] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.status == STATUS_OK


@dataclass
class _Result:
    certified: bool
    summary: str
    fields: Dict[str, Any]
    curves: Dict[str, Tuple[List[str], List[np.ndarray]]] = field(default_factory=dict)


def _ordering_chain(values: List[Optional[float]]) -> bool:
    chain = [v for v in values if v is not None and math.isfinite(v)]
    return all(lo <= hi + ORDER_TOL for lo, hi in zip(chain, chain[1:]))


def _run_bounds(cfg: RunConfig) -> _Result:
    gen, params = build_wavelet(cfg), build_params(cfg)
    pattern = build_pattern(cfg, params.N)
    cert = frame_bounds(gen, params, pattern, cfg.grid_points, cfg.refine_points)
    if params.N > 1:
        weave = weave_certificate(gen, params, cfg.grid_points, cfg.refine_points)
        cert.L_weave, cert.U_weave = weave.L_weave, weave.U_weave
    chain = [cert.A_analytic, cert.L_weave, cert.A_num, cert.B_num, cert.U_weave, cert.B_analytic]
    fields = {
        "generator": describe_generator(gen),
        "params": params.as_dict(),
        "certificate": cert,
        "ordering_ok": _ordering_chain(chain),
    }
    curves = {}
    if cfg.write_curves:
        xs, m = multiplier_curve(gen, params, pattern, cfg.grid_points)
        curves["multiplier.csv"] = (["gamma", "m"], [xs, m])
    return _Result(cert.certified, f"A={cert.A_num:.12g} B={cert.B_num:.12g}", fields, curves)


def _run_weave_certify(cfg: RunConfig) -> _Result:
    gen, params = build_wavelet(cfg), build_params(cfg)
    cert = weave_certificate(gen, params, cfg.grid_points, cfg.refine_points)
    base = frame_bounds(gen, params, WeavingPattern.constant(params.N), cfg.grid_points, cfg.refine_points)
    try:
        analytic: Optional[Dict[str, Any]] = analytic_bounds(gen, params)._asdict()
    except PreconditionError as e:
        logger.info("analytic bounds unavailable: %s", e)
        analytic = None
    chain = [
        analytic["A_analytic"] if analytic else None,
        cert.L_weave,
        base.A_num,
        base.B_num,
        cert.U_weave,
        analytic["B_analytic"] if analytic else None,
    ]
    fields = {
        "generator": describe_generator(gen),
        "params": params.as_dict(),
        "certificate": cert,
        "base_family": {"A_num": base.A_num, "B_num": base.B_num},
        "analytic": analytic,
        "ordering_ok": _ordering_chain(chain),
    }
    return _Result(cert.certified, f"L={cert.L_weave:.12g} U={cert.U_weave:.12g}", fields)


def _run_weave_sample(cfg: RunConfig) -> _Result:
    gen, params = build_wavelet(cfg), build_params(cfg)
    count = cfg.get("numeric", "samples", int, 100)
    window = int_pair(cfg, "numeric", "window", (-5, 4))
    cert = weave_certificate(gen, params, cfg.grid_points, cfg.refine_points)
    report = sample_patterns(
        gen, params, count, cfg.seed, window, cfg.grid_points, cfg.refine_points, cfg.tol, cfg.threads, cert
    )
    ok = cert.certified and report.all_within
    summary = f"{count} patterns, min A={report.min_A:.6g} max B={report.max_B:.6g}, violations={len(report.violations)}"
    return _Result(ok, summary, {"certificate": cert, "sampling": report, "params": params.as_dict()})


def _run_weave_enumerate(cfg: RunConfig) -> _Result:
    gen, params = build_wavelet(cfg), build_params(cfg)
    window = int_pair(cfg, "numeric", "window", (0, 9))
    extension = cfg.get("numeric", "extension", str, "constant")
    cert = weave_certificate(gen, params, cfg.grid_points, cfg.refine_points)
    report = enumerate_patterns(
        gen, params, window, cfg.grid_points, cfg.refine_points, cfg.tol, extension, cfg.threads, cert
    )
    ok = cert.certified and report.all_within
    summary = f"{report.patterns} patterns, min A={report.min_A:.6g} max B={report.max_B:.6g}"
    return _Result(ok, summary, {"certificate": cert, "enumeration": report, "params": params.as_dict()})


def _run_gabor_bounds(cfg: RunConfig) -> _Result:
    system = build_gabor(cfg)
    verdict = density_gate(system.a, system.b, system.N)
    cert = gabor_frame_bounds(system, cfg.grid_points, cfg.refine_points)
    fields = {
        "system": system.as_dict(),
        "density": verdict._asdict(),
        "certificate": cert,
    }
    curves = {}
    if cfg.write_curves:
        xs = np.linspace(cert.grid.lo, cert.grid.hi, cfg.grid_points, endpoint=False)
        curves["time_multiplier.csv"] = (["x", "m"], [xs, time_multiplier(system, xs)])
    return _Result(cert.certified, f"A={cert.A_num:.12g} B={cert.B_num:.12g}; {verdict.message}", fields, curves)


def _run_gabor_certify(cfg: RunConfig) -> _Result:
    system = build_gabor(cfg)
    verdict = density_gate(system.a, system.b, system.N)
    cert = gabor_weave_certificate(system.gen, system.a, system.b, system.N, cfg.grid_points, cfg.refine_points)
    cover = verify_cover(system.gen, system.a, system.N, cfg.grid_points)
    fields = {
        "system": system.as_dict(),
        "density": verdict._asdict(),
        "cover": cover,
        "certificate": cert,
    }
    return _Result(cert.certified, f"L={cert.L_weave:.12g} U={cert.U_weave:.12g}; {verdict.message}", fields)


def _run_density_gate(cfg: RunConfig) -> _Result:
    a, b, N = cfg.get("gabor", "a"), cfg.get("gabor", "b"), cfg.get("gabor", "N", int, 1)
    verdict = density_gate(a, b, N)
    fields = {
        "a": a,
        "b": b,
        "N": N,
        "density": verdict._asdict(),
        "max_weaving_order": max_weaving_order(a, b) if a * b <= 1 else 0,
    }
    return _Result(verdict.ok, verdict.message, fields)


def _signal_setup(cfg: RunConfig, params: SystemParams) -> Tuple[Tuple[float, float], np.ndarray, int, bool]:
    band = float_pair(cfg, "signal", "band", (0.25, 2.0))
    if not 0 < band[0] < band[1]:
        raise ConfigError("signal.band", f"expected 0 < lo < hi, got {list(band)}")
    points = cfg.get("signal", "points", int, DEFAULT_SIGNAL_POINTS)
    bumps = cfg.get("signal", "bumps", int, 6)
    both = cfg.get("signal", "both_signs", bool, False)
    return band, default_grid(params, band[1], points), bumps, both


def _run_reconstruct(cfg: RunConfig) -> _Result:
    gen, params = build_wavelet(cfg), build_params(cfg)
    pattern = build_pattern(cfg, params.N)
    band, grid, bumps, both = _signal_setup(cfg, params)
    count = cfg.get("signal", "count", int, 100)
    rng = cfg.rng()

    signals = [random_band_limited(rng, band, bumps, both).sample(grid) for _ in range(count)]
    errors = [reconstruct_painless(gen, params, pattern, f).relative_error for f in signals]
    worst = max(errors) if errors else 0.0

    cert = frame_bounds(gen, params, pattern, cfg.grid_points, cfg.refine_points)
    iteration: Dict[str, Any] = {"skipped": True}
    if cert.certified and signals:
        tol = cfg.get("signal", "iteration_tol", float, 1e-8)
        residuals: List[float] = []
        _, steps = frame_iteration(
            apply_frame_operator(gen, params, pattern, grid), signals[0], cert.A_num, cert.B_num, tol, history=residuals
        )
        iteration = {"iterations": steps, "tol": tol, "residuals": residuals}

    fields = {
        "generator": describe_generator(gen),
        "params": params.as_dict(),
        "pattern": pattern.as_dict(),
        "signals": count,
        "band": list(band),
        "max_relative_error": worst,
        "round_trip_tol": ROUND_TRIP_TOL,
        "certificate": cert,
        "frame_iteration": iteration,
    }
    curves = {}
    if cfg.write_curves and signals:
        f0 = signals[0]
        curves["signal.csv"] = (["gamma", "re", "im"], [f0.grid, f0.values.real, f0.values.imag])
    ok = cert.certified and worst <= ROUND_TRIP_TOL
    return _Result(ok, f"{count} signals, max relative error {worst:.3e}", fields, curves)


def _fallback_pattern(cfg: RunConfig, N: int) -> WeavingPattern:
    raw = cfg.section("erasure").get("fallback", "alternating")
    if raw == "alternating":
        return WeavingPattern.alternating(N)
    if isinstance(raw, int) and not isinstance(raw, bool) and 0 < raw < N:
        return WeavingPattern.constant(N, raw)
    raise ConfigError("erasure.fallback", f"expected 'alternating' or a family index in 1..{N - 1}, got {raw!r}")


def _run_erasure(cfg: RunConfig) -> _Result:
    gen, params = build_wavelet(cfg), build_params(cfg)
    band, grid, bumps, both = _signal_setup(cfg, params)
    erased = int_list(cfg, "erasure", "erased", [])
    fallback = _fallback_pattern(cfg, params.N)
    f = random_band_limited(cfg.rng(), band, bumps, both).sample(grid)
    report = erasure_experiment(gen, params, f, erased, fallback, cfg.grid_points, cfg.refine_points)
    ok = report.bounds.certified and report.within_certificate and report.relative_error <= ROUND_TRIP_TOL
    summary = (
        f"erased {len(report.erased)} scale(s): relative error {report.relative_error:.3e}, "
        f"A={report.bounds.A_num:.6g} B={report.bounds.B_num:.6g}"
    )
    return _Result(ok, summary, {"params": params.as_dict(), "experiment": report})


def _run_fusion_demo(cfg: RunConfig) -> _Result:
    rng = cfg.rng()
    trials = cfg.get("packet", "trials", int, 1000)
    path = cfg.section("packet").get("path")
    if path is not None:
        if not isinstance(path, str):
            raise ConfigError("packet.path", f"expected a string, got {path!r}")
        p = Path(path)
        if not p.is_absolute() and cfg.source is not None:
            p = cfg.source.parent / p
        if not p.is_file():
            raise ConfigError("packet.path", f"file not found: {p}")
        packet = load_packet(p)
        if cfg.get("packet", "weighted", bool, False):
            packet = packet.with_weights(rng.uniform(0.5, 2.0, size=len(packet)))
        packets = [packet]
    else:
        samples = cfg.get("packet", "samples", int, 1)
        dim = cfg.get("packet", "ambient_dim", int, 8)
        packets = [
            random_packet(
                rng,
                dim,
                cfg.get("packet", "count", int, 5),
                cfg.get("packet", "max_dim", int, 3),
                cfg.get("packet", "weighted", bool, True),
            )
            for _ in range(samples)
        ]

    entries = []
    ok = True
    for packet in packets:
        f = rng.standard_normal(packet.ambient_dim)
        entry: Dict[str, Any] = {"packet": packet.as_dict()}
        if packet.weights is not None:
            A, B = fusion_bounds(packet, trials, cfg.seed)
            entry["fusion_bounds"] = [A, B]
            try:
                entry["decompose_residual"] = fusion_decompose(packet, f).residual_norm
            except NotAFusionFrameError as e:
                entry["decompose_error"] = str(e)
                ok = False
        try:
            entry["expansion_residual"] = expand_in_packet(packet, f).residual_norm
        except NotAnInformationPacketError as e:
            entry["expansion_error"] = str(e)
            ok = False
        entries.append(entry)

    worst = max((e.get("decompose_residual", 0.0) for e in entries), default=0.0)
    ok = ok and worst <= ROUND_TRIP_TOL
    return _Result(ok, f"{len(entries)} packet(s), max decomposition residual {worst:.3e}", {"packets": entries})


def _run_counterexample(cfg: RunConfig) -> _Result:
    sizes = int_list(cfg, "counterexample", "sizes", [2, 4, 8, 16, 64])
    rows = []
    for M in sizes:
        at_e1, at_ek, ratio = counterexample_growth(M)
        rows.append({"M": M, "at_e1": at_e1, "at_ek": at_ek, "ratio": ratio})
    summary = ", ".join(f"M={r['M']}: ratio {r['ratio']:.6g}" for r in rows)
    return _Result(True, summary, {"rows": rows})


def _dispatch(cfg: RunConfig) -> _Result:
    cmd = cfg.command
    if cmd == "bounds":
        return _run_bounds(cfg)
    elif cmd == "weave-certify":
        return _run_weave_certify(cfg)
    elif cmd == "weave-sample":
        return _run_weave_sample(cfg)
    elif cmd == "weave-enumerate":
        return _run_weave_enumerate(cfg)
    elif cmd == "gabor-bounds":
        return _run_gabor_bounds(cfg)
    elif cmd == "gabor-certify":
        return _run_gabor_certify(cfg)
    elif cmd == "density-gate":
        return _run_density_gate(cfg)
    elif cmd == "reconstruct":
        return _run_reconstruct(cfg)
    elif cmd == "erasure":
        return _run_erasure(cfg)
    elif cmd == "fusion-demo":
        return _run_fusion_demo(cfg)
    elif cmd == "counterexample":
        return _run_counterexample(cfg)
    raise ConfigError("command", f"unknown command {cmd!r}")


def _write_outputs_local(out_dir: Path, report: Dict[str, Any], meta: Dict[str, Any], result: _Result) -> List[Path]:
    written = []
    path = out_dir / "report.json"
    emit_report(report, path)
    written.append(path)
    for name, (header, columns) in sorted(result.curves.items()):
        p = out_dir / name
        write_curve(p, header, columns)
        written.append(p)
    meta["files"] = [p.name for p in written]
    path = out_dir / "meta.json"
    emit_report(meta, path)
    written.append(path)
    return written


def run(cfg: RunConfig) -> RunOutcome:
    """Execute one command and write report.json (deterministic), meta.json and curves."""
    started_at = _now_iso()
    t0 = time.perf_counter()
    logger.info("running %s (seed=%d, grid=%d)", cfg.command, cfg.seed, cfg.grid_points)

    result = _dispatch(cfg)
    status = STATUS_OK if result.certified else STATUS_NOT_CERTIFIED
    report = {
        "command": cfg.command,
        "status": status,
        "seed": cfg.seed,
        "inputs": cfg.inputs(),
        "tolerances": {"pattern_tol": cfg.tol, "round_trip_tol": ROUND_TRIP_TOL, "order_tol": ORDER_TOL},
        "result": result.fields,
        "summary": result.summary,
    }
    meta = {
        "command": cfg.command,
        "started_at": started_at,
        "wall_time_s": time.perf_counter() - t0,
        "host": detect_env().as_dict(),
        "version": __version__,
    }
    files = _write_outputs_local(cfg.out_dir, report, meta, result)
    if status != STATUS_OK:
        logger.warning("%s: not certified (%s)", cfg.command, result.summary)
    return RunOutcome(status=status, summary=f"{cfg.command}: {result.summary}", report=report, files=files)
