"""Batch front end: config-driven runs, sweeps, audits, and the Fisher demo.

A run is described by a single JSON document (see README for the schema).
The pipeline is: build protocol -> ground shift -> propagate -> speed-limit
report -> inequality audit -> one JSON report.  Sweeps rerun the pipeline
over a list of values for one config field and emit one CSV row per value.

Exit codes: 0 success, 2 config error, 3 numerical/domain error, 4 bound or
audit violation (so CI can tell falsification from misconfiguration).
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import time
from dataclasses import dataclass, replace
from typing import Any

import numpy as np

from . import __version__, bounds, geometry, qdyn, verify
from .errors import (
    AuditViolation,
    BadConfig,
    BoundViolation,
    NotHermitian,
    QspeedError,
)

__all__ = [
    "ProtocolConfig",
    "SweepSpec",
    "build_protocol",
    "initial_state",
    "run_pipeline",
    "run_command",
    "sweep_command",
    "audit_command",
    "fisher_command",
    "gaussian_shift_track",
    "main",
]

PROTOCOL_KINDS = (
    "constant",
    "piecewise_const",
    "rabi_qubit",
    "landau_zener",
    "modulated_oscillator",
    "matrix_samples",
)

LEAKAGE_LIMIT = 1e-6

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_VIOLATION = 4


# ---------------------------------------------------------------------------
# Config parsing


@dataclass(frozen=True, eq=False)
class ProtocolConfig:
    """Validated run configuration."""

    kind: str
    dim: int
    duration: float
    params: dict
    initial_state: Any
    hbar: float = 1.0
    steps: int = 2048
    ground_shift_mode: str = "instantaneous"
    ml_mode: str = "linear"
    audit_tolerance: float = 1e-6
    label: str = ""

    @classmethod
    def from_dict(cls, raw: dict) -> "ProtocolConfig":
        if not isinstance(raw, dict):
            raise BadConfig("config must be a JSON object")

        def need(name, types, check=None, why=""):
            if name not in raw:
                raise BadConfig(f"missing required field '{name}'")
            val = raw[name]
            if not isinstance(val, types):
                raise BadConfig(f"field '{name}' has wrong type {type(val).__name__}")
            if check is not None and not check(val):
                raise BadConfig(f"field '{name}' invalid: {why}")
            return val

        kind = need("kind", str, lambda k: k in PROTOCOL_KINDS, f"must be one of {PROTOCOL_KINDS}")
        dim = need("dim", int, lambda d: d >= 2, "must be an integer >= 2")
        duration = float(need("duration", (int, float), lambda x: x > 0, "must be > 0"))
        hbar = float(raw.get("hbar", 1.0))
        if hbar <= 0:
            raise BadConfig("field 'hbar' invalid: must be > 0")
        steps = raw.get("steps", 2048)
        if not isinstance(steps, int) or steps < 16:
            raise BadConfig("field 'steps' invalid: must be an integer >= 16")
        gsm = raw.get("ground_shift_mode", "instantaneous")
        if gsm not in ("instantaneous", "global"):
            raise BadConfig("field 'ground_shift_mode' invalid: must be 'instantaneous' or 'global'")
        ml_mode = raw.get("ml_mode", "linear")
        if ml_mode not in ("linear", "quadratic"):
            raise BadConfig("field 'ml_mode' invalid: must be 'linear' or 'quadratic'")
        tol = float(raw.get("audit_tolerance", 1e-6))
        if tol <= 0:
            raise BadConfig("field 'audit_tolerance' invalid: must be > 0")
        params = raw.get("params", {})
        if not isinstance(params, dict):
            raise BadConfig("field 'params' has wrong type")
        if "initial_state" not in raw:
            raise BadConfig("missing required field 'initial_state'")
        return cls(
            kind=kind,
            dim=dim,
            duration=duration,
            params=params,
            initial_state=raw["initial_state"],
            hbar=hbar,
            steps=steps,
            ground_shift_mode=gsm,
            ml_mode=ml_mode,
            audit_tolerance=tol,
            label=str(raw.get("label", kind)),
        )


def load_config(path: str) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise BadConfig(f"cannot read config file {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise BadConfig(f"config file {path} is not valid JSON: {exc}") from exc


def _decode_entry(entry, where: str) -> complex:
    if isinstance(entry, (int, float)):
        return complex(entry)
    if isinstance(entry, dict) and set(entry) <= {"re", "im"}:
        return complex(float(entry.get("re", 0.0)), float(entry.get("im", 0.0)))
    raise BadConfig(f"{where}: matrix entries must be numbers or {{re, im}} objects")


def decode_matrix(raw, dim: int, where: str) -> np.ndarray:
    if not isinstance(raw, list) or len(raw) != dim or any(len(row) != dim for row in raw):
        raise BadConfig(f"{where}: must be a {dim} x {dim} nested list")
    return np.array([[_decode_entry(e, where) for e in row] for row in raw], dtype=complex)


def _param(params: dict, name: str, where: str) -> float:
    if name not in params:
        raise BadConfig(f"{where}: missing required param '{name}'")
    val = params[name]
    if not isinstance(val, (int, float)):
        raise BadConfig(f"{where}: param '{name}' must be a number")
    return float(val)


# ---------------------------------------------------------------------------
# Protocol construction


def _pauli():
    sz = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)
    sx = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
    return sz, sx


def _ladder(dim: int) -> np.ndarray:
    a = np.zeros((dim, dim), dtype=complex)
    for n in range(1, dim):
        a[n - 1, n] = math.sqrt(n)
    return a


def build_protocol(cfg: ProtocolConfig) -> qdyn.HamiltonianProtocol:
    """Realize the configured protocol kind as a HamiltonianProtocol."""
    kind, d, tau = cfg.kind, cfg.dim, cfg.duration

    if kind == "constant":
        h = decode_matrix(cfg.params.get("matrix"), d, "params.matrix")
        if np.max(np.abs(h - h.conj().T)) > 1e-10:
            raise NotHermitian("params.matrix is not Hermitian within 1e-10")
        evaluator = lambda t: h

    elif kind == "piecewise_const":
        segs = cfg.params.get("segments")
        if not isinstance(segs, list) or not segs:
            raise BadConfig("params.segments: must be a non-empty list")
        mats, edges = [], [0.0]
        for i, seg in enumerate(segs):
            if not isinstance(seg, dict) or "matrix" not in seg or "duration" not in seg:
                raise BadConfig(f"params.segments[{i}]: needs 'matrix' and 'duration'")
            sd = float(seg["duration"])
            if sd <= 0:
                raise BadConfig(f"params.segments[{i}].duration: must be > 0")
            m = decode_matrix(seg["matrix"], d, f"params.segments[{i}].matrix")
            if np.max(np.abs(m - m.conj().T)) > 1e-10:
                raise NotHermitian(f"params.segments[{i}].matrix is not Hermitian within 1e-10")
            mats.append(m)
            edges.append(edges[-1] + sd)
        if abs(edges[-1] - tau) > 1e-9 * max(1.0, tau):
            raise BadConfig(f"params.segments: durations sum to {edges[-1]:g}, expected {tau:g}")
        edges_arr = np.array(edges)

        def evaluator(t, mats=mats, edges_arr=edges_arr):
            i = min(int(np.searchsorted(edges_arr, t, side="right")) - 1, len(mats) - 1)
            return mats[max(i, 0)]

    elif kind == "rabi_qubit":
        if d != 2:
            raise BadConfig("rabi_qubit requires dim = 2")
        w0 = _param(cfg.params, "omega0", "rabi_qubit")
        amp = _param(cfg.params, "amplitude", "rabi_qubit")
        wd = _param(cfg.params, "drive_frequency", "rabi_qubit")
        sz, sx = _pauli()
        evaluator = lambda t: (w0 / 2) * sz + amp * math.cos(wd * t) * sx

    elif kind == "landau_zener":
        if d != 2:
            raise BadConfig("landau_zener requires dim = 2")
        v = _param(cfg.params, "sweep_rate", "landau_zener")
        gap = _param(cfg.params, "gap", "landau_zener")
        sz, sx = _pauli()
        evaluator = lambda t: (v * (t - tau / 2) / 2) * sz + (gap / 2) * sx

    elif kind == "modulated_oscillator":
        w0 = _param(cfg.params, "omega0", "modulated_oscillator")
        gamma = _param(cfg.params, "pump_rate", "modulated_oscillator")
        lam = float(cfg.params.get("squeeze", 0.0))
        number_op = np.diag(np.arange(d, dtype=float)).astype(complex)
        a = _ladder(d)
        squeeze_op = a @ a + (a @ a).conj().T

        def evaluator(t, hb=cfg.hbar):
            return hb * w0 * math.exp(gamma * t) * number_op + lam * squeeze_op

    elif kind == "matrix_samples":
        samples = cfg.params.get("samples")
        if not isinstance(samples, list) or len(samples) < 2:
            raise BadConfig("params.samples: must be a list of at least 2 {t, matrix} objects")
        ts, mats = [], []
        for i, s in enumerate(samples):
            if not isinstance(s, dict) or "t" not in s or "matrix" not in s:
                raise BadConfig(f"params.samples[{i}]: needs 't' and 'matrix'")
            ts.append(float(s["t"]))
            m = decode_matrix(s["matrix"], d, f"params.samples[{i}].matrix")
            if np.max(np.abs(m - m.conj().T)) > 1e-10:
                raise NotHermitian(f"params.samples[{i}].matrix is not Hermitian within 1e-10")
            mats.append(m)
        ts_arr = np.array(ts)
        if np.any(np.diff(ts_arr) <= 0):
            raise BadConfig("params.samples: t values must be strictly increasing")
        if ts_arr[0] > 0.0 or ts_arr[-1] < tau:
            raise BadConfig(f"params.samples: t values must cover [0, {tau:g}]")
        stack = np.stack(mats)

        def evaluator(t, ts_arr=ts_arr, stack=stack):
            i = int(np.clip(np.searchsorted(ts_arr, t, side="right") - 1, 0, len(ts_arr) - 2))
            w = (t - ts_arr[i]) / (ts_arr[i + 1] - ts_arr[i])
            return (1.0 - w) * stack[i] + w * stack[i + 1]

    else:  # pragma: no cover - guarded by ProtocolConfig
        raise BadConfig(f"unknown protocol kind '{kind}'")

    return qdyn.HamiltonianProtocol(evaluator, tau, cfg.hbar, cfg.label, d)


def initial_state(cfg: ProtocolConfig, protocol: qdyn.HamiltonianProtocol) -> qdyn.QuantumState:
    """Resolve the configured initial state (labels, amplitudes, or matrix)."""
    spec = cfg.initial_state
    if spec == "ground":
        basis = qdyn.eigensystem(protocol.matrix(0.0))
        return qdyn.QuantumState.pure(basis.eigenvectors[:, 0])
    if spec == "equal_superposition":
        return qdyn.QuantumState.pure(np.ones(cfg.dim) / math.sqrt(cfg.dim))
    if isinstance(spec, dict) and "amplitudes" in spec:
        amps = [_decode_entry(e, "initial_state.amplitudes") for e in spec["amplitudes"]]
        if len(amps) != cfg.dim:
            raise BadConfig(f"initial_state.amplitudes: expected length {cfg.dim}")
        return qdyn.QuantumState.pure(np.array(amps))
    if isinstance(spec, dict) and "matrix" in spec:
        return qdyn.QuantumState.mixed(decode_matrix(spec["matrix"], cfg.dim, "initial_state.matrix"))
    raise BadConfig(
        "initial_state: must be 'ground', 'equal_superposition', {'amplitudes': [...]}, or {'matrix': [[...]]}"
    )


# ---------------------------------------------------------------------------
# Pipeline


def _oscillator_leakage(traj: qdyn.Trajectory) -> float:
    """Max population of the top two ladder levels along the run."""
    top = max(traj.dim - 2, 0)
    pops = []
    for s in traj.states:
        if s.is_pure:
            pops.append(float(np.sum(np.abs(s.amplitudes[top:]) ** 2)))
        else:
            pops.append(float(np.trace(s.matrix[top:, top:]).real))
    return max(pops)


def run_pipeline(cfg: ProtocolConfig, strict: bool = True):
    """Ground shift, propagate, bound report, audit.  Returns (report dict,
    ok flag); ``strict=False`` records bound violations instead of raising."""
    protocol = build_protocol(cfg)
    shifted = qdyn.ground_shift(protocol, cfg.ground_shift_mode)
    state = initial_state(cfg, protocol)
    t0 = time.perf_counter()
    traj = qdyn.propagate(shifted, state, cfg.steps)

    leakage = None
    if cfg.kind == "modulated_oscillator":
        leakage = _oscillator_leakage(traj)
        if leakage > LEAKAGE_LIMIT:
            raise QspeedError(
                f"truncation leakage {leakage:.3e} exceeds {LEAKAGE_LIMIT:g}; "
                f"raise 'dim' or lower the squeeze coupling"
            )

    report = bounds.build_report(traj, cfg.ml_mode, strict=strict)
    audit = verify.audit_trajectory(traj, cfg.audit_tolerance)
    elapsed_ms = (time.perf_counter() - t0) * 1000.0
    print(f"[qspeed] {cfg.label}: computed in {elapsed_ms:.1f} ms", file=sys.stderr)

    doc = {
        "meta": {
            "version": __version__,
            "grid": cfg.steps,
            # pinned so that identical configs produce byte-identical reports;
            # the measured time goes to stderr
            "wall_ms": 0,
            "label": cfg.label,
            "kind": cfg.kind,
            "dim": cfg.dim,
            "hbar": cfg.hbar,
            "ml_mode": cfg.ml_mode,
            "ground_shift_mode": cfg.ground_shift_mode,
        },
        "qsl": report.to_dict(),
        "audit": {
            "checks": [c.to_dict() for c in audit.checks],
            "tolerance": audit.tolerance,
            "skipped": list(audit.skipped),
        },
    }
    if leakage is not None:
        doc["meta"]["leakage"] = leakage
    ok = audit.passed and report.qsl_satisfied
    return doc, report, audit, ok


def _sanitize(obj):
    """Replace non-finite floats with strings so the JSON stays strict."""
    if isinstance(obj, dict):
        return {k: _sanitize(v) for k, v in obj.items()}
    if isinstance(obj, list):
        return [_sanitize(v) for v in obj]
    if isinstance(obj, float) and not math.isfinite(obj):
        return "inf" if obj > 0 else "-inf"
    return obj


def write_json(doc: dict, path: str | None):
    text = json.dumps(_sanitize(doc), indent=2, allow_nan=False) + "\n"
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)


def _fmt(x) -> str:
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, float):
        return f"{x:.17g}"
    return str(x)


def write_csv(path: str, header: list[str], rows: list[list]):
    lines = [",".join(header)]
    lines += [",".join(_fmt(v) for v in row) for row in rows]
    text = "\n".join(lines) + "\n"
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)


# ---------------------------------------------------------------------------
# Commands


def run_command(config_path: str, output: str | None = None) -> int:
    cfg = ProtocolConfig.from_dict(load_config(config_path))
    doc, report, audit, ok = run_pipeline(cfg, strict=False)
    write_json(doc, output)
    if not ok:
        bad = [c.name for c in audit.checks if not c.passed]
        if not report.qsl_satisfied:
            bad.append("qsl_bound")
        print(f"[qspeed] violation in: {', '.join(bad)}", file=sys.stderr)
        return EXIT_VIOLATION
    return EXIT_OK


@dataclass(frozen=True, eq=False)
class SweepSpec:
    """One config field swept over a list of values."""

    parameter: str
    values: list[float]
    output: str | None = None

    def __post_init__(self):
        if not self.parameter:
            raise BadConfig("sweep parameter path must be non-empty")
        if not self.values:
            raise BadConfig("sweep values must be non-empty")


def _set_path(raw: dict, path: str, value):
    parts = path.split(".")
    node = raw
    for p in parts[:-1]:
        if not isinstance(node, dict) or p not in node:
            raise BadConfig(f"sweep parameter path '{path}' does not resolve in the config")
        node = node[p]
    if not isinstance(node, dict) or parts[-1] not in node:
        raise BadConfig(f"sweep parameter path '{path}' does not resolve in the config")
    node[parts[-1]] = value


SWEEP_HEADER = [
    "param_value",
    "tau",
    "bures",
    "e_avg",
    "de_avg",
    "tau_mt",
    "tau_ml_quad",
    "tau_ml_lin",
    "tau_qsl",
    "slack_min",
    "audit_passed",
]


def sweep_command(config_path: str, spec: SweepSpec) -> int:
    raw_base = load_config(config_path)
    ProtocolConfig.from_dict(json.loads(json.dumps(raw_base)))  # validate base once
    rows = []
    for value in spec.values:
        raw = json.loads(json.dumps(raw_base))
        _set_path(raw, spec.parameter, value)
        cfg = ProtocolConfig.from_dict(raw)
        _, report, audit, _ = run_pipeline(cfg, strict=False)
        rows.append(
            [
                float(value),
                report.tau,
                report.bures,
                report.e_avg,
                report.de_avg,
                report.tau_mt,
                report.tau_ml_quad,
                report.tau_ml_lin,
                report.tau_qsl,
                report.slack_min,
                audit.passed and report.qsl_satisfied,
            ]
        )
    write_csv(spec.output, SWEEP_HEADER, rows)
    return EXIT_OK


def audit_command(config_path: str, tol: float | None = None, output: str | None = None) -> int:
    cfg = ProtocolConfig.from_dict(load_config(config_path))
    if tol is not None:
        if tol <= 0:
            raise BadConfig("field 'audit_tolerance' invalid: must be > 0")
        cfg = replace(cfg, audit_tolerance=tol)
    doc, report, audit, ok = run_pipeline(cfg, strict=False)
    for c in audit.checks:
        status = "pass" if c.passed else "FAIL"
        print(f"{status}  {c.name:20s} worst_margin={c.worst_margin:+.3e} at t={c.worst_time:.6g}")
    for name in audit.skipped:
        print(f"skip  {name:20s} (mixed-state run)")
    print(f"{'pass' if report.qsl_satisfied else 'FAIL'}  {'qsl_bound':20s} slack_min={report.slack_min:.6g}")
    if output is not None:
        write_json(doc, output)
    return EXIT_OK if ok else EXIT_VIOLATION


def gaussian_shift_track(
    sigma: float,
    n_params: int = 201,
    param_step: float = 0.005,
    grid_points: int = 4001,
) -> geometry.DistributionTrack:
    """Unit-speed translated Gaussian family, padded one step past [0, 1]."""
    if sigma <= 0:
        raise BadConfig("field 'sigma' invalid: must be > 0")
    ts = (np.arange(n_params + 2) - 1) * param_step
    grid = np.linspace(-8.0 * sigma, ts[-1] + 8.0 * sigma, grid_points)

    def density(x, t):
        return np.exp(-((x - t) ** 2) / (2.0 * sigma**2)) / (sigma * math.sqrt(2.0 * math.pi))

    return geometry.DistributionTrack.from_function(density, grid, ts)


FISHER_HEADER = ["t", "fisher_information", "inv_sigma_sq", "wootters_velocity_sq"]


def fisher_command(sigma: float, output: str | None = None, demo: str = "gaussian_shift") -> int:
    if demo != "gaussian_shift":
        raise BadConfig(f"field 'demo' invalid: unknown demo '{demo}'")
    track = gaussian_shift_track(sigma)
    rows = []
    for t in track.parameter_values[1:-1]:
        rows.append(
            [
                float(t),
                geometry.fisher_information_1d(track, float(t)),
                1.0 / sigma**2,
                geometry.statistical_velocity_sq(track, float(t)),
            ]
        )
    write_csv(output, FISHER_HEADER, rows)
    return EXIT_OK


# ---------------------------------------------------------------------------
# Entry point


def _build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="qspeed",
        description="Simulate driven quantum systems and verify speed-limit bounds.",
    )
    sub = ap.add_subparsers(dest="verb", required=True)

    p_run = sub.add_parser("run", help="single evolution, JSON report")
    p_run.add_argument("config")
    p_run.add_argument("-o", "--output", default=None)

    p_sweep = sub.add_parser("sweep", help="rerun over a list of values for one config field")
    p_sweep.add_argument("config")
    p_sweep.add_argument("--param", required=True, help="dot path into the config, e.g. params.pump_rate")
    p_sweep.add_argument("--values", required=True, help="comma-separated numbers")
    p_sweep.add_argument("-o", "--output", default=None)

    p_audit = sub.add_parser("audit", help="run and print the inequality audit")
    p_audit.add_argument("config")
    p_audit.add_argument("--tol", type=float, default=None)
    p_audit.add_argument("-o", "--output", default=None)

    p_fisher = sub.add_parser("fisher", help="translated-Gaussian Fisher information demo")
    p_fisher.add_argument("--sigma", type=float, required=True)
    p_fisher.add_argument("--demo", default="gaussian_shift")
    p_fisher.add_argument("-o", "--output", default=None)

    return ap


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.verb == "run":
            return run_command(args.config, args.output)
        if args.verb == "sweep":
            try:
                values = [float(v) for v in args.values.split(",") if v.strip()]
            except ValueError as exc:
                raise BadConfig(f"--values must be comma-separated numbers: {exc}") from exc
            return sweep_command(args.config, SweepSpec(args.param, values, args.output))
        if args.verb == "audit":
            return audit_command(args.config, args.tol, args.output)
        if args.verb == "fisher":
            return fisher_command(args.sigma, args.output, args.demo)
        raise BadConfig(f"unknown verb {args.verb!r}")  # pragma: no cover
    except BadConfig as exc:
        print(f"[qspeed] config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (BoundViolation, AuditViolation) as exc:
        print(f"[qspeed] violation: {exc}", file=sys.stderr)
        return EXIT_VIOLATION
    except QspeedError as exc:
        print(f"[qspeed] error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except OSError as exc:
        print(f"[qspeed] i/o error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":  # pragma: no cover
    raise SystemExit(main())
