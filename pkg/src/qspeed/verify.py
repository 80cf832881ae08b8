"""Pointwise audit of the inequality chain behind the speed-limit bounds.

Every intermediate inequality used to derive the bounds is re-checked
numerically along a trajectory, producing a machine-readable report that
localizes any violation: each check records the worst margin (the amount by
which the inequality holds; negative means violated), the time at which it
occurs, and both side values there.  Margins are normalized by
max(1, |lhs|, |rhs|) at each sample so the default tolerance of 1e-6 reads
as parts-per-million of the dominating side.

Two of the checks are falsifiable by design.  The phase/mean-energy check
(|<psi_0|H_t|psi_t>| <= <psi_t|H_t|psi_t>) and the overlap/cosine check
(|<psi_0|psi_tau>| >= |cos(int <psi_0|H_t|psi_0> dt / hbar)|) hold for
constant Hamiltonians but fail for generic driving and for skewed
superpositions; this harness exists to surface exactly that, not to hide
it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Literal

import numpy as np

from .errors import DomainError, PureCheckOnMixedRun, TooFewSamples
from .qdyn import Trajectory

__all__ = [
    "CheckResult",
    "AuditReport",
    "PURE_ONLY_CHECKS",
    "audit_trajectory",
    "check_trig_bound",
    "fisher_variance_bound",
]

PURE_ONLY_CHECKS = ("overlap_derivative", "sin_velocity", "phase_mean_energy", "overlap_cosine")

MIN_SAMPLES = 16


@dataclass(frozen=True, eq=False)
class CheckResult:
    """Outcome of one named inequality check."""

    name: str
    worst_margin: float
    worst_time: float
    passed: bool
    samples_checked: int
    lhs_at_worst: float
    rhs_at_worst: float
    extra: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        out = {
            "name": self.name,
            "worst_margin": self.worst_margin,
            "worst_time": self.worst_time,
            "passed": self.passed,
            "samples_checked": self.samples_checked,
            "lhs_at_worst": self.lhs_at_worst,
            "rhs_at_worst": self.rhs_at_worst,
        }
        out.update(self.extra)
        return out


@dataclass(frozen=True, eq=False)
class AuditReport:
    """All checks run on one trajectory at a common tolerance."""

    checks: list[CheckResult]
    tolerance: float
    trajectory_label: str
    skipped: tuple[str, ...] = ()

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def check(self, name: str) -> CheckResult:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def to_dict(self) -> dict:
        return {
            "checks": [c.to_dict() for c in self.checks],
            "tolerance": self.tolerance,
            "trajectory_label": self.trajectory_label,
            "skipped": list(self.skipped),
        }


def _normalized_margins(lhs: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    scale = np.maximum(1.0, np.maximum(np.abs(lhs), np.abs(rhs)))
    return (rhs - lhs) / scale


def _pointwise(name, lhs, rhs, times, tol, extra=None) -> CheckResult:
    margins = _normalized_margins(np.asarray(lhs, float), np.asarray(rhs, float))
    i = int(np.argmin(margins))
    worst = float(margins[i])
    return CheckResult(
        name=name,
        worst_margin=worst,
        worst_time=float(times[i]),
        passed=worst >= -tol,
        samples_checked=int(margins.size),
        lhs_at_worst=float(np.asarray(lhs, float)[i]),
        rhs_at_worst=float(np.asarray(rhs, float)[i]),
        extra=extra or {},
    )


def _scalar(name, lhs, rhs, time, tol) -> CheckResult:
    margin = float(_normalized_margins(np.array([lhs]), np.array([rhs]))[0])
    return CheckResult(
        name=name,
        worst_margin=margin,
        worst_time=float(time),
        passed=margin >= -tol,
        samples_checked=1,
        lhs_at_worst=float(lhs),
        rhs_at_worst=float(rhs),
    )


def audit_trajectory(
    traj: Trajectory,
    tol: float = 1e-6,
    on_mixed: Literal["skip", "error"] = "skip",
) -> AuditReport:
    """Run every inequality check on a trajectory.

    Checks needing the overlap with the initial state apply to pure runs
    only; on mixed runs they are skipped and listed in ``skipped`` (or raise
    :class:`PureCheckOnMixedRun` with ``on_mixed="error"``).  Derivatives are
    second-order central differences at interior samples; integrated checks
    use the trapezoid rule on the run grid.  The trajectory must come from a
    ground-shifted protocol for the mean-energy checks to be meaningful.
    """
    n = traj.n_samples
    if n < MIN_SAMPLES:
        raise TooFewSamples(f"audit needs at least {MIN_SAMPLES} samples, got {n}")
    pure = traj.is_pure
    if not pure and on_mixed == "error":
        raise PureCheckOnMixedRun("trajectory is mixed; pure-state checks cannot run")

    hbar = traj.hbar
    dt = traj.dt
    times = traj.times
    interior = times[1:-1]
    ell = traj.bures_from_initial
    dl = (ell[2:] - ell[:-2]) / (2.0 * dt)
    abs_dl = np.abs(dl)
    sqrt_var = np.sqrt(traj.energy_variance)
    me = traj.mean_energy

    checks: list[CheckResult] = []
    skipped: list[str] = []

    sign_changes = int(np.count_nonzero(np.diff(np.sign(dl[dl != 0.0])) != 0))
    checks.append(
        _pointwise(
            "velocity_variance",
            abs_dl,
            sqrt_var[1:-1] / hbar,
            interior,
            tol,
            extra={"velocity_sign_changes": sign_changes},
        )
    )

    if pure:
        h_samp = traj.protocol.matrices(times)
        psis = np.stack([s.amplitudes for s in traj.states])
        psi0 = psis[0]
        overlap = traj.overlap_with_initial
        cross = np.abs(np.einsum("i,tij,tj->t", psi0.conj(), h_samp, psis))
        init_e = np.einsum("i,tij,j->t", psi0.conj(), h_samp, psi0).real

        abs_c = np.abs(overlap)
        d_abs = np.abs(abs_c[2:] - abs_c[:-2]) / (2.0 * dt)
        d_cplx = np.abs(overlap[2:] - overlap[:-2]) / (2.0 * dt)
        checks.append(_pointwise("overlap_derivative", d_abs, d_cplx, interior, tol))
        # windowed form of sin(L) |d_t L| <= |<psi_0|H_t|psi_t>| / hbar: the
        # cosine difference integrates sin(L) dL over the stencil exactly,
        # so only the trapezoid error of the right side remains and stencil
        # asymmetry cannot fabricate a violation
        sin_dl = np.abs(np.cos(ell[:-2]) - np.cos(ell[2:])) / (2.0 * dt)
        cross_win = (cross[:-2] + 2.0 * cross[1:-1] + cross[2:]) / 4.0
        checks.append(_pointwise("sin_velocity", sin_dl, cross_win / hbar, interior, tol))
        checks.append(_pointwise("phase_mean_energy", cross[1:-1], me[1:-1], interior, tol))
    else:
        skipped.extend(["overlap_derivative", "sin_velocity", "phase_mean_energy"])

    checks.append(
        _scalar("mt_integrated", float(ell[-1]), float(np.trapezoid(sqrt_var, dx=dt)) / hbar, traj.tau, tol)
    )
    checks.append(
        _scalar(
            "ml_integrated",
            abs(math.cos(float(ell[-1])) - 1.0),
            float(np.trapezoid(me, dx=dt)) / hbar,
            traj.tau,
            tol,
        )
    )

    if pure:
        arg = float(np.trapezoid(init_e, dx=dt)) / hbar
        checks.append(_scalar("overlap_cosine", abs(math.cos(arg)), float(np.abs(overlap[-1])), traj.tau, tol))
    else:
        skipped.append("overlap_cosine")

    return AuditReport(
        checks=checks,
        tolerance=tol,
        trajectory_label=traj.label,
        skipped=tuple(skipped),
    )


def check_trig_bound(x):
    """|cos x - 1| - (4/pi^2) x^2 on [0, pi/2]; nonnegative, zero at both ends.

    Accepts a scalar or an array; raises :class:`DomainError` outside the
    interval.
    """
    arr = np.asarray(x, dtype=float)
    if np.any(arr < -1e-12) or np.any(arr > math.pi / 2 + 1e-12):
        raise DomainError(f"argument outside [0, pi/2]: {x!r}")
    val = np.abs(np.cos(arr) - 1.0) - (4.0 / math.pi**2) * arr**2
    return float(val) if np.isscalar(x) or arr.ndim == 0 else val


def fisher_variance_bound(traj: Trajectory) -> float:
    """Worst margin of <dH_t^2>/hbar^2 - (d_t L)^2 over interior samples.

    The squared rate of change of the Bures angle from the initial state is
    bounded by the energy variance; for pure runs the margin approaches zero
    at early times (rank-1 saturation), for full-rank mixed runs it stays
    strictly positive.
    """
    if traj.n_samples < MIN_SAMPLES:
        raise TooFewSamples(f"need at least {MIN_SAMPLES} samples, got {traj.n_samples}")
    ell = traj.bures_from_initial
    dl = (ell[2:] - ell[:-2]) / (2.0 * traj.dt)
    bound = traj.energy_variance[1:-1] / traj.hbar**2
    return float(np.min(bound - dl**2))
