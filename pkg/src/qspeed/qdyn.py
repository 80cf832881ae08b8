"""Quantum states, time-dependent Hamiltonian protocols, and unitary propagation.

States are finite-dimensional pure vectors or density matrices.  A protocol
wraps a map t -> H(t) (Hermitian, energy units) over a duration tau together
with the value of hbar, which is carried explicitly through every formula.
Propagation uses exponential midpoint stepping: each step applies the exact
unitary of the Hamiltonian sampled at the step midpoint, built by
eigendecomposition, so unitarity, trace, and purity are preserved to machine
precision while the time dependence is resolved to second order.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Literal

import numpy as np

from . import _linalg
from .errors import (
    DimensionMismatch,
    NotHermitian,
    NotNormalized,
    NotPositive,
    StepCountTooSmall,
)

__all__ = [
    "QuantumState",
    "EigenSystem",
    "HamiltonianProtocol",
    "Trajectory",
    "validate_state",
    "eigensystem",
    "ground_shift",
    "mean_energy",
    "energy_variance",
    "step_unitary",
    "propagate",
]

NORM_TOL = 1e-6


@dataclass(frozen=True, eq=False)
class QuantumState:
    """A pure state vector or a density matrix of dimension ``dim``.

    Construct through :meth:`pure` / :meth:`mixed` (or :func:`validate_state`),
    which canonicalize the data: unit norm for vectors; Hermitian, unit-trace,
    positive semidefinite matrices for density operators.
    """

    kind: Literal["pure", "mixed"]
    dim: int
    amplitudes: np.ndarray | None = None
    matrix: np.ndarray | None = None

    @staticmethod
    def pure(amplitudes) -> "QuantumState":
        vec = np.asarray(amplitudes, dtype=complex).reshape(-1)
        return validate_state(QuantumState("pure", vec.size, amplitudes=vec))

    @staticmethod
    def mixed(matrix) -> "QuantumState":
        mat = np.asarray(matrix, dtype=complex)
        if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
            raise DimensionMismatch(f"density matrix must be square, got shape {mat.shape}")
        return validate_state(QuantumState("mixed", mat.shape[0], matrix=mat))

    @property
    def is_pure(self) -> bool:
        return self.kind == "pure"

    def density_matrix(self) -> np.ndarray:
        """The d x d density operator (outer product for pure states)."""
        if self.is_pure:
            return np.outer(self.amplitudes, self.amplitudes.conj())
        return self.matrix

    def purity(self) -> float:
        """tr(rho^2); equals 1 for pure states."""
        if self.is_pure:
            return float(np.linalg.norm(self.amplitudes) ** 4)
        return float(np.einsum("ij,ji->", self.matrix, self.matrix).real)


def validate_state(s: QuantumState) -> QuantumState:
    """Canonicalize a state, or raise if it is not a valid quantum state.

    Pure vectors are renormalized when the norm deviation is below 1e-6;
    density matrices are symmetrized, their eigenvalues clipped at zero from
    below (rejected below -1e-6), and the trace renormalized.  Larger
    deviations raise :class:`NotNormalized` / :class:`NotPositive` /
    :class:`NotHermitian`.
    """
    if s.kind == "pure":
        if s.amplitudes is None or s.amplitudes.ndim != 1:
            raise DimensionMismatch("pure state requires a 1-D amplitude vector")
        if s.amplitudes.size != s.dim:
            raise DimensionMismatch(f"dim {s.dim} != amplitude length {s.amplitudes.size}")
        norm = float(np.linalg.norm(s.amplitudes))
        if abs(norm - 1.0) > NORM_TOL:
            raise NotNormalized(f"pure state norm {norm:.8f} deviates from 1 beyond {NORM_TOL:g}")
        return QuantumState("pure", s.dim, amplitudes=s.amplitudes / norm)

    if s.matrix is None or s.matrix.shape != (s.dim, s.dim):
        raise DimensionMismatch(f"mixed state requires a {s.dim} x {s.dim} matrix")
    dev = _linalg.hermitian_deviation(s.matrix)
    if dev > NORM_TOL:
        raise NotHermitian(f"density matrix deviates from Hermiticity by {dev:.3e}")
    rho = _linalg.symmetrize(s.matrix)
    trace = float(np.trace(rho).real)
    if abs(trace - 1.0) > NORM_TOL:
        raise NotNormalized(f"density matrix trace {trace:.8f} deviates from 1 beyond {NORM_TOL:g}")
    w, v = np.linalg.eigh(rho)
    w = _linalg.clamped_nonneg(w, "density matrix")
    rho = (v * (w / w.sum())) @ v.conj().T
    return QuantumState("mixed", s.dim, matrix=_linalg.symmetrize(rho))


@dataclass(frozen=True, eq=False)
class EigenSystem:
    """Ascending eigenvalues and the unitary of eigenvectors (columns)."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray


def eigensystem(h: np.ndarray) -> EigenSystem:
    """Eigendecomposition of a Hermitian matrix, eigenvalues ascending."""
    h = np.asarray(h, dtype=complex)
    w, v = _linalg.eigh_checked(h, what="Hamiltonian")
    return EigenSystem(eigenvalues=w, eigenvectors=v)


@dataclass(frozen=True, eq=False)
class HamiltonianProtocol:
    """A driving protocol: t -> H(t) on [0, duration], with hbar attached.

    ``evaluator`` must return a Hermitian d x d matrix in energy units for
    every t in [0, duration].  Hermiticity is validated on every evaluation.
    """

    evaluator: Callable[[float], np.ndarray]
    duration: float
    hbar: float = 1.0
    label: str = ""
    dim: int = 0

    def __post_init__(self):
        if self.duration <= 0:
            raise ValueError(f"duration must be positive, got {self.duration}")
        if self.hbar <= 0:
            raise ValueError(f"hbar must be positive, got {self.hbar}")
        if self.dim == 0:
            probe = np.asarray(self.evaluator(0.0))
            object.__setattr__(self, "dim", probe.shape[0])

    def matrix(self, t: float) -> np.ndarray:
        """H(t), validated Hermitian within 1e-10."""
        h = np.asarray(self.evaluator(float(t)), dtype=complex)
        if h.shape != (self.dim, self.dim):
            raise DimensionMismatch(f"evaluator returned shape {h.shape}, expected {(self.dim, self.dim)}")
        _linalg.require_hermitian(h, what=f"H({t:g})")
        return h

    def matrices(self, ts: np.ndarray) -> np.ndarray:
        """Stack of H(t) over the given sample times, shape (len(ts), d, d).

        Validates Hermiticity once on the whole stack; subclasses may
        override to batch further per-sample work.
        """
        ts = np.asarray(ts, dtype=float)
        stack = np.stack([np.asarray(self.evaluator(float(t)), dtype=complex) for t in ts])
        if stack.shape[1:] != (self.dim, self.dim):
            raise DimensionMismatch(f"evaluator returned shape {stack.shape[1:]}")
        dev = float(np.max(np.abs(stack - np.conj(np.swapaxes(stack, -1, -2)))))
        if dev > _linalg.HERMITIAN_TOL:
            raise NotHermitian(f"H(t) deviates from Hermiticity by {dev:.3e} on the sample grid")
        return stack


@dataclass(frozen=True, eq=False)
class _GroundShiftedProtocol(HamiltonianProtocol):
    """Ground-shifted view of a base protocol with a batched stack path."""

    base: HamiltonianProtocol | None = None
    global_offset: float | None = None

    def matrices(self, ts: np.ndarray) -> np.ndarray:
        stack = self.base.matrices(ts)
        eye = np.eye(self.dim)
        if self.global_offset is None:
            e0 = np.linalg.eigvalsh(stack)[:, 0]
            return stack - e0[:, None, None] * eye
        return stack - self.global_offset * eye


def ground_shift(
    p: HamiltonianProtocol,
    mode: Literal["instantaneous", "global"] = "instantaneous",
    scan_samples: int = 1024,
) -> HamiltonianProtocol:
    """Shift the protocol so mean energies are measured above the ground state.

    ``instantaneous`` (default) subtracts the lowest eigenvalue of H(t) at each
    time, keeping <H_t> >= 0 pointwise.  ``global`` subtracts a single constant,
    the minimum instantaneous ground energy over a uniform scan of
    ``scan_samples`` + 1 times in [0, duration].
    """
    base = p.evaluator

    if mode == "instantaneous":
        offset = None

        def shifted(t: float) -> np.ndarray:
            h = np.asarray(base(float(t)), dtype=complex)
            e0 = float(np.linalg.eigvalsh(h)[0])
            return h - e0 * np.eye(h.shape[0])
    elif mode == "global":
        ts = np.linspace(0.0, p.duration, scan_samples + 1)
        offset = min(float(np.linalg.eigvalsh(np.asarray(base(float(t)), dtype=complex))[0]) for t in ts)

        def shifted(t: float) -> np.ndarray:
            h = np.asarray(base(float(t)), dtype=complex)
            return h - offset * np.eye(h.shape[0])
    else:
        raise ValueError(f"unknown ground shift mode {mode!r}")

    label = f"{p.label}+gshift[{mode}]" if p.label else f"gshift[{mode}]"
    return _GroundShiftedProtocol(
        shifted, p.duration, p.hbar, label, p.dim, base=p, global_offset=offset
    )


def mean_energy(s: QuantumState, h: np.ndarray) -> float:
    """tr(rho H), or <psi|H|psi> for pure states; the real part is returned
    after checking the imaginary residue is below 1e-9 of the local scale."""
    h = np.asarray(h, dtype=complex)
    if h.shape != (s.dim, s.dim):
        raise DimensionMismatch(f"H shape {h.shape} does not match state dim {s.dim}")
    if s.is_pure:
        val = complex(s.amplitudes.conj() @ (h @ s.amplitudes))
    else:
        val = complex(np.einsum("ij,ji->", s.matrix, h))
    scale = max(1.0, abs(val))
    if abs(val.imag) > 1e-9 * scale:
        raise NotHermitian(f"mean energy has imaginary residue {val.imag:.3e}")
    return float(val.real)


def energy_variance(s: QuantumState, h: np.ndarray) -> float:
    """<H^2> - <H>^2, clamped to 0 when within -1e-9 of zero."""
    h = np.asarray(h, dtype=complex)
    if h.shape != (s.dim, s.dim):
        raise DimensionMismatch(f"H shape {h.shape} does not match state dim {s.dim}")
    if s.is_pure:
        hpsi = h @ s.amplitudes
        m1 = float((s.amplitudes.conj() @ hpsi).real)
        m2 = float(np.linalg.norm(hpsi) ** 2)
    else:
        m1 = float(np.einsum("ij,ji->", s.matrix, h).real)
        m2 = float(np.einsum("ij,jk,ki->", s.matrix, h, h).real)
    var = m2 - m1 * m1
    if var < -1e-9 * max(1.0, m2):
        raise NotPositive(f"energy variance {var:.3e} is negative beyond tolerance")
    return max(var, 0.0)


def step_unitary(h: np.ndarray, dt: float, hbar: float) -> np.ndarray:
    """exp(-i H dt / hbar) via eigendecomposition; exactly unitary."""
    w, v = _linalg.eigh_checked(np.asarray(h, dtype=complex), what="step Hamiltonian")
    return (v * np.exp(-1j * w * dt / hbar)) @ v.conj().T


@dataclass(frozen=True, eq=False)
class Trajectory:
    """A uniformly sampled run: states plus per-sample observables.

    ``times`` holds N+1 uniform samples on [0, tau].  ``overlap_with_initial``
    is filled only for pure runs; ``bures_from_initial`` is the Bures angle
    L(rho_0, rho_t) at every sample (for pure runs computed from the overlap
    magnitude, which is the numerically sharper equivalent route).
    """

    times: np.ndarray
    states: list[QuantumState]
    mean_energy: np.ndarray
    energy_variance: np.ndarray
    bures_from_initial: np.ndarray
    ground_energy: np.ndarray
    hbar: float
    protocol: HamiltonianProtocol
    overlap_with_initial: np.ndarray | None = None

    @property
    def tau(self) -> float:
        return float(self.times[-1])

    @property
    def dt(self) -> float:
        return float(self.times[1] - self.times[0])

    @property
    def n_samples(self) -> int:
        return len(self.times)

    @property
    def is_pure(self) -> bool:
        return self.states[0].is_pure

    @property
    def dim(self) -> int:
        return self.states[0].dim

    @property
    def label(self) -> str:
        return self.protocol.label


def propagate(p: HamiltonianProtocol, s0: QuantumState, steps: int) -> Trajectory:
    """Evolve ``s0`` under the protocol with N = ``steps`` midpoint-exponential
    steps and return the densely sampled trajectory.

    Each step applies U_k = exp(-i H(t_k + dt/2) dt / hbar); pure amplitudes
    are mapped psi -> U psi, densities rho -> U rho U†.  Per-sample
    observables (<H_t>, variance, ground energy, Bures angle from the start,
    and for pure runs the complex overlap with the initial state) are filled
    on the same grid.
    """
    if steps < 2:
        raise StepCountTooSmall(f"need at least 2 steps, got {steps}")
    if s0.dim != p.dim:
        raise DimensionMismatch(f"state dim {s0.dim} != protocol dim {p.dim}")
    s0 = validate_state(s0)

    n = int(steps)
    times = np.linspace(0.0, p.duration, n + 1)
    dt = p.duration / n
    d = p.dim

    h_mid = p.matrices(times[:-1] + dt / 2)
    w, v = np.linalg.eigh(h_mid)
    phases = np.exp(-1j * w * dt / p.hbar)

    pure = s0.is_pure
    if pure:
        psis = np.empty((n + 1, d), dtype=complex)
        psis[0] = s0.amplitudes
        for k in range(n):
            u = (v[k] * phases[k]) @ v[k].conj().T
            psis[k + 1] = u @ psis[k]
        states = [QuantumState("pure", d, amplitudes=psis[k]) for k in range(n + 1)]
    else:
        rhos = np.empty((n + 1, d, d), dtype=complex)
        rhos[0] = s0.matrix
        for k in range(n):
            u = (v[k] * phases[k]) @ v[k].conj().T
            rhos[k + 1] = _linalg.symmetrize(u @ rhos[k] @ u.conj().T)
        states = [QuantumState("mixed", d, matrix=rhos[k]) for k in range(n + 1)]

    h_samp = p.matrices(times)
    ground = np.linalg.eigvalsh(h_samp)[:, 0]

    if pure:
        me = np.einsum("ti,tij,tj->t", psis.conj(), h_samp, psis).real
        hpsi = np.einsum("tij,tj->ti", h_samp, psis)
        m2 = np.einsum("ti,ti->t", hpsi.conj(), hpsi).real
        overlap = np.einsum("i,ti->t", psis[0].conj(), psis)
        # arctan2 of the orthogonal-component norm against |overlap| is the
        # same angle as arccos(|overlap|) but stays accurate near L = 0
        residual = np.linalg.norm(psis - overlap[:, None] * psis[0][None, :], axis=1)
        bures = np.arctan2(residual, np.abs(overlap))
    else:
        me = np.einsum("tij,tji->t", rhos, h_samp).real
        m2 = np.einsum("tij,tjk,tki->t", rhos, h_samp, h_samp).real
        overlap = None
        sqrt0 = _linalg.psd_sqrt(rhos[0], "initial state")
        bures = _linalg.bures_angle_from_fidelity(_linalg.fidelity_from_sqrt(sqrt0, rhos))
    bures[0] = 0.0

    var = m2 - me**2
    if float(var.min()) < -1e-9 * max(1.0, float(np.abs(m2).max())):
        raise NotPositive(f"energy variance dipped to {var.min():.3e} along the trajectory")
    var = np.clip(var, 0.0, None)

    purities = np.array([s.purity() for s in states])
    drift = float(np.max(np.abs(purities - purities[0])))
    if drift > 1e-8:
        raise NotPositive(f"purity drifted by {drift:.3e} along the trajectory; propagation is not unitary")

    return Trajectory(
        times=times,
        states=states,
        mean_energy=me,
        energy_variance=var,
        bures_from_initial=bures,
        ground_energy=ground,
        hbar=p.hbar,
        protocol=p,
        overlap_with_initial=overlap,
    )
