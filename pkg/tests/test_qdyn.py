"""States, eigendecomposition, ground shift, and unitary propagation."""

import math

import numpy as np
import pytest

from conftest import (
    equal_superposition,
    random_hermitian,
    random_pure_state,
    random_smooth_protocol,
    two_level_protocol,
)
from qspeed import (
    HamiltonianProtocol,
    QuantumState,
    eigensystem,
    energy_variance,
    ground_shift,
    mean_energy,
    propagate,
    step_unitary,
    validate_state,
)
from qspeed.errors import (
    DimensionMismatch,
    NotHermitian,
    NotNormalized,
    NotPositive,
    StepCountTooSmall,
)

SX = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
SZ = np.diag([1.0, -1.0]).astype(complex)


class TestValidateState:
    def test_maximally_mixed_accepted(self):
        s = QuantumState.mixed(np.eye(2) / 2)
        w = np.linalg.eigvalsh(s.matrix)
        assert np.allclose(w, [0.5, 0.5])

    def test_basis_state_accepted(self):
        s = QuantumState.pure([1.0, 0.0])
        assert s.purity() == pytest.approx(1.0)

    def test_trace_violation_rejected(self):
        with pytest.raises(NotNormalized):
            QuantumState.mixed(np.diag([0.7, 0.4]))

    def test_norm_violation_rejected(self):
        with pytest.raises(NotNormalized):
            QuantumState.pure([1.0, 1.0])

    def test_negative_eigenvalue_rejected(self):
        with pytest.raises(NotPositive):
            QuantumState.mixed(np.diag([1.1, -0.1]))

    def test_non_hermitian_rejected(self):
        m = np.array([[0.5, 0.3], [0.0, 0.5]], dtype=complex)
        with pytest.raises(NotHermitian):
            QuantumState.mixed(m)

    def test_small_deviations_canonicalized(self):
        v = np.array([1.0, 1.0]) / math.sqrt(2) * (1 + 3e-7)
        s = QuantumState.pure(v)
        assert np.linalg.norm(s.amplitudes) == pytest.approx(1.0, abs=1e-12)
        rho = np.diag([0.6, 0.4]) + 1e-8 * np.array([[0, 1j], [-1j, 0]])
        m = validate_state(QuantumState("mixed", 2, matrix=rho))
        assert np.max(np.abs(m.matrix - m.matrix.conj().T)) < 1e-15
        assert np.trace(m.matrix).real == pytest.approx(1.0, abs=1e-12)


class TestEigensystem:
    def test_diagonal(self):
        es = eigensystem(np.diag([2.0, -1.0]))
        assert np.allclose(es.eigenvalues, [-1.0, 2.0])

    def test_pauli_x(self):
        es = eigensystem(SX)
        assert np.allclose(es.eigenvalues, [-1.0, 1.0])

    def test_random_reconstruction(self):
        rng = np.random.default_rng(0)
        for _ in range(20):
            h = random_hermitian(rng, 4, scale=3.0)
            es = eigensystem(h)
            recon = (es.eigenvectors * es.eigenvalues) @ es.eigenvectors.conj().T
            tol = 1e-9 * (1.0 + np.max(np.abs(h)))
            assert np.max(np.abs(h - recon)) <= tol
            gram = es.eigenvectors.conj().T @ es.eigenvectors
            assert np.max(np.abs(gram - np.eye(4))) <= 1e-9

    def test_rejects_non_hermitian(self):
        with pytest.raises(NotHermitian):
            eigensystem(np.array([[0.0, 1.0], [0.0, 0.0]]))


class TestEnergyMoments:
    def test_mean_maximally_mixed(self):
        s = QuantumState.mixed(np.eye(2) / 2)
        assert mean_energy(s, np.diag([0.0, 3.0])) == pytest.approx(1.5)

    def test_mean_eigenstate(self):
        s = QuantumState.pure([0.0, 1.0])
        assert mean_energy(s, np.diag([0.0, 3.0])) == pytest.approx(3.0)

    def test_mean_superposition_pauli_x(self):
        assert mean_energy(equal_superposition(), SX) == pytest.approx(1.0)

    def test_variance_eigenstate_zero(self):
        s = QuantumState.pure([0.0, 1.0])
        assert energy_variance(s, np.diag([0.0, 3.0])) == 0.0

    def test_variance_superposition(self):
        assert energy_variance(equal_superposition(), np.diag([0.0, 2.0])) == pytest.approx(1.0)

    def test_variance_maximally_mixed(self):
        s = QuantumState.mixed(np.eye(2) / 2)
        assert energy_variance(s, np.diag([0.0, 2.0])) == pytest.approx(1.0)

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatch):
            mean_energy(equal_superposition(), np.eye(3))


class TestGroundShift:
    def test_constant_diagonal(self):
        p = HamiltonianProtocol(lambda t: np.diag([-3.0, 1.0]).astype(complex), 1.0)
        shifted = ground_shift(p)
        assert np.allclose(shifted.matrix(0.3), np.diag([0.0, 4.0]))

    def test_idempotent_when_ground_is_zero(self):
        h = np.diag([0.0, 4.0]).astype(complex)
        p = HamiltonianProtocol(lambda t: h, 1.0)
        shifted = ground_shift(p)
        for t in (0.0, 0.5, 1.0):
            assert np.max(np.abs(shifted.matrix(t) - h)) < 1e-12

    def test_landau_zener_ground_zero_everywhere(self):
        tau = 2.0
        p = HamiltonianProtocol(lambda t: (2.0 * (t - tau / 2) / 2) * SZ + 0.5 * SX, tau)
        shifted = ground_shift(p)
        for t in np.linspace(0.0, tau, 33):
            assert abs(np.linalg.eigvalsh(shifted.matrix(t))[0]) < 1e-12

    def test_global_mode_constant_offset(self):
        tau = 1.0
        p = HamiltonianProtocol(lambda t: np.diag([math.sin(t), 5.0]).astype(complex), tau)
        shifted = ground_shift(p, mode="global")
        # global minimum of the ground energy over [0, 1] is sin(0) = 0
        assert np.allclose(shifted.matrix(0.0), np.diag([0.0, 5.0]))
        assert np.linalg.eigvalsh(shifted.matrix(1.0))[0] == pytest.approx(math.sin(1.0), abs=1e-9)


class TestPropagate:
    def test_two_level_reaches_orthogonality(self, saturating_run):
        traj = saturating_run
        psi0 = traj.states[0].amplitudes
        psi_tau = traj.states[-1].amplitudes
        assert abs(np.vdot(psi0, psi_tau)) < 1e-8
        assert traj.bures_from_initial[-1] == pytest.approx(math.pi / 2, abs=1e-6)

    def test_initial_sample_trivial(self, saturating_run):
        assert saturating_run.bures_from_initial[0] == 0.0
        assert saturating_run.overlap_with_initial[0] == pytest.approx(1.0)

    def test_landau_zener_self_convergence(self):
        tau, v, gap = 4.0, 2.0, 1.0

        def make(steps):
            p = HamiltonianProtocol(
                lambda t: (v * (t - tau / 2) / 2) * SZ + (gap / 2) * SX, tau, label="lz"
            )
            ground = eigensystem(p.matrix(0.0)).eigenvectors[:, 0]
            return propagate(p, QuantumState.pure(ground), steps)

        coarse = make(2048)
        fine = make(2048 * 16)
        h_final = coarse.protocol.matrix(tau)
        excited = eigensystem(h_final).eigenvectors[:, 1]
        pop_coarse = abs(np.vdot(excited, coarse.states[-1].amplitudes)) ** 2
        pop_fine = abs(np.vdot(excited, fine.states[-1].amplitudes)) ** 2
        assert abs(pop_coarse - pop_fine) < 1e-6

    def test_rejects_dimension_mismatch(self):
        p = two_level_protocol()
        with pytest.raises(DimensionMismatch):
            propagate(p, QuantumState.pure([1.0, 0.0, 0.0]), 64)

    def test_rejects_too_few_steps(self):
        with pytest.raises(StepCountTooSmall):
            propagate(two_level_protocol(), equal_superposition(), 1)

    def test_step_unitary_is_unitary(self):
        rng = np.random.default_rng(3)
        for _ in range(10):
            u = step_unitary(random_hermitian(rng, 5, 2.0), 0.037, 1.0)
            assert np.max(np.abs(u.conj().T @ u - np.eye(5))) < 1e-10

    def test_constant_h_matches_single_exponential(self):
        rng = np.random.default_rng(4)
        h = random_hermitian(rng, 4, 1.5)
        p = HamiltonianProtocol(lambda t: h, 2.0)
        s0 = random_pure_state(rng, 4)
        traj = propagate(p, s0, 1024)
        expected = step_unitary(h, 2.0, 1.0) @ s0.amplitudes
        # global phase is physical here (same construction), compare directly
        assert np.max(np.abs(traj.states[-1].amplitudes - expected)) < 1e-9

    def test_eigenstate_is_stationary(self):
        h = np.diag([0.0, 1.0, 3.0]).astype(complex)
        p = HamiltonianProtocol(lambda t: h, 5.0)
        traj = propagate(p, QuantumState.pure([0.0, 1.0, 0.0]), 256)
        assert np.max(traj.bures_from_initial) < 1e-8

    def test_second_order_self_convergence(self):
        p = HamiltonianProtocol(lambda t: 0.5 * SZ + 1.2 * math.cos(1.7 * t) * SX, 2.0)
        s0 = QuantumState.pure([1.0, 0.0])

        def final(steps):
            return propagate(p, s0, steps).states[-1].amplitudes

        ref = final(1 << 15)
        err_n = np.linalg.norm(final(128) - ref)
        err_2n = np.linalg.norm(final(256) - ref)
        assert 2.0 < err_n / err_2n < 8.0

    def test_purity_and_trace_conserved_mixed(self):
        rng = np.random.default_rng(5)
        p = random_smooth_protocol(rng, 3, duration=1.5)
        g = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
        rho = g @ g.conj().T
        s0 = QuantumState.mixed(rho / np.trace(rho).real)
        traj = propagate(p, s0, 512)
        purities = [s.purity() for s in traj.states]
        traces = [np.trace(s.matrix).real for s in traj.states]
        assert np.max(np.abs(np.diff(purities))) < 1e-10
        assert np.max(np.abs(np.array(traces) - 1.0)) < 1e-10

    def test_variance_nonnegative_and_bures_in_range(self, small_corpus):
        for traj in small_corpus:
            assert traj.energy_variance.min() >= 0.0
            assert traj.bures_from_initial.min() >= 0.0
            assert traj.bures_from_initial.max() <= math.pi / 2 + 1e-9

    def test_overlap_only_for_pure(self, small_corpus):
        for traj in small_corpus:
            if traj.is_pure:
                assert traj.overlap_with_initial is not None
            else:
                assert traj.overlap_with_initial is None

    def test_ground_energy_zero_after_shift(self, small_corpus):
        for traj in small_corpus:
            assert np.max(np.abs(traj.ground_energy)) < 1e-9
