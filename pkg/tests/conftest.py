"""Shared builders for random states, protocols, and reference runs."""

import math

import numpy as np
import pytest

from qspeed import HamiltonianProtocol, QuantumState, ground_shift, propagate


def random_hermitian(rng, dim, scale=1.0):
    a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    return scale * (a + a.conj().T) / (2.0 * math.sqrt(dim))


def random_pure_state(rng, dim):
    v = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return QuantumState.pure(v / np.linalg.norm(v))


def random_mixed_state(rng, dim, floor=0.0):
    g = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    rho = g @ g.conj().T + floor * np.eye(dim)
    return QuantumState.mixed(rho / np.trace(rho).real)


def random_unitary(rng, dim):
    g = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    q, r = np.linalg.qr(g)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_smooth_protocol(rng, dim, duration=None, hbar=1.0, scale=1.0, label="random"):
    """Fixed Hermitian part plus two smoothly modulated Hermitian drives."""
    if duration is None:
        duration = float(rng.uniform(0.8, 2.5))
    a = random_hermitian(rng, dim, scale)
    b = random_hermitian(rng, dim, scale)
    c = random_hermitian(rng, dim, scale)
    w1, w2 = rng.uniform(0.5, 2.0, size=2)
    p1, p2 = rng.uniform(0.0, 2.0 * math.pi, size=2)

    def evaluator(t):
        return a + math.sin(w1 * t + p1) * b + math.cos(w2 * t + p2) * c

    return HamiltonianProtocol(evaluator, duration, hbar, label, dim)


def two_level_protocol(energy=1.0, duration=None, hbar=1.0, label="two-level"):
    """Constant diag(0, E); the equal-superposition run saturates the bounds."""
    if duration is None:
        duration = math.pi * hbar / energy
    h = np.diag([0.0, energy]).astype(complex)
    return HamiltonianProtocol(lambda t: h, duration, hbar, label, 2)


def equal_superposition(dim=2):
    return QuantumState.pure(np.ones(dim) / math.sqrt(dim))


def run_random(rng, dim, pure, steps=512, scale=1.0, hbar=1.0, duration=None):
    """One ground-shifted random run; returns the trajectory."""
    protocol = random_smooth_protocol(rng, dim, duration=duration, hbar=hbar, scale=scale)
    state = random_pure_state(rng, dim) if pure else random_mixed_state(rng, dim)
    return propagate(ground_shift(protocol), state, steps)


@pytest.fixture(scope="session")
def saturating_run():
    """Equal superposition under constant diag(0, 1) for tau = pi."""
    return propagate(ground_shift(two_level_protocol()), equal_superposition(), 2048)


@pytest.fixture(scope="session")
def small_corpus():
    """A few dozen seeded random runs (pure and mixed, dims 2..6) at N=512."""
    rng = np.random.default_rng(1234)
    runs = []
    for i in range(24):
        dim = 2 + i % 5
        runs.append(run_random(rng, dim, pure=i % 2 == 0))
    return runs
