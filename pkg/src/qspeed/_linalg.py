"""Internal dense Hermitian linear algebra helpers.

All matrix functions here go through ``numpy.linalg.eigh`` on (stacks of)
Hermitian matrices; eigenvalues that should be nonnegative are clamped at
zero below a small threshold and rejected below an error threshold.
"""

from __future__ import annotations

import numpy as np

from .errors import NotHermitian, NotPositive

# Clamp eigenvalues in [EIG_NEG_ERROR, 0) to zero; reject below EIG_NEG_ERROR.
EIG_NEG_ERROR = -1e-6
HERMITIAN_TOL = 1e-10
# Eigenvalues below this fraction of the largest are eigensolver noise for
# rank-deficient operators; sqrt would amplify them from eps to sqrt(eps).
RANK_FLOOR = 1e-14


def hermitian_deviation(m: np.ndarray) -> float:
    """Max elementwise deviation of m from its conjugate transpose."""
    return float(np.max(np.abs(m - m.conj().T)))


def require_hermitian(m: np.ndarray, tol: float = HERMITIAN_TOL, what: str = "matrix") -> np.ndarray:
    dev = hermitian_deviation(m)
    if dev > tol:
        raise NotHermitian(f"{what} deviates from Hermiticity by {dev:.3e} (tol {tol:.1e})")
    return m


def symmetrize(m: np.ndarray) -> np.ndarray:
    """Hermitian part (m + m†)/2, for stacks or single matrices."""
    return (m + np.conj(np.swapaxes(m, -1, -2))) / 2


def eigh_checked(h: np.ndarray, tol: float = HERMITIAN_TOL, what: str = "matrix"):
    """Ascending eigendecomposition after a Hermiticity check."""
    require_hermitian(h, tol, what)
    return np.linalg.eigh(h)


def clamped_nonneg(w: np.ndarray, what: str = "operator") -> np.ndarray:
    """Clamp small negative eigenvalues to 0; reject genuine negativity."""
    lo = float(np.min(w)) if w.size else 0.0
    if lo < EIG_NEG_ERROR:
        raise NotPositive(f"{what} has eigenvalue {lo:.3e} below {EIG_NEG_ERROR:.1e}")
    return np.clip(w, 0.0, None)


def _floor_noise(w: np.ndarray) -> np.ndarray:
    top = np.max(w, axis=-1, keepdims=True)
    return np.where(w < RANK_FLOOR * np.maximum(top, 0.0), 0.0, w)


def psd_sqrt(rho: np.ndarray, what: str = "state") -> np.ndarray:
    """Hermitian square root of a positive semidefinite matrix."""
    w, v = eigh_checked(rho, what=what)
    w = _floor_noise(clamped_nonneg(w, what))
    return (v * np.sqrt(w)) @ v.conj().T


def fidelity_from_sqrt(sqrt_a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Uhlmann fidelity [tr sqrt(sqrt_a b sqrt_a)]^2 given a precomputed root.

    ``b`` may be a single matrix or a stack (..., d, d); returns a scalar or
    a stack of scalars, clipped into [0, 1].
    """
    inner = symmetrize(sqrt_a @ b @ sqrt_a)
    lam = _floor_noise(np.clip(np.linalg.eigvalsh(inner), 0.0, None))
    f = np.sqrt(lam).sum(axis=-1) ** 2
    return np.clip(f, 0.0, 1.0)


def bures_angle_from_fidelity(f) -> np.ndarray:
    """arccos(sqrt F) with the argument clamped into [0, 1]."""
    return np.arccos(np.clip(np.sqrt(np.clip(f, 0.0, 1.0)), 0.0, 1.0))
