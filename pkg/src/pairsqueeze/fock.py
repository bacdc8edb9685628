"""Linear algebra on a truncated oscillator Fock space.

Operators are plain ``(dim, dim)`` complex :class:`numpy.ndarray` objects and
pure states are length-``dim`` vectors.  The truncation dimension is always the
array size, so mixing operands of different size fails loudly inside numpy or
in the explicit checks below.
"""

from __future__ import annotations

import functools
from typing import Callable

import numpy as np

from .errors import InvalidDimensionError, InvalidStateError

DEFAULT_DIM = 60
#: Number of highest Fock levels whose population is reported as leakage.
LEAKAGE_LEVELS = 5

HERMITICITY_TOL = 1e-10
TRACE_TOL = 1e-8
PSD_TOL = 1e-8
NORM_TOL = 1e-10
#: Eigenvalues below this are treated as hard evidence of a non-physical state.
NEGATIVITY_LIMIT = 1e-6


def _check_dim(dim: int) -> int:
    if int(dim) != dim or dim < 2:
        raise InvalidDimensionError(f"truncation dimension must be an integer >= 2, got {dim!r}")
    return int(dim)


def _readonly(arr: np.ndarray) -> np.ndarray:
    arr.setflags(write=False)
    return arr


@functools.lru_cache(maxsize=32)
def annihilation_op(dim: int) -> np.ndarray:
    """Return the lowering operator ``a`` with ``a[n-1, n] = sqrt(n)``.

    The returned array is read-only because it is cached.
    """
    dim = _check_dim(dim)
    return _readonly(np.diag(np.sqrt(np.arange(1, dim, dtype=float)), k=1).astype(complex))


def creation_op(dim: int) -> np.ndarray:
    """Return the raising operator ``a^dagger``."""
    return annihilation_op(dim).conj().T.copy()


def number_op(dim: int) -> np.ndarray:
    """Return the photon-number operator ``diag(0, 1, ..., dim-1)``."""
    return np.diag(np.arange(_check_dim(dim), dtype=float)).astype(complex)


def identity_op(dim: int) -> np.ndarray:
    return np.eye(_check_dim(dim), dtype=complex)


def number_function_op(f: Callable[[int], complex], dim: int) -> np.ndarray:
    """Diagonal operator ``diag(f(0), ..., f(dim-1))`` of a function of the photon number."""
    dim = _check_dim(dim)
    return np.diag(np.array([f(n) for n in range(dim)], dtype=complex))


def sinc_theta(theta: float, n: np.ndarray | int) -> np.ndarray:
    """Regularized ``sin(theta*sqrt(n))/sqrt(n)``, equal to ``theta`` at ``n = 0``."""
    n = np.asarray(n, dtype=float)
    root = np.sqrt(n)
    safe = np.where(n > 0, root, 1.0)
    return np.where(n > 0, np.sin(theta * root) / safe, theta)


def fock_state(n: int, dim: int) -> np.ndarray:
    """Number state ``|n>`` as a vector."""
    dim = _check_dim(dim)
    if not 0 <= n < dim:
        raise InvalidDimensionError(f"Fock level {n} outside truncation 0..{dim - 1}")
    psi = np.zeros(dim, dtype=complex)
    psi[n] = 1.0
    return psi


def projector(psi: np.ndarray) -> np.ndarray:
    """Density matrix ``|psi><psi|`` of a state vector."""
    psi = np.asarray(psi, dtype=complex)
    return np.outer(psi, psi.conj())


def as_density_matrix(state: np.ndarray) -> np.ndarray:
    """Accept either a state vector or a density matrix and return a density matrix."""
    state = np.asarray(state, dtype=complex)
    if state.ndim == 1:
        return projector(state)
    if state.ndim == 2 and state.shape[0] == state.shape[1]:
        return state
    raise InvalidStateError(f"expected a state vector or square matrix, got shape {state.shape}")


def check_pure_state(psi: np.ndarray, tol: float = NORM_TOL) -> np.ndarray:
    """Validate a state vector (unit norm within ``tol``) and return it as complex."""
    psi = np.asarray(psi, dtype=complex)
    if psi.ndim != 1:
        raise InvalidStateError(f"state vector must be one-dimensional, got shape {psi.shape}")
    _check_dim(psi.size)
    norm = np.linalg.norm(psi)
    if abs(norm - 1.0) > tol:
        raise InvalidStateError(f"state vector norm {norm:.12g} deviates from 1")
    return psi


def check_density_matrix(
    rho: np.ndarray,
    *,
    herm_tol: float = HERMITICITY_TOL,
    trace_tol: float = TRACE_TOL,
    psd_tol: float = PSD_TOL,
) -> np.ndarray:
    """Validate Hermiticity, unit trace and positivity; never modifies the input.

    Raises
    ------
    InvalidStateError
        If any invariant is violated beyond its tolerance.
    """
    rho = np.asarray(rho, dtype=complex)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise InvalidStateError(f"density matrix must be square, got shape {rho.shape}")
    _check_dim(rho.shape[0])
    asym = np.max(np.abs(rho - rho.conj().T))
    if asym > herm_tol:
        raise InvalidStateError(f"density matrix not Hermitian (max |rho - rho^H| = {asym:.3g})")
    tr = np.trace(rho)
    if abs(tr - 1.0) > trace_tol:
        raise InvalidStateError(f"density matrix trace {tr.real:.12g} deviates from 1")
    lowest = np.linalg.eigvalsh(0.5 * (rho + rho.conj().T))[0]
    if lowest < -psd_tol:
        raise InvalidStateError(f"density matrix has negative eigenvalue {lowest:.3g}")
    return rho


def _rank_cutoff(values: np.ndarray, dim: int) -> float:
    # Same rule numpy uses for matrix rank: anything below dim * eps * max is noise.
    return max(values.max(), 0.0) * dim * np.finfo(float).eps


def fidelity(rho1: np.ndarray, rho2: np.ndarray) -> float:
    """Uhlmann fidelity ``tr sqrt(sqrt(rho1) rho2 sqrt(rho1))``.

    Eigenvalues below the numerical rank cutoff are dropped before taking
    square roots.  Without this step, round-off eigenvalues of order 1e-17
    contribute roughly 1e-9 each and spoil the finite-difference uses of the
    fidelity (Bures distances between nearby states).

    Raises
    ------
    InvalidStateError
        If either input has an eigenvalue below ``-1e-6`` or the shapes differ.
    """
    rho1 = as_density_matrix(rho1)
    rho2 = as_density_matrix(rho2)
    if rho1.shape != rho2.shape:
        raise InvalidDimensionError(f"shape mismatch {rho1.shape} vs {rho2.shape}")
    dim = rho1.shape[0]
    rho1 = 0.5 * (rho1 + rho1.conj().T)
    rho2 = 0.5 * (rho2 + rho2.conj().T)
    w1, v1 = np.linalg.eigh(rho1)
    if w1[0] < -NEGATIVITY_LIMIT or np.linalg.eigvalsh(rho2)[0] < -NEGATIVITY_LIMIT:
        raise InvalidStateError("fidelity requires positive semidefinite inputs")
    keep = w1 > _rank_cutoff(w1, dim)
    root = v1[:, keep] * np.sqrt(w1[keep])
    inner = root.conj().T @ rho2 @ root
    w = np.linalg.eigvalsh(0.5 * (inner + inner.conj().T))
    if w.size == 0:
        return 0.0
    w = w[w > _rank_cutoff(w, dim)]
    return float(min(np.sqrt(w).sum(), 1.0))


def trace_distance(rho1: np.ndarray, rho2: np.ndarray) -> float:
    """Half the trace norm of ``rho1 - rho2``.

    For Hermitian arguments the singular values of the difference are the
    absolute eigenvalues, which is what is computed here.
    """
    rho1 = as_density_matrix(rho1)
    rho2 = as_density_matrix(rho2)
    if rho1.shape != rho2.shape:
        raise InvalidDimensionError(f"shape mismatch {rho1.shape} vs {rho2.shape}")
    diff = rho1 - rho2
    diff = 0.5 * (diff + diff.conj().T)
    return float(0.5 * np.abs(np.linalg.eigvalsh(diff)).sum())


def leakage(state: np.ndarray, levels: int = LEAKAGE_LEVELS) -> float:
    """Population in the ``levels`` highest Fock levels (truncation monitor)."""
    state = np.asarray(state, dtype=complex)
    if state.ndim == 1:
        pops = np.abs(state) ** 2
    else:
        pops = np.real(np.diag(state))
    return float(pops[-levels:].sum())


def expectation(op: np.ndarray, state: np.ndarray) -> complex:
    """``tr(op rho)`` for a density matrix, or ``<psi|op|psi>`` for a vector."""
    state = np.asarray(state, dtype=complex)
    if state.ndim == 1:
        return complex(np.vdot(state, op @ state))
    return complex(np.trace(op @ state))
