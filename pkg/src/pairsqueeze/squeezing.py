"""Displaced squeezed states, quadrature statistics and Wigner functions.

Quadratures follow ``X_phi = (a exp(-i phi) + a^dagger exp(i phi)) / 2`` so the
vacuum variance is 1/4 and the squeezed state ``D(alpha) S(r exp(i phi_r))|0>``
has its narrow quadrature at ``phi = phi_r / 2`` with standard deviation
``exp(-r) / 2``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm

from . import fock
from .errors import AmplitudeTooLargeError, SqueezeTooLargeError, TruncationOverflowError

MAX_SQUEEZE = 2.0
STATE_LEAKAGE_LIMIT = 1e-8


def _wrap_angle(phi: float) -> float:
    wrapped = math.fmod(phi, 2 * math.pi)
    if wrapped < 0:
        wrapped += 2 * math.pi
    # fmod can return exactly 2*pi after the shift for tiny negative inputs
    return 0.0 if wrapped >= 2 * math.pi else wrapped


@dataclass(frozen=True)
class SqueezedTarget:
    """Parameters of the pure state ``D(alpha) S(r exp(i phi_r)) |0>``.

    A negative squeeze magnitude is folded into the angle on construction, so
    ``r >= 0`` and ``0 <= phi_r < 2 pi`` always hold.
    """

    alpha: complex = 0j
    r: float = 0.0
    phi_r: float = 0.0

    def __post_init__(self) -> None:
        r = float(self.r)
        phi = float(self.phi_r)
        if r < 0:
            r, phi = -r, phi + math.pi
        object.__setattr__(self, "alpha", complex(self.alpha))
        object.__setattr__(self, "r", r)
        object.__setattr__(self, "phi_r", _wrap_angle(phi))

    @property
    def zeta(self) -> complex:
        """Complex squeezing parameter ``r exp(i phi_r)``."""
        return self.r * np.exp(1j * self.phi_r)


def displacement_op(alpha: complex, dim: int) -> np.ndarray:
    """Matrix exponential of the truncated generator ``alpha a^dagger - conj(alpha) a``.

    Raises
    ------
    AmplitudeTooLargeError
        If ``|alpha|^2 > dim / 4``.
    """
    if abs(alpha) ** 2 > dim / 4:
        raise AmplitudeTooLargeError(
            f"|alpha|^2 = {abs(alpha) ** 2:.4g} exceeds dim/4 = {dim / 4:.4g}; increase dim"
        )
    a = fock.annihilation_op(dim)
    return expm(alpha * a.conj().T - np.conj(alpha) * a)


def squeezing_op(zeta: complex, dim: int) -> np.ndarray:
    """Matrix exponential of ``(conj(zeta) a^2 - zeta a^dagger^2) / 2``.

    Raises
    ------
    SqueezeTooLargeError
        If ``|zeta| > 2``.
    """
    if abs(zeta) > MAX_SQUEEZE:
        raise SqueezeTooLargeError(f"|zeta| = {abs(zeta):.4g} exceeds {MAX_SQUEEZE}")
    a = fock.annihilation_op(dim)
    ad = a.conj().T
    return expm(0.5 * (np.conj(zeta) * (a @ a) - zeta * (ad @ ad)))


def make_state(target: SqueezedTarget, dim: int = fock.DEFAULT_DIM) -> np.ndarray:
    """State vector of ``target`` in a ``dim``-level truncation.

    The operators are applied in a larger padded space and the result is cut
    back to ``dim`` levels, so the low-level amplitudes are not contaminated
    by the truncated generators.  The cut is only accepted when it discards
    less than ``1e-8`` of the norm.

    Raises
    ------
    TruncationOverflowError
        If the state has more than ``1e-8`` population in the top five levels
        of the requested space, or beyond it.
    """
    if abs(target.alpha) ** 2 > dim / 4:
        raise AmplitudeTooLargeError(f"|alpha|^2 = {abs(target.alpha) ** 2:.4g} exceeds dim/4")
    if target.r > MAX_SQUEEZE:
        raise SqueezeTooLargeError(f"r = {target.r:.4g} exceeds {MAX_SQUEEZE}")
    big = dim + dim // 2 + 10
    vac = fock.fock_state(0, big)
    psi = displacement_op(target.alpha, big) @ (squeezing_op(target.zeta, big) @ vac)
    outside = float(np.sum(np.abs(psi[dim:]) ** 2))
    psi = psi[:dim].copy()
    top = fock.leakage(psi)
    if outside + top > STATE_LEAKAGE_LIMIT:
        raise TruncationOverflowError(
            f"target state has {outside + top:.3g} population near or beyond the truncation; increase dim"
        )
    return psi


def coherent_state(alpha: complex, dim: int = fock.DEFAULT_DIM) -> np.ndarray:
    return make_state(SqueezedTarget(alpha, 0.0, 0.0), dim)


def _second_moments(rho: np.ndarray) -> tuple[complex, complex, float]:
    """Mean ``<a>``, central ``<a^2>`` and central ``<a^dagger a>``."""
    rho = fock.as_density_matrix(rho)
    a = fock.annihilation_op(rho.shape[0])
    mean = np.trace(a @ rho)
    second = np.trace(a @ a @ rho) - mean**2
    occupation = np.real(np.trace(a.conj().T @ a @ rho)) - abs(mean) ** 2
    return complex(mean), complex(second), float(occupation)


def quadrature_variance(rho: np.ndarray, phi: float) -> float:
    """Variance of ``X_phi`` evaluated from the ladder-operator moments."""
    _, second, occupation = _second_moments(rho)
    return 0.25 * (2.0 * np.real(np.exp(-2j * phi) * second) + 2.0 * occupation + 1.0)


def quadrature_extrema(rho: np.ndarray) -> tuple[float, float, float]:
    """Smallest and largest quadrature variance, and the angle of the smallest.

    Returns
    -------
    (var_min, var_max, phi_min) with ``phi_min`` in ``[0, pi)``.
    """
    _, second, occupation = _second_moments(rho)
    base = 2.0 * occupation + 1.0
    spread = 2.0 * abs(second)
    phi_min = math.fmod((np.angle(second) - math.pi) / 2 + 2 * math.pi, math.pi)
    return 0.25 * (base - spread), 0.25 * (base + spread), phi_min


def wigner(rho: np.ndarray, x_grid: np.ndarray, p_grid: np.ndarray, pad: int | None = None) -> np.ndarray:
    """Wigner function from the displaced-parity formula.

    ``W(x, p) = (2/pi) tr[rho D(beta) P D(beta)^dagger]`` with ``beta = x + i p``.
    Because ``D(x + ip)`` equals ``D(x) D(ip)`` up to a phase that cancels, the
    grid only needs one displacement per x value and one per p value.

    Returns
    -------
    Array of shape ``(len(x_grid), len(p_grid))``.
    """
    rho = fock.as_density_matrix(rho)
    x_grid = np.asarray(x_grid, dtype=float)
    p_grid = np.asarray(p_grid, dtype=float)
    dim = rho.shape[0]
    pad = dim // 2 + 20 if pad is None else pad
    big = dim + pad
    work = np.zeros((big, big), dtype=complex)
    work[:dim, :dim] = rho

    a = fock.annihilation_op(big)
    # D(x) = exp(i x K) with K = -i (a^dagger - a); D(ip) = exp(i p Q) with Q = a + a^dagger.
    k_vals, k_vecs = np.linalg.eigh(-1j * (a.conj().T - a))
    q_vals, q_vecs = np.linalg.eigh(a + a.conj().T)
    parity = np.where(np.arange(big) % 2 == 0, 1.0, -1.0)

    disp_x = np.einsum("ik,xk,jk->xij", k_vecs, np.exp(1j * np.outer(x_grid, k_vals)), k_vecs.conj())
    disp_p = np.einsum("ik,pk,jk->pij", q_vecs, np.exp(1j * np.outer(p_grid, q_vals)), q_vecs.conj())
    shifted = np.conj(np.transpose(disp_x, (0, 2, 1))) @ work @ disp_x
    parity_p = (disp_p * parity) @ np.conj(np.transpose(disp_p, (0, 2, 1)))
    values = np.einsum("xab,pba->xp", shifted, parity_p)
    return (2.0 / np.pi) * values.real
