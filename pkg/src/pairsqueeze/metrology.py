"""Quantum Fisher information for estimating the interaction angle ``theta``.

The steady state is Gaussian with mean ``d = (alpha, conj(alpha))`` and a
pure-state covariance fixed by the squeeze parameters.  Only ``alpha`` depends
on ``theta`` (it scales as ``1/theta`` at fixed pair amplitudes), so
``d_dot = -d / theta``.

Several closed forms are provided:

* :func:`qfi_gaussian` evaluates ``2 d_dot^H sigma^{-1} d_dot`` directly.
* :func:`qfi_explicit` is the same quantity expanded in the pair amplitudes;
  it reads ``4 |alpha_dot|^2 (cosh 2r + cos(phi_r - 2 phi_alpha) sinh 2r)``.
* :func:`qfi_phase_separated` keeps the displacement phase and the squeeze
  angle in separate cosines.  It coincides with the other two only when
  ``alpha`` is real and is kept for comparison.

The finite-difference :func:`bures_qfi_oracle` works from density matrices
alone and is the reference the closed forms are checked against.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import fock
from .design import ReservoirDesign, separable_pairs_grid, steady_displacement
from .errors import (
    InconsistentResultError,
    InvalidStateError,
    OracleInvalidError,
    SingularCovarianceError,
    ValidationError,
)

_OVERFLOW = 1e300
CROSS_CHECK_RTOL = 1e-6


@dataclass(frozen=True)
class GaussianSummary:
    """Mean vector, covariance and mean derivative of a pure Gaussian state."""

    d: np.ndarray
    sigma: np.ndarray
    d_dot: np.ndarray

    def __post_init__(self) -> None:
        d = np.asarray(self.d, dtype=complex).reshape(2)
        sigma = np.asarray(self.sigma, dtype=complex).reshape(2, 2)
        d_dot = np.asarray(self.d_dot, dtype=complex).reshape(2)
        if np.max(np.abs(sigma - sigma.conj().T)) > 1e-10:
            raise ValidationError("covariance matrix must be Hermitian")
        for arr in (d, sigma, d_dot):
            arr.setflags(write=False)
        object.__setattr__(self, "d", d)
        object.__setattr__(self, "sigma", sigma)
        object.__setattr__(self, "d_dot", d_dot)

    @classmethod
    def from_squeezed(cls, alpha: complex, r: float, phi_r: float, alpha_dot: complex) -> "GaussianSummary":
        c, s = math.cosh(2 * r), math.sinh(2 * r)
        rot = complex(math.cos(phi_r), math.sin(phi_r))
        sigma = np.array([[c, -rot * s], [-rot.conjugate() * s, c]])
        return cls(np.array([alpha, np.conj(alpha)]), sigma, np.array([alpha_dot, np.conj(alpha_dot)]))

    @classmethod
    def from_design(cls, design: ReservoirDesign) -> "GaussianSummary":
        t = design.predicted_target
        return cls.from_squeezed(t.alpha, t.r, t.phi_r, -t.alpha / design.theta)


def qfi_gaussian(summary: GaussianSummary) -> float:
    """``2 d_dot^H sigma^{-1} d_dot``.

    Raises
    ------
    SingularCovarianceError
        If ``sigma`` is numerically singular.
    """
    sigma = summary.sigma
    if abs(np.linalg.det(sigma)) < 1e-12 * max(np.max(np.abs(sigma)) ** 2, 1e-300):
        raise SingularCovarianceError("covariance matrix is singular")
    dd = summary.d_dot
    return float(2.0 * np.real(np.vdot(dd, np.linalg.solve(sigma, dd))))


def _amplitude_parts(design: ReservoirDesign):
    p = design.pair
    if not design.mu > 1:
        raise ValidationError(f"mu must exceed 1, got {design.mu}")
    gap = abs(p.beta_gg) ** 2 - abs(p.beta_ee) ** 2
    drive = p.epsilon * np.conj(p.beta_gg) + np.conj(p.epsilon) * p.beta_ee
    ratio = abs(p.beta_ee) / abs(p.beta_gg)  # 1 / mu, finite when beta_ee = 0
    return p, gap, drive, ratio


def qfi_explicit(design: ReservoirDesign) -> float:
    """QFI expanded in the pair amplitudes.

    ``4 |drive|^2 / (theta^4 gap^2) * (1 + mu^2 - 2 mu cos(phi_ee - phi_gg - 2 phi_alpha)) / (mu^2 - 1)``
    with ``drive = eps conj(beta_gg) + conj(eps) beta_ee`` and
    ``gap = |beta_gg|^2 - |beta_ee|^2``, written in terms of ``1/mu`` so the
    unsqueezed case ``beta_ee = 0`` is finite.
    """
    p, gap, drive, t = _amplitude_parts(design)
    phases = design.phases
    tilt = phases["ee"] - phases["gg"] - 2 * phases["alpha"]
    shape = (1 + t**2 - 2 * t * math.cos(tilt)) / (1 - t**2)
    return float(4 * abs(drive) ** 2 / (design.theta**4 * gap**2) * shape)


def qfi_phase_separated(design: ReservoirDesign) -> float:
    """QFI with the displacement phase and squeeze angle in separate cosines.

    ``4 |alpha_dot|^2 ((1 + mu^2) cos 2 phi_alpha - 2 mu cos(phi_ee - phi_gg)) / (mu^2 - 1)``.
    Equals :func:`qfi_explicit` when ``alpha`` is real and differs otherwise.
    """
    p, gap, drive, t = _amplitude_parts(design)
    phases = design.phases
    shape = ((1 + t**2) * math.cos(2 * phases["alpha"]) - 2 * t * math.cos(phases["ee"] - phases["gg"])) / (1 - t**2)
    return float(4 * abs(drive) ** 2 / (design.theta**4 * gap**2) * shape)


def _rate_adjusted_display(design: ReservoirDesign, alignment_weight: float, phase_separated: bool) -> float:
    p = design.pair
    phases = design.phases
    g, e = abs(p.beta_gg), abs(p.beta_ee)
    t = e / g
    alignment = phases["gg"] + phases["ee"] - alignment_weight * phases["epsilon"]
    magnitude = 16 * abs(p.epsilon) ** 2 * (g**2 + e**2 + 2 * g * e * math.cos(alignment))
    if phase_separated:
        shape = (1 + t**2) * math.cos(2 * phases["alpha"]) - 2 * t * math.cos(phases["ee"] - phases["gg"])
    else:
        shape = 1 + t**2 - 2 * t * math.cos(phases["ee"] - phases["gg"] - 2 * phases["alpha"])
    return float(magnitude * shape / (1 - t**2))


def rate_adjusted_qfi(design: ReservoirDesign) -> float:
    """Rate-adjusted figure of merit ``J_Q kappa^2``.

    Computed as ``qfi_explicit * kappa^2`` and, independently, from the
    amplitude form

    ``16 |eps|^2 (|b_gg|^2 + |b_ee|^2 + 2 |b_gg b_ee| cos(phi_gg + phi_ee - 2 phi_eps)) * shape``

    in which ``theta`` never appears (``shape`` is the squeeze factor of
    :func:`qfi_explicit`).  The product simplifies further to
    ``16 |eps|^2 (|b_gg|^2 - |b_ee|^2)``.

    Raises
    ------
    InconsistentResultError
        If the two evaluations differ by more than ``1e-6`` relative.
    """
    via_rate = qfi_explicit(design) * design.kappa**2
    via_amplitudes = _rate_adjusted_display(design, alignment_weight=2.0, phase_separated=False)
    scale = max(abs(via_rate), abs(via_amplitudes), 1e-300)
    if abs(via_rate - via_amplitudes) > CROSS_CHECK_RTOL * scale and scale > 1e-300:
        raise InconsistentResultError(f"rate-adjusted QFI mismatch: {via_rate!r} vs {via_amplitudes!r}")
    return float(via_rate)


def rate_adjusted_qfi_phase_separated(design: ReservoirDesign, alignment_weight: float = 1.0) -> float:
    """Amplitude form of ``J_Q kappa^2`` with a single ``arg(epsilon)`` in the alignment
    cosine and the phase-separated shape factor; kept for comparison only."""
    return _rate_adjusted_display(design, alignment_weight=alignment_weight, phase_separated=True)


def entangled_qfi_bound(epsilon_magnitude: float, mu: float) -> float:
    """``16 |eps|^2 (mu + 1)^3 / (mu - 1)^3``; infinite as ``mu -> 1``."""
    if mu <= 1:
        raise ValidationError(f"mu must exceed 1, got {mu}")
    with np.errstate(divide="ignore", over="ignore"):
        value = 16 * epsilon_magnitude**2 * (mu + 1) ** 3 / (mu - 1) ** 3
    return value if math.isfinite(value) and value < _OVERFLOW else math.inf


def rate_adjusted_qfi_arrays(gg, ge, eg, ee) -> np.ndarray:
    """Vectorized ``J_Q kappa^2`` over arrays of amplitudes (independent of ``theta``)."""
    theta = 1.0
    alpha = steady_displacement(gg, ge, eg, ee, theta)
    t = np.abs(ee) / np.abs(gg)
    tilt = np.angle(ee) - np.angle(gg) - 2 * np.angle(alpha)
    shape = (1 + t**2 - 2 * t * np.cos(tilt)) / (1 - t**2)
    kappa = 2 * theta**2 * (np.abs(gg) ** 2 - np.abs(ee) ** 2)
    return 4 * np.abs(alpha) ** 2 / theta**2 * shape * kappa**2


@dataclass(frozen=True)
class QfiScan:
    """Result of the separable-pair scan of ``J_Q kappa^2``.

    ``conditions_met`` counts grid points that satisfy all three phase
    conditions ``phi_ee - phi_gg = pi``, ``phi_ge - phi_eg = 0`` and
    ``phi_alpha = 0`` to within ``pi / grid_resolution``.
    """

    sup: float
    bound: float
    margin: float
    argmax: dict[str, float]
    conditions_met: int


def separable_qfi_scan(epsilon_magnitude: float, mu: float, grid_resolution: int = 256) -> QfiScan:
    """Grid supremum of ``J_Q kappa^2`` over separable pairs with fixed ``|eps|`` and ``mu``."""
    gg, ge, eg, ee, delta = separable_pairs_grid(epsilon_magnitude, mu, grid_resolution)
    values = rate_adjusted_qfi_arrays(gg, ge, eg, ee)
    idx = int(np.argmax(values))
    alpha_phase = np.angle(steady_displacement(gg, ge, eg, ee, 1.0))
    wrap = lambda x: np.abs(np.angle(np.exp(1j * x)))  # noqa: E731
    tol = math.pi / grid_resolution
    met = (
        (wrap(np.angle(ee) - np.angle(gg) - math.pi) <= tol)
        & (wrap(np.angle(ge) - np.angle(eg)) <= tol)
        & (wrap(alpha_phase) <= tol)
    )
    sup = float(values.flat[idx])
    bound = entangled_qfi_bound(epsilon_magnitude, mu)
    return QfiScan(
        sup=sup,
        bound=bound,
        margin=bound - sup,
        argmax={
            "squeeze_phase": float(np.angle(ee.flat[idx] / gg.flat[idx])),
            "phase_difference": float(np.angle(np.exp(1j * delta.flat[idx]))),
            "alpha_phase": float(alpha_phase.flat[idx]),
        },
        conditions_met=int(np.count_nonzero(met)),
    )


def bures_qfi_oracle(
    state_builder: Callable[[float], np.ndarray],
    theta: float,
    delta: float | None = None,
) -> float:
    """Finite-difference QFI from the Bures distance between neighbouring states.

    Uses ``d_B^2 = 2 - 2 F`` and ``J_Q ~ 4 d_B^2 / delta^2``, averaging the
    forward step to ``theta + delta`` and the backward step to
    ``theta - delta``.

    Raises
    ------
    OracleInvalidError
        If the builder returns something that is not a valid density matrix.
    """
    delta = 1e-3 * theta if delta is None else delta
    if delta <= 0:
        raise ValidationError("delta must be positive")

    def build(x: float) -> np.ndarray:
        try:
            return fock.check_density_matrix(fock.as_density_matrix(state_builder(x)))
        except InvalidStateError as exc:
            raise OracleInvalidError(f"state at theta={x!r} is not a valid density matrix: {exc}") from exc

    center = build(theta)
    estimates = [8.0 * (1.0 - fock.fidelity(center, build(theta + s * delta))) / delta**2 for s in (1.0, -1.0)]
    return float(np.mean(estimates))


def cramer_rao(J: float, n: int = 1) -> float:
    """Quantum Cramer-Rao bound ``1 / sqrt(n J)`` on the estimator spread."""
    if J <= 0:
        raise ValidationError(f"Fisher information must be positive, got {J}")
    if n < 1 or int(n) != n:
        raise ValidationError(f"number of repetitions must be a positive integer, got {n}")
    return 1.0 / math.sqrt(n * J)


__all__ = [
    "GaussianSummary",
    "QfiScan",
    "bures_qfi_oracle",
    "cramer_rao",
    "entangled_qfi_bound",
    "qfi_explicit",
    "qfi_gaussian",
    "qfi_phase_separated",
    "rate_adjusted_qfi",
    "rate_adjusted_qfi_arrays",
    "rate_adjusted_qfi_phase_separated",
    "separable_qfi_scan",
]
