"""Steady-state prediction and inverse design of squeezing reservoirs.

For a pair state with ``|beta_ee| < |beta_gg|`` and small
``epsilon = beta_ge + beta_eg`` the oscillator relaxes to the displaced
squeezed state with

* ``tanh r = |beta_ee| / |beta_gg|``,
* squeeze angle ``phi_r = arg(beta_ee) - arg(beta_gg) + pi`` (with ``r >= 0``),
* ``alpha = (epsilon conj(beta_gg) + conj(epsilon) beta_ee) / (theta (|beta_gg|^2 - |beta_ee|^2))``,
* relaxation rate ``kappa = 2 theta^2 (|beta_gg|^2 - |beta_ee|^2)`` per pair.

The squeeze angle convention was fixed against the exact Kraus dynamics: the
steady state of the alternating stream is squeezed along ``X_0``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import NoConvergenceError, OutsideValidityError, UnreachableTargetError, ValidationError
from .interaction import SEPARABILITY_TOL, QubitPairState
from .squeezing import SqueezedTarget

EPSILON_CEILING = 0.2
EPSILON_WARNING = 0.05
_OVERFLOW = 1e300


class ValidityWarning(UserWarning):
    """Parameters are allowed but close to where the effective model degrades."""


def _phase(z: complex) -> float:
    return float(np.angle(z)) if z != 0 else 0.0


@dataclass(frozen=True)
class ReservoirDesign:
    """A pair state together with the steady state and rate it produces."""

    theta: float
    pair: QubitPairState
    epsilon: complex
    mu: float
    predicted_target: SqueezedTarget
    kappa: float

    @property
    def phases(self) -> dict[str, float]:
        """Arguments of the amplitudes, of ``epsilon`` and of the displacement."""
        p = self.pair
        return {
            "gg": _phase(p.beta_gg),
            "ge": _phase(p.beta_ge),
            "eg": _phase(p.beta_eg),
            "ee": _phase(p.beta_ee),
            "epsilon": _phase(self.epsilon),
            "alpha": _phase(self.predicted_target.alpha),
        }


def steady_displacement(beta_gg, beta_ge, beta_eg, beta_ee, theta):
    """Steady-state displacement from raw amplitudes (broadcasts over arrays)."""
    eps = beta_ge + beta_eg
    gap = np.abs(beta_gg) ** 2 - np.abs(beta_ee) ** 2
    return (eps * np.conj(beta_gg) + np.conj(eps) * beta_ee) / (theta * gap)


def check_epsilon(eps_magnitude: float, warn: bool = True) -> None:
    """Enforce the ``|epsilon| <= 0.2`` ceiling and warn above 0.05."""
    if eps_magnitude > EPSILON_CEILING:
        raise OutsideValidityError(f"|epsilon| = {eps_magnitude:.4g} exceeds the validity ceiling {EPSILON_CEILING}")
    if warn and eps_magnitude > EPSILON_WARNING:
        warnings.warn(
            f"|epsilon| = {eps_magnitude:.4g} is above {EPSILON_WARNING}; second-order predictions lose accuracy",
            ValidityWarning,
            stacklevel=3,
        )


def predict_steady_state(pair: QubitPairState, theta: float, *, warn: bool = True) -> ReservoirDesign:
    """Predicted steady state and relaxation rate for a pair stream.

    Raises
    ------
    NoConvergenceError
        If ``|beta_ee| >= |beta_gg|``.
    OutsideValidityError
        If ``|epsilon| > 0.2``.
    """
    if theta <= 0:
        raise ValidationError(f"theta must be positive, got {theta}")
    g, e = abs(pair.beta_gg), abs(pair.beta_ee)
    if e >= g:
        raise NoConvergenceError(f"|beta_ee| = {e:.6g} must be smaller than |beta_gg| = {g:.6g}")
    check_epsilon(abs(pair.epsilon), warn)
    if e == 0:
        r, phi_r = 0.0, 0.0
    else:
        r = math.atanh(e / g)
        phi_r = _phase(pair.beta_ee) - _phase(pair.beta_gg) + math.pi
    alpha = complex(steady_displacement(pair.beta_gg, pair.beta_ge, pair.beta_eg, pair.beta_ee, theta))
    kappa = 2.0 * theta**2 * (g**2 - e**2)
    return ReservoirDesign(theta, pair, pair.epsilon, pair.mu, SqueezedTarget(alpha, r, phi_r), kappa)


def tune_pair_for_target(
    target: SqueezedTarget,
    theta: float,
    epsilon_magnitude: float | None = None,
) -> QubitPairState:
    """Construct a pair state whose predicted steady state is ``target``.

    The gauge is ``arg(beta_gg) = 0`` with ``|beta_ee| / |beta_gg| = tanh r``
    and the squeeze angle set through ``arg(beta_ee)``.  The displacement
    equation is linear in ``epsilon`` over the reals, so:

    * with ``epsilon_magnitude=None`` the split ``beta_ge = beta_eg = epsilon / 2``
      is used and ``epsilon`` (modulus and phase) is solved for directly;
    * with a prescribed ``|epsilon|`` the phase of ``epsilon`` fixes the
      phase of ``alpha``, and the modulus of ``alpha`` is reached by putting
      extra weight into an antisymmetric part ``beta_ge - beta_eg``, which
      leaves ``epsilon`` unchanged but lowers ``|beta_gg|``.

    Raises
    ------
    UnreachableTargetError
        If no pair with the requested ``|epsilon|`` produces the target
        (``|alpha|`` below the smallest value that ``|epsilon|`` allows, or a
        nonzero ``alpha`` requested with ``epsilon = 0`` and vice versa).
    OutsideValidityError
        If the required ``|epsilon|`` exceeds 0.2.
    """
    if theta <= 0:
        raise ValidationError(f"theta must be positive, got {theta}")
    t = math.tanh(target.r)
    phi_ee = target.phi_r - math.pi
    rot = t * complex(math.cos(phi_ee), math.sin(phi_ee))
    # Real-linear map  eps -> eps + rot * conj(eps)  written on (Re, Im).
    lin = np.array([[1 + rot.real, rot.imag], [rot.imag, 1 - rot.real]])
    alpha = target.alpha
    g_max_for = lambda eps_abs: math.sqrt((1 - eps_abs**2 / 2) / (1 + t**2))  # noqa: E731

    if epsilon_magnitude is None:
        g = 1.0 / math.sqrt(1 + t**2)
        eps = 0j
        for _ in range(50):
            rhs = alpha * theta * g * (1 - t**2)
            x, y = np.linalg.solve(lin, [rhs.real, rhs.imag])
            eps = complex(x, y)
            if abs(eps) > math.sqrt(2):
                raise UnreachableTargetError("target displacement needs |epsilon| beyond any normalized pair")
            g_new = g_max_for(abs(eps))
            if abs(g_new - g) < 1e-15:
                break
            g = g_new
        check_epsilon(abs(eps))
        return QubitPairState.normalized(g, eps / 2, eps / 2, rot * g)

    eps_abs = float(epsilon_magnitude)
    if eps_abs < 0:
        raise ValidationError("epsilon_magnitude must be non-negative")
    check_epsilon(eps_abs)
    g_max = g_max_for(eps_abs)
    if alpha == 0 or eps_abs == 0:
        if alpha != 0 or eps_abs != 0:
            raise UnreachableTargetError("a displaced target needs epsilon != 0, and epsilon != 0 displaces")
        return QubitPairState.normalized(g_max, 0.0, 0.0, rot * g_max)
    direction = np.linalg.solve(lin, [alpha.real, alpha.imag])
    psi = math.atan2(direction[1], direction[0])
    eps = eps_abs * complex(math.cos(psi), math.sin(psi))
    image = eps + rot * eps.conjugate()
    g = abs(image) / (theta * abs(alpha) * (1 - t**2))
    if g > g_max * (1 + 1e-12):
        smallest = abs(image) / (theta * g_max * (1 - t**2))
        raise UnreachableTargetError(
            f"|alpha| = {abs(alpha):.6g} is below the smallest amplitude {smallest:.6g} reachable with |epsilon| = {eps_abs}"
        )
    g = min(g, g_max)
    spare = max(1.0 - g**2 * (1 + t**2) - eps_abs**2 / 2, 0.0)
    w = math.sqrt(spare / 2) * 1j * eps / eps_abs
    return QubitPairState(g, eps / 2 + w, eps / 2 - w, rot * g)


class Classification(NamedTuple):
    label: str
    concurrence: float


def classify(pair: QubitPairState) -> Classification:
    """Label a pair ``"separable"`` or ``"entangled"`` and report its concurrence."""
    label = "separable" if pair.is_separable() else "entangled"
    return Classification(label, pair.concurrence())


def _finite_or_inf(value: float) -> float:
    return value if math.isfinite(value) and value < _OVERFLOW else math.inf


def entangled_amplitude_bound(theta: float, epsilon_magnitude: float, mu: float) -> float:
    """Displacement reached by the extremal entangled pair of :func:`entangled_extremal_pair`.

    Equal to ``|eps| (mu + 1) / (theta sqrt(1 - |eps|^2) (mu - 1))``.  Every
    separable pair with the same ``|epsilon|`` and ``mu`` stays strictly below
    it; see :func:`separable_amplitude_scan`.
    """
    if mu <= 1:
        raise ValidationError(f"mu must exceed 1, got {mu}")
    if not 0 <= epsilon_magnitude < 1:
        raise ValidationError(f"epsilon magnitude must lie in [0, 1), got {epsilon_magnitude}")
    if theta <= 0:
        raise ValidationError(f"theta must be positive, got {theta}")
    with np.errstate(divide="ignore", over="ignore"):
        value = epsilon_magnitude * (mu + 1) / (theta * math.sqrt(1 - epsilon_magnitude**2) * (mu - 1))
    return _finite_or_inf(value)


def entangled_extremal_pair(epsilon_magnitude: float, mu: float, phi_epsilon: float = 0.0) -> QubitPairState:
    """Entangled pair with ``|beta_gg||beta_ee| = |beta_ge||beta_eg|`` and all phases aligned for maximal ``|alpha|``.

    ``beta_ge`` and ``beta_eg`` point in opposite directions, so their
    magnitudes are as large as the normalization allows for a given
    ``|epsilon|``, while ``arg(beta_gg) + arg(beta_ee) = 2 arg(epsilon)``
    makes the two terms of the displacement add constructively.
    """
    if mu <= 1:
        raise ValidationError(f"mu must exceed 1, got {mu}")
    eps = epsilon_magnitude
    e = math.sqrt(1 - eps**2) / (1 + mu)
    ge = 0.5 * (eps + math.sqrt(eps**2 + 4 * mu * e**2))
    eg = ge - eps
    phase = complex(math.cos(phi_epsilon), math.sin(phi_epsilon))
    return QubitPairState(mu * e * phase, ge * phase, -eg * phase, e * phase)


@dataclass(frozen=True)
class AmplitudeScan:
    """Result of the separable-pair displacement scan.

    Attributes
    ----------
    sup:
        Largest ``|alpha|`` found over the grid.
    bound:
        :func:`entangled_amplitude_bound` for the same parameters.
    margin:
        ``bound - sup``.
    argmax:
        Phases at the maximum: ``phase_difference`` (``arg beta_ge - arg beta_eg``)
        and ``alignment`` (``arg beta_gg + arg beta_ee - 2 arg epsilon``),
        both wrapped to ``(-pi, pi]``.
    formula_mismatch:
        Largest relative difference between ``|alpha|`` from the constructed
        amplitudes and the closed-form separable expression.
    max_concurrence:
        Largest concurrence among the scanned pairs (should be round-off).
    """

    sup: float
    bound: float
    margin: float
    argmax: dict[str, float]
    formula_mismatch: float
    max_concurrence: float


def _wrap_pi(x):
    return np.angle(np.exp(1j * np.asarray(x)))


def separable_pairs_grid(epsilon_magnitude: float, mu: float, grid_resolution: int = 256):
    """Amplitude arrays of all separable pairs on a phase grid with fixed ``|epsilon|`` and ``mu``.

    Product states obey ``beta_gg beta_ee = beta_ge beta_eg``.  With the global
    phase fixed by ``arg beta_eg = 0`` the free phases are the difference
    ``Delta = arg beta_ge - arg beta_eg`` and ``arg beta_gg``; the moduli then
    follow from ``|epsilon|``, ``mu`` and the normalization.  Real moduli exist
    only for ``|Delta - pi| <= delta_max``; that interval is sampled including
    its endpoints, and both assignments of the two moduli to ``beta_ge`` and
    ``beta_eg`` are included.

    Returns
    -------
    (gg, ge, eg, ee, delta) arrays of equal shape.
    """
    if grid_resolution < 64:
        raise ValidationError("grid_resolution must be at least 64")
    if mu <= 1:
        raise ValidationError(f"mu must exceed 1, got {mu}")
    eps = epsilon_magnitude
    cos_half_width = ((1 + mu) ** 2 * (1 - eps**2) - 1 - mu**2) / (2 * mu)
    half_width = math.acos(min(max(cos_half_width, -1.0), 1.0))
    delta = np.linspace(math.pi - half_width, math.pi + half_width, grid_resolution)
    phi_gg = np.linspace(0.0, 2 * math.pi, grid_resolution, endpoint=False)
    delta, phi_gg = np.meshgrid(delta, phi_gg, indexing="ij")

    e2 = (1 - eps**2) / (1 + mu**2 - 2 * mu * np.cos(delta))
    total = 1 - (1 + mu**2) * e2
    product = mu * e2
    disc = np.sqrt(np.clip(total**2 - 4 * product**2, 0.0, None))
    big = np.sqrt((total + disc) / 2)
    small = np.sqrt(np.clip((total - disc) / 2, 0.0, None))
    e = np.sqrt(e2)

    ge_mod = np.concatenate([big, small])
    eg_mod = np.concatenate([small, big])
    delta = np.concatenate([delta, delta])
    phi_gg = np.concatenate([phi_gg, phi_gg])
    e = np.concatenate([e, e])
    gg = mu * e * np.exp(1j * phi_gg)
    ee = e * np.exp(1j * (delta - phi_gg))
    ge = ge_mod * np.exp(1j * delta)
    eg = eg_mod.astype(complex)
    return gg, ge, eg, ee, delta


def separable_amplitude_scan(
    theta: float,
    epsilon_magnitude: float,
    mu: float,
    grid_resolution: int = 256,
) -> AmplitudeScan:
    """Grid supremum of the steady displacement over separable pairs."""
    gg, ge, eg, ee, delta = separable_pairs_grid(epsilon_magnitude, mu, grid_resolution)
    alpha = np.abs(steady_displacement(gg, ge, eg, ee, theta))
    eps = ge + eg
    eps_abs = epsilon_magnitude
    alignment = np.angle(gg) + np.angle(ee) - 2 * np.angle(eps)
    closed_sq = (
        eps_abs**2
        / (1 - eps_abs**2)
        * (1 + mu**2 + 2 * mu * np.cos(alignment))
        * (1 + mu**2 - 2 * mu * np.cos(delta))
        / (theta * (mu**2 - 1)) ** 2
    )
    mismatch = float(np.max(np.abs(np.sqrt(closed_sq) - alpha) / np.maximum(alpha, 1e-300)))
    idx = int(np.argmax(alpha))
    sup = float(alpha.flat[idx])
    bound = entangled_amplitude_bound(theta, eps_abs, mu)
    concurrence = float(np.max(2 * np.abs(gg * ee - ge * eg)))
    return AmplitudeScan(
        sup=sup,
        bound=bound,
        margin=bound - sup,
        argmax={
            "phase_difference": float(_wrap_pi(delta.flat[idx])),
            "alignment": float(_wrap_pi(alignment.flat[idx])),
        },
        formula_mismatch=mismatch,
        max_concurrence=concurrence,
    )


def identical_input_prediction(u: float, chi: float, theta: float) -> SqueezedTarget:
    """Coherent steady state ``(2u / theta) exp(i chi)`` of a stream of identical qubits.

    This is the small-``u`` form; :func:`predict_steady_state` on
    ``QubitPairState.identical(u, chi)`` gives ``tan(2u) / theta`` together
    with a tiny residual squeezing.
    """
    if not 0 <= u < math.pi / 4:
        raise ValidationError(f"u must lie in [0, pi/4), got {u}")
    if theta <= 0:
        raise ValidationError(f"theta must be positive, got {theta}")
    return SqueezedTarget((2 * u / theta) * complex(math.cos(chi), math.sin(chi)), 0.0, 0.0)


def alternating_input_prediction(u: float, theta: float) -> ReservoirDesign:
    """Squeezed-vacuum prediction for the alternating stream with ``tanh r = tan^2 u``."""
    if not 0 < u < math.pi / 4:
        raise ValidationError(f"u must lie in (0, pi/4), got {u}")
    return predict_steady_state(QubitPairState.alternating(u), theta)


__all__ = [
    "SEPARABILITY_TOL",
    "AmplitudeScan",
    "Classification",
    "ReservoirDesign",
    "ValidityWarning",
    "alternating_input_prediction",
    "check_epsilon",
    "classify",
    "entangled_amplitude_bound",
    "entangled_extremal_pair",
    "identical_input_prediction",
    "predict_steady_state",
    "separable_amplitude_scan",
    "separable_pairs_grid",
    "steady_displacement",
    "tune_pair_for_target",
]
