"""Qubit-pair reservoir states, the exact pair-interaction Kraus map, and trajectories.

Ordering convention
-------------------
A pair is made of two qubits that interact with the oscillator one after the
other, each through the resonant exchange propagator for an interaction angle
``theta``.  In ``QubitPairState`` the amplitude ``beta_xy`` belongs to the
component where the qubit that interacts *second* is in ``x`` and the qubit
that interacts *first* is in ``y``.  The Kraus operator ``M_xy`` is the
oscillator operator left after projecting the two qubits onto ``x`` (second)
and ``y`` (first).  :meth:`QubitPairState.from_product` takes the qubits in
interaction order and applies this convention for you.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import scipy.sparse as sparse
from scipy.sparse.linalg import spsolve

from . import fock
from .errors import FitFailureError, InvalidStateError, TruncationOverflowError, ValidationError
from .squeezing import quadrature_extrema

PAIR_NORM_TOL = 1e-10
SEPARABILITY_TOL = 1e-12
TRACE_DRIFT_LIMIT = 1e-6


@dataclass(frozen=True)
class QubitPairState:
    """Normalized two-qubit input state ``sum beta_xy |x>_second |y>_first``."""

    beta_gg: complex
    beta_ge: complex
    beta_eg: complex
    beta_ee: complex

    def __post_init__(self) -> None:
        for name in ("beta_gg", "beta_ge", "beta_eg", "beta_ee"):
            object.__setattr__(self, name, complex(getattr(self, name)))
        norm = float(np.sum(np.abs(self.amplitudes) ** 2))
        if abs(norm - 1.0) > PAIR_NORM_TOL:
            raise InvalidStateError(f"pair amplitudes have squared norm {norm:.12g}, expected 1")

    @classmethod
    def normalized(cls, beta_gg: complex, beta_ge: complex, beta_eg: complex, beta_ee: complex) -> "QubitPairState":
        """Build a pair from unnormalized amplitudes by rescaling them."""
        amps = np.array([beta_gg, beta_ge, beta_eg, beta_ee], dtype=complex)
        norm = np.linalg.norm(amps)
        if norm == 0:
            raise InvalidStateError("all pair amplitudes are zero")
        return cls(*(amps / norm))

    @classmethod
    def from_product(cls, first: Sequence[complex], second: Sequence[complex]) -> "QubitPairState":
        """Product of two single-qubit states ``(c_g, c_e)``, given in interaction order."""
        q1 = np.asarray(first, dtype=complex)
        q2 = np.asarray(second, dtype=complex)
        for q in (q1, q2):
            if q.shape != (2,) or abs(np.linalg.norm(q) - 1.0) > PAIR_NORM_TOL:
                raise InvalidStateError("each qubit must be a normalized length-2 vector")
        return cls(*np.outer(q2, q1).ravel())

    @classmethod
    def identical(cls, u: float, chi: float = 0.0) -> "QubitPairState":
        """Two copies of ``cos(u)|g> + exp(i chi) sin(u)|e>``."""
        q = np.array([math.cos(u), np.exp(1j * chi) * math.sin(u)])
        return cls.from_product(q, q)

    @classmethod
    def alternating(cls, u: float) -> "QubitPairState":
        """``cos(u)|g> + sin(u)|e>`` followed by ``cos(u)|g> - sin(u)|e>``."""
        return cls.from_product([math.cos(u), math.sin(u)], [math.cos(u), -math.sin(u)])

    @property
    def amplitudes(self) -> np.ndarray:
        """Amplitudes as the array ``[beta_gg, beta_ge, beta_eg, beta_ee]``."""
        return np.array([self.beta_gg, self.beta_ge, self.beta_eg, self.beta_ee])

    @property
    def epsilon(self) -> complex:
        """Sum of the two single-excitation amplitudes."""
        return self.beta_ge + self.beta_eg

    @property
    def mu(self) -> float:
        """Ratio ``|beta_gg| / |beta_ee|`` (infinite when ``beta_ee = 0``)."""
        if self.beta_ee == 0:
            return math.inf
        return abs(self.beta_gg) / abs(self.beta_ee)

    def concurrence(self) -> float:
        return 2.0 * abs(self.beta_gg * self.beta_ee - self.beta_ge * self.beta_eg)

    def is_separable(self) -> bool:
        return abs(self.beta_gg * self.beta_ee - self.beta_ge * self.beta_eg) < SEPARABILITY_TOL


def _read_only(*arrays: np.ndarray) -> None:
    for arr in arrays:
        arr.setflags(write=False)


@dataclass(frozen=True)
class KrausSet:
    """The four measurement-outcome operators of one pair interaction."""

    m_gg: np.ndarray
    m_ge: np.ndarray
    m_eg: np.ndarray
    m_ee: np.ndarray

    def __post_init__(self) -> None:
        shapes = {m.shape for m in self.operators}
        if len(shapes) != 1:
            raise ValidationError(f"Kraus operators disagree in shape: {shapes}")
        _read_only(*self.operators)

    @property
    def operators(self) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        return (self.m_gg, self.m_ge, self.m_eg, self.m_ee)

    @property
    def dim(self) -> int:
        return self.m_gg.shape[0]

    def completeness_error(self, levels: int | None = None) -> float:
        """Max entrywise deviation of ``sum M^dagger M`` from identity on the lowest ``levels`` levels.

        Defaults to all but the top two Fock levels, which the raising
        operator couples out of the truncated space.
        """
        levels = self.dim - 2 if levels is None else levels
        total = sum(m.conj().T @ m for m in self.operators)
        block = total[:levels, :levels]
        return float(np.max(np.abs(block - np.eye(levels))))

    def superoperator(self) -> sparse.csr_matrix:
        """Sparse matrix of ``rho -> sum M rho M^dagger`` acting on row-major ``vec(rho)``."""
        return sum(
            sparse.kron(sparse.csr_matrix(m), sparse.csr_matrix(m.conj()), format="csr")
            for m in self.operators
        )


def single_qubit_propagator(theta: float, dim: int = fock.DEFAULT_DIM) -> np.ndarray:
    """Resonant exchange propagator on ``qubit (x) oscillator``.

    The joint index is ``q * dim + n`` with ``q = 0`` for the ground state
    and ``q = 1`` for the excited state.
    """
    a = fock.annihilation_op(dim)
    n = np.arange(dim)
    cos_n = np.diag(np.cos(theta * np.sqrt(n))).astype(complex)
    cos_n1 = np.diag(np.cos(theta * np.sqrt(n + 1))).astype(complex)
    sinc = np.diag(fock.sinc_theta(theta, n)).astype(complex)
    return np.block([[cos_n, sinc @ a.conj().T], [-a @ sinc, cos_n1]])


def kraus_operators(pair: QubitPairState, theta: float, dim: int = fock.DEFAULT_DIM) -> KrausSet:
    """Kraus operators of one pair interaction, assembled from number-operator functions."""
    if theta < 0:
        raise ValidationError(f"interaction angle must be non-negative, got {theta}")
    gg, ge, eg, ee = pair.amplitudes
    a = fock.annihilation_op(dim)
    ad = a.conj().T

    def diag(f):
        return fock.number_function_op(f, dim)

    cos_n = diag(lambda k: math.cos(theta * math.sqrt(k)))
    cos_n1 = diag(lambda k: math.cos(theta * math.sqrt(k + 1)))
    sinc = diag(lambda k: fock.sinc_theta(theta, k))
    sin2_n = diag(lambda k: math.sin(theta * math.sqrt(k)) ** 2)
    sin2_n1 = diag(lambda k: math.sin(theta * math.sqrt(k + 1)) ** 2)
    raise_ = sinc @ ad  # sinc(N) a^dagger
    lower = a @ sinc  # a sinc(N)

    m_gg = gg * cos_n @ cos_n + ge * cos_n @ raise_ + eg * raise_ @ cos_n + ee * raise_ @ raise_
    m_ge = -gg * cos_n @ lower + ge * cos_n @ cos_n1 - eg * sin2_n + ee * raise_ @ cos_n1
    m_eg = -gg * lower @ cos_n - ge * sin2_n1 + eg * cos_n1 @ cos_n + ee * cos_n1 @ raise_
    m_ee = gg * lower @ lower - ge * lower @ cos_n1 - eg * cos_n1 @ lower + ee * cos_n1 @ cos_n1
    return KrausSet(m_gg, m_ge, m_eg, m_ee)


def apply_kraus_map(rho: np.ndarray, kraus: KrausSet) -> np.ndarray:
    """One pair interaction: ``sum_xy M_xy rho M_xy^dagger``.

    Raises
    ------
    TruncationOverflowError
        If the trace changes by more than ``1e-6``, meaning population was
        pushed past the top Fock level.
    """
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (kraus.dim, kraus.dim):
        raise ValidationError(f"state shape {rho.shape} does not match Kraus dimension {kraus.dim}")
    ops = np.stack(kraus.operators)
    out = np.sum(ops @ rho @ np.conj(np.transpose(ops, (0, 2, 1))), axis=0)
    drift = abs(np.trace(out) - np.trace(rho))
    if not drift <= TRACE_DRIFT_LIMIT:
        raise TruncationOverflowError(f"trace drifted by {drift:.3g} in one step; increase dim")
    return out


DIAGNOSTIC_KEYS = ("trace", "leakage", "dist_to_target", "fidelity_to_target", "var_x_min", "var_x_max")


@dataclass(frozen=True)
class Trajectory:
    """Recorded evolution of the oscillator state.

    Attributes
    ----------
    steps, taus:
        Step index and elapsed time of each record (one pair interaction is
        one unit of time for the Kraus engine).
    states:
        Recorded density matrices; empty when states were not stored.
    diagnostics:
        One array per key in :data:`DIAGNOSTIC_KEYS`.  Target-dependent
        entries are NaN when no target was given.
    final_state:
        The state after the last executed step.
    stopped_early:
        Whether the run ended on the convergence criterion.
    """

    steps: np.ndarray
    taus: np.ndarray
    states: tuple[np.ndarray, ...]
    diagnostics: dict[str, np.ndarray]
    final_state: np.ndarray
    stopped_early: bool = False


@dataclass
class TrajectoryRecorder:
    """Accumulates records and applies the consecutive-small-change stopping rule."""

    target: np.ndarray | None = None
    store_states: bool = True
    stop_tol: float | None = 1e-10
    patience: int = 10
    _steps: list[int] = field(default_factory=list)
    _taus: list[float] = field(default_factory=list)
    _states: list[np.ndarray] = field(default_factory=list)
    _diag: dict[str, list[float]] = field(default_factory=lambda: {k: [] for k in DIAGNOSTIC_KEYS})
    _previous: np.ndarray | None = None
    _quiet: int = 0

    def record(self, step: int, tau: float, rho: np.ndarray) -> bool:
        """Store one record and return ``True`` once the stopping rule fires."""
        self._steps.append(step)
        self._taus.append(tau)
        if self.store_states:
            self._states.append(rho.copy())
        d = self._diag
        d["trace"].append(float(np.real(np.trace(rho))))
        d["leakage"].append(fock.leakage(rho))
        if self.target is None:
            d["dist_to_target"].append(math.nan)
            d["fidelity_to_target"].append(math.nan)
        else:
            d["dist_to_target"].append(fock.trace_distance(rho, self.target))
            d["fidelity_to_target"].append(fock.fidelity(rho, self.target))
        vmin, vmax, _ = quadrature_extrema(rho)
        d["var_x_min"].append(vmin)
        d["var_x_max"].append(vmax)

        stop = False
        if self.stop_tol is not None and self._previous is not None:
            if fock.trace_distance(rho, self._previous) < self.stop_tol:
                self._quiet += 1
            else:
                self._quiet = 0
            stop = self._quiet >= self.patience
        self._previous = rho.copy()
        return stop

    def finish(self, final_state: np.ndarray, stopped_early: bool) -> Trajectory:
        return Trajectory(
            steps=np.array(self._steps, dtype=int),
            taus=np.array(self._taus, dtype=float),
            states=tuple(self._states),
            diagnostics={k: np.array(v, dtype=float) for k, v in self._diag.items()},
            final_state=final_state,
            stopped_early=stopped_early,
        )


def _as_pair_list(pairs: QubitPairState | Sequence[QubitPairState]) -> list[QubitPairState]:
    if isinstance(pairs, QubitPairState):
        return [pairs]
    pairs = list(pairs)
    if not pairs:
        raise ValidationError("at least one pair state is required")
    return pairs


def simulate(
    rho0: np.ndarray,
    pairs: QubitPairState | Sequence[QubitPairState],
    theta: float,
    steps: int,
    record_every: int = 1,
    *,
    target: np.ndarray | None = None,
    store_states: bool = True,
    stop_tol: float | None = 1e-10,
    patience: int = 10,
) -> Trajectory:
    """Repeatedly apply pair interactions, cycling through ``pairs``.

    Parameters
    ----------
    rho0:
        Initial oscillator state (vector or density matrix).
    pairs:
        One pair state, or a sequence used cyclically: step ``k`` uses
        ``pairs[k % len(pairs)]``.
    steps:
        Maximum number of pair interactions.
    record_every:
        Record diagnostics every this many steps; the initial and final
        states are always recorded.
    target:
        Optional reference state for the distance and fidelity diagnostics.
    stop_tol, patience:
        Stop once ``patience`` consecutive records each differ from the
        previous record by less than ``stop_tol`` in trace distance.  Pass
        ``stop_tol=None`` to always run all steps.
    """
    if steps < 1:
        raise ValidationError(f"steps must be >= 1, got {steps}")
    if record_every < 1:
        raise ValidationError(f"record_every must be >= 1, got {record_every}")
    rho = fock.check_density_matrix(fock.as_density_matrix(rho0))
    dim = rho.shape[0]
    pair_list = _as_pair_list(pairs)
    maps = [kraus_operators(p, theta, dim) for p in pair_list]
    if target is not None:
        target = fock.as_density_matrix(target)

    recorder = TrajectoryRecorder(target, store_states, stop_tol, patience)
    recorder.record(0, 0.0, rho)
    stopped = False
    step = 0
    for step in range(1, steps + 1):
        rho = apply_kraus_map(rho, maps[(step - 1) % len(maps)])
        if step % record_every == 0 or step == steps:
            if recorder.record(step, float(step), rho):
                stopped = step < steps
                break
    return recorder.finish(rho, stopped)


def fit_convergence_rate(
    traj: Trajectory,
    target: np.ndarray,
    upper: float = 1e-1,
    lower: float = 1e-3,
    converged_below: float = 1e-4,
) -> float:
    """Exponential rate of approach to ``target`` per unit time.

    Fits a straight line to ``log(trace distance)`` against time over the
    records whose distance lies between ``lower`` and ``upper`` and returns
    minus its slope.

    Raises
    ------
    FitFailureError
        If states were not stored, the final distance is not below
        ``converged_below``, or fewer than three records fall in the window.
    """
    if not traj.states:
        raise FitFailureError("trajectory has no stored states")
    target = fock.as_density_matrix(target)
    dist = np.array([fock.trace_distance(s, target) for s in traj.states])
    if dist[-1] >= converged_below:
        raise FitFailureError(f"trajectory not converged: final distance {dist[-1]:.3g}")
    window = (dist > lower) & (dist < upper)
    if np.count_nonzero(window) < 3:
        raise FitFailureError("fewer than three records inside the fitting window")
    slope, _ = np.polyfit(traj.taus[window], np.log(dist[window]), 1)
    return float(-slope)


def superoperator_fixed_point(superop: sparse.spmatrix, dim: int) -> np.ndarray:
    """Unit-trace fixed point of a trace-preserving superoperator on row-major vec."""
    system = (superop - sparse.identity(dim * dim, format="csr")).tolil()
    trace_row = np.zeros(dim * dim, dtype=complex)
    trace_row[:: dim + 1] = 1.0
    system[0, :] = trace_row
    rhs = np.zeros(dim * dim, dtype=complex)
    rhs[0] = 1.0
    rho = spsolve(system.tocsc(), rhs).reshape(dim, dim)
    rho = 0.5 * (rho + rho.conj().T)
    return fock.check_density_matrix(rho)


def steady_state(
    pairs: QubitPairState | Sequence[QubitPairState],
    theta: float,
    dim: int = fock.DEFAULT_DIM,
) -> np.ndarray:
    """Fixed point of the pair-interaction map, by a sparse linear solve.

    For a cyclic sequence the fixed point of the full period is returned,
    i.e. the state just before ``pairs[0]`` acts.  The result is identical to
    the long-time limit of :func:`simulate`, without iterating.
    """
    maps = [kraus_operators(p, theta, dim).superoperator() for p in _as_pair_list(pairs)]
    period = maps[0]
    for m in maps[1:]:
        period = m @ period
    return superoperator_fixed_point(period, dim)
