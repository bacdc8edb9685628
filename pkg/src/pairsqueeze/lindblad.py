"""Second-order effective master equation, its integrator, and frame changes.

The generator is

    d rho / d tau = -i [H, rho] + sum_j D(L_j) rho,
    D(L) rho = L rho L^dagger - (L^dagger L rho + rho L^dagger L) / 2,

with one unit of ``tau`` per qubit pair.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sparse

from . import fock
from .errors import StepSizeError, ValidationError
from .interaction import QubitPairState, Trajectory, TrajectoryRecorder, superoperator_fixed_point
from .squeezing import displacement_op, squeezing_op

HERMITIAN_TOL = 1e-10
TRACE_DRIFT_LIMIT = 1e-6
#: Largest allowed ``dt * theta**2``.
STEP_LIMIT = 0.01


@dataclass(frozen=True)
class LindbladModel:
    """Hamiltonian plus jump operators on a truncated oscillator.

    ``theta`` is optional metadata; when present, :func:`integrate` uses it to
    enforce the step-size limit.
    """

    hamiltonian: np.ndarray
    lindblad_ops: tuple[np.ndarray, ...]
    theta: float | None = None
    _drift: np.ndarray = field(init=False, repr=False, compare=False)
    _stack: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        h = np.array(self.hamiltonian, dtype=complex)
        ops = tuple(np.array(op, dtype=complex) for op in self.lindblad_ops)
        if h.ndim != 2 or h.shape[0] != h.shape[1]:
            raise ValidationError(f"Hamiltonian must be square, got shape {h.shape}")
        if any(op.shape != h.shape for op in ops):
            raise ValidationError("jump operators must match the Hamiltonian shape")
        asym = np.max(np.abs(h - h.conj().T))
        if asym > HERMITIAN_TOL:
            raise ValidationError(f"Hamiltonian not Hermitian (max deviation {asym:.3g})")
        drift = -1j * h - 0.5 * sum((op.conj().T @ op for op in ops), np.zeros_like(h))
        stack = np.stack(ops) if ops else np.zeros((0, *h.shape), dtype=complex)
        for arr in (h, drift, stack, *ops):
            arr.setflags(write=False)
        object.__setattr__(self, "hamiltonian", h)
        object.__setattr__(self, "lindblad_ops", ops)
        object.__setattr__(self, "_drift", drift)
        object.__setattr__(self, "_stack", stack)

    @property
    def dim(self) -> int:
        return self.hamiltonian.shape[0]


def effective_model(
    pair: QubitPairState,
    theta: float,
    dim: int = fock.DEFAULT_DIM,
    channels: int = 3,
) -> LindbladModel:
    """Effective model of the pair stream to second order in ``theta``.

    Parameters
    ----------
    channels:
        3 keeps the two thermal channels proportional to ``epsilon``;
        1 keeps only the squeezing channel.
    """
    if channels not in (1, 3):
        raise ValidationError(f"channels must be 1 or 3, got {channels}")
    a = fock.annihilation_op(dim)
    ad = a.conj().T
    gg, ee, eps = pair.beta_gg, pair.beta_ee, pair.epsilon
    drive = (gg * np.conj(eps) + np.conj(ee) * eps) * a
    hamiltonian = -1j * theta * (drive - drive.conj().T)
    ops = [math.sqrt(2.0) * theta * (gg * a - ee * ad)]
    if channels == 3:
        ops += [theta * eps * a, theta * eps * ad]
    return LindbladModel(hamiltonian, tuple(ops), theta)


def rhs(model: LindbladModel, rho: np.ndarray) -> np.ndarray:
    """Time derivative of ``rho`` under ``model``.

    Evaluated as ``G rho + rho G^dagger + sum L rho L^dagger`` with
    ``G = -iH - sum L^dagger L / 2``, which does not assume ``rho`` is
    Hermitian and therefore does not amplify round-off.
    """
    g = model._drift
    stack = model._stack
    jumps = (stack @ rho @ np.conj(np.transpose(stack, (0, 2, 1)))).sum(axis=0)
    return g @ rho + rho @ g.conj().T + jumps


def integrate(
    model: LindbladModel,
    rho0: np.ndarray,
    dt: float = 0.5,
    steps: int = 1000,
    record_every: int = 1,
    *,
    target: np.ndarray | None = None,
    store_states: bool = True,
    rhs_tol: float = 1e-12,
) -> Trajectory:
    """Classical fourth-order Runge-Kutta integration.

    The trace is never renormalized; it is recorded and checked.  Integration
    stops at a fixed point, i.e. when the max-norm of the derivative drops
    below ``rhs_tol``.

    Raises
    ------
    ValidationError
        If ``dt`` exceeds ``0.01 / theta**2`` for a model that knows ``theta``.
    StepSizeError
        If the trace drifts by more than ``1e-6`` from its initial value.
    """
    if steps < 1 or record_every < 1:
        raise ValidationError("steps and record_every must be >= 1")
    if dt <= 0:
        raise ValidationError(f"dt must be positive, got {dt}")
    if model.theta and dt > STEP_LIMIT / model.theta**2:
        raise ValidationError(f"dt = {dt} exceeds {STEP_LIMIT}/theta^2 = {STEP_LIMIT / model.theta**2:.4g}")
    rho = fock.check_density_matrix(fock.as_density_matrix(rho0)).copy()
    if rho.shape[0] != model.dim:
        raise ValidationError(f"state dimension {rho.shape[0]} does not match model dimension {model.dim}")
    if target is not None:
        target = fock.as_density_matrix(target)
    trace0 = np.trace(rho)

    recorder = TrajectoryRecorder(target, store_states, stop_tol=None)
    recorder.record(0, 0.0, rho)
    stopped = False
    for step in range(1, steps + 1):
        k1 = rhs(model, rho)
        if np.max(np.abs(k1)) < rhs_tol:
            stopped = True
            if (step - 1) % record_every:
                recorder.record(step - 1, (step - 1) * dt, rho)
            break
        k2 = rhs(model, rho + 0.5 * dt * k1)
        k3 = rhs(model, rho + 0.5 * dt * k2)
        k4 = rhs(model, rho + dt * k3)
        rho = rho + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        drift = abs(np.trace(rho) - trace0)
        if not drift <= TRACE_DRIFT_LIMIT:  # also catches NaN from an unstable step
            raise StepSizeError(f"trace drifted by {drift:.3g} after step {step}; reduce dt or increase dim")
        if step % record_every == 0 or step == steps:
            recorder.record(step, step * dt, rho)
    return recorder.finish(rho, stopped)


def frame_unitary(alpha: complex, zeta: complex, dim: int) -> np.ndarray:
    """``D(alpha) S(zeta)`` in the truncated space."""
    return displacement_op(alpha, dim) @ squeezing_op(zeta, dim)


def transform_frame(model: LindbladModel, alpha: complex, zeta: complex, inverse: bool = False) -> LindbladModel:
    """Move the model into the displaced squeezed frame of ``D(alpha) S(zeta)``.

    Every operator ``X`` becomes ``U^dagger X U`` with ``U = D(alpha) S(zeta)``.
    With ``inverse=True`` the map ``X -> U X U^dagger`` is applied instead,
    which undoes the forward transform exactly because only the adjoint of the
    same matrix exponential is used.
    """
    u = frame_unitary(alpha, zeta, model.dim)
    left, right = (u, u.conj().T) if inverse else (u.conj().T, u)
    h = left @ model.hamiltonian @ right
    h = 0.5 * (h + h.conj().T)
    ops = tuple(left @ op @ right for op in model.lindblad_ops)
    return LindbladModel(h, ops, model.theta)


def ladder_coefficients(op: np.ndarray) -> tuple[complex, complex, complex]:
    """Read ``(c0, c_a, c_adag)`` off an operator of the form ``c0 + c_a a + c_adag a^dagger``."""
    return complex(op[0, 0]), complex(op[0, 1]), complex(op[1, 0])


def absorb_jump_constants(model: LindbladModel) -> LindbladModel:
    """Remove the identity part of each jump operator without changing the generator.

    Writing ``L = L' + c`` with ``c = <0|L|0>``, the dissipator of ``L`` equals
    that of ``L'`` plus the commutator with ``(i/2)(conj(c) L' - c L'^dagger)``,
    which is added to the Hamiltonian.
    """
    dim = model.dim
    h = model.hamiltonian.copy()
    ops = []
    for op in model.lindblad_ops:
        c = op[0, 0]
        shifted = op - c * np.eye(dim)
        h = h + 0.5j * (np.conj(c) * shifted - c * shifted.conj().T)
        ops.append(shifted)
    return LindbladModel(0.5 * (h + h.conj().T), tuple(ops), model.theta)


def superoperator(model: LindbladModel) -> sparse.csr_matrix:
    """Sparse generator acting on row-major ``vec(rho)``."""
    dim = model.dim
    eye = sparse.identity(dim, format="csr")
    g = sparse.csr_matrix(model._drift)
    gen = sparse.kron(g, eye) + sparse.kron(eye, g.conj())
    for op in model.lindblad_ops:
        m = sparse.csr_matrix(op)
        gen = gen + sparse.kron(m, m.conj())
    return gen.tocsr()


def steady_state(model: LindbladModel) -> np.ndarray:
    """Unit-trace null vector of the generator, by a sparse linear solve.

    A fast alternative to integrating to convergence; both routes are
    cross-checked in the test suite.
    """
    dim = model.dim
    return superoperator_fixed_point(superoperator(model) + sparse.identity(dim * dim, format="csr"), dim)
