"""Exception hierarchy shared by all modules.

Every error raised on purpose by the library derives from
:class:`PairSqueezeError`, so callers (and the command-line front end) can
separate validation problems from numerical failures.
"""


class PairSqueezeError(Exception):
    """Base class for all library errors."""


class ValidationError(PairSqueezeError, ValueError):
    """Inputs violate a documented precondition."""


class NumericalError(PairSqueezeError, ArithmeticError):
    """A computation ran but produced an untrustworthy result."""


class InvalidDimensionError(ValidationError):
    """Truncation dimension is too small or operands disagree in size."""


class InvalidStateError(ValidationError):
    """A density matrix or state vector fails its physical invariants."""


class AmplitudeTooLargeError(ValidationError):
    """Displacement is too large for the truncation dimension."""


class SqueezeTooLargeError(ValidationError):
    """Squeezing magnitude exceeds the truncation-safe limit."""


class NoConvergenceError(ValidationError):
    """Reservoir parameters admit no stable steady state."""


class OutsideValidityError(ValidationError):
    """Parameters lie outside the range where the effective model holds."""


class UnreachableTargetError(ValidationError):
    """No reservoir pair with the requested constraints yields the target."""


class SingularCovarianceError(ValidationError):
    """A Gaussian covariance matrix cannot be inverted."""


class TruncationOverflowError(NumericalError):
    """Population leaked through the top of the truncated Fock space."""


class StepSizeError(NumericalError):
    """The integrator step is too coarse to preserve the trace."""


class FitFailureError(NumericalError):
    """A convergence-rate fit found no usable exponential regime."""


class OracleInvalidError(NumericalError):
    """States handed to a finite-difference oracle are not valid or converged."""


class InconsistentResultError(NumericalError):
    """Two independent evaluations of the same quantity disagree."""
