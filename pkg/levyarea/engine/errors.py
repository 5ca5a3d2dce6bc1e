"""
levyarea Errors
Exception hierarchy shared by the engine, the contract layer and the CLI.
"""


class LevyAreaError(Exception):
    """Base class for every error raised by levyarea."""


# ============================================================================
# Specification errors (CLI exit code 2)
# ============================================================================

class SpecError(LevyAreaError, ValueError):
    """A process, holding function or cost model is not admissible."""


class MeanDriftViolation(SpecError):
    """d + lambda * E J >= 0, so phi'(0) <= 0 and T_x has infinite mean."""


class MissingJumpDist(SpecError):
    """A positive jump rate was given without a jump distribution."""


class InvalidParameter(SpecError):
    """A parameter is outside its admissible range."""


# ============================================================================
# Argument errors
# ============================================================================

class DomainError(LevyAreaError, ValueError):
    """Argument outside the domain of the function (e.g. phi at alpha < 0)."""


class OrderViolation(LevyAreaError, ValueError):
    """Two-level area requested with x > y."""


class LevelsNotIncreasing(LevyAreaError, ValueError):
    """Finite-dimensional levels must be strictly increasing."""


class BadProportions(LevyAreaError, ValueError):
    """Class proportions are negative or do not sum to one."""


class DegenerateFunction(LevyAreaError, ValueError):
    """A holding function is a.e. zero where a positive norm is required."""


class NonInvertible(LevyAreaError, ValueError):
    """Series with non-positive linear coefficient cannot be reverted."""


# ============================================================================
# Numerical errors
# ============================================================================

class ConvergenceFailure(LevyAreaError, ArithmeticError):
    """Iterative solver hit its iteration cap."""


class QuadratureFailure(LevyAreaError, ArithmeticError):
    """Adaptive quadrature could not reach the requested tolerance."""


class HorizonExceeded(LevyAreaError, RuntimeError):
    """A simulated path exceeded its event or step budget."""


class HorizonTooShort(LevyAreaError, RuntimeError):
    """Too few regenerative cycles completed within the horizon."""


class UnboundedUpstream(LevyAreaError, ValueError):
    """A quantity needs a finite optimal order size but the cost has no minimizer."""
