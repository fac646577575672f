"""Exception hierarchy shared by all modules.

The CLI maps these onto exit codes, so every failure raised by the library
should be one of the classes below.
"""


class FivolError(Exception):
    """Base class."""


class ArgumentError(FivolError, ValueError):
    """Malformed input: wrong shapes, out-of-range indices."""


class SingularityError(ArgumentError):
    """Evaluation at a point where the requested object is undefined."""


class DifferentiabilityError(ArgumentError):
    """Gradient or Hessian requested at a non-differentiable point."""


class ClassError(FivolError):
    """A density is outside the Hadwiger class an operation needs."""


class UnsupportedDensityError(FivolError):
    """Density outside the closed piece family."""


class UnsupportedFunctionError(FivolError):
    """Function outside the structures a computation knows how to handle."""


class NoClosedFormError(UnsupportedFunctionError):
    """No exact conjugate exists in the catalog."""


class RejectionError(FivolError):
    """A pointwise minimum failed the convexity check."""


class NumericError(FivolError):
    """Quadrature or fitting did not reach the requested accuracy."""


class ConditioningError(NumericError):
    """Ill-conditioned polynomial fit."""


class DegenerateError(FivolError):
    """Input makes the requested computation meaningless (e.g. zeta(0) = 0)."""
