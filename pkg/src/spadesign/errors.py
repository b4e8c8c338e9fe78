"""Exception hierarchy shared by every module.

The CLI maps these onto process exit codes: validation problems exit 2,
numeric failures exit 3 and infeasible requests exit 4.
"""


class SpaError(Exception):
    """Base class for all package errors."""


class ValidationError(SpaError, ValueError):
    """Malformed input, schema violation or bad argument."""


class DomainError(ValidationError):
    """Input outside the mathematical domain of a model (e.g. Gent lock-up)."""


class FitError(SpaError):
    """Parameter fitting failed or the data cannot determine the parameters."""


class NumericError(SpaError, ArithmeticError):
    """A numerical procedure failed (integration, root bracketing...)."""


class SingularityError(NumericError):
    """A denominator vanished while evaluating the equilibrium equations."""

    def __init__(self, message, r=None, state=None):
        super().__init__(message)
        self.r = r
        self.state = state


class NoConvergenceError(NumericError):
    """An iterative solver did not converge."""


class InfeasibleError(SpaError):
    """No admissible solution exists for the requested targets or loads."""


class StateError(SpaError, RuntimeError):
    """Object used before it reached the required state (e.g. untrained)."""
