"""Exception types raised across the package."""


class USDError(Exception):
    """Base class for all errors raised by usdisc."""

    kind = "USDError"


class NotHermitian(USDError, ValueError):
    kind = "NotHermitian"


class NotPSD(USDError, ValueError):
    kind = "NotPSD"


class NoConvergence(USDError, RuntimeError):
    kind = "NoConvergence"


class DependentStates(USDError, ValueError):
    """The state set is linearly dependent, so no zero-error measurement exists."""

    kind = "DependentStates"


class Infeasible(USDError, ValueError):
    """Requested conditional probabilities push the probability operator above 1."""

    kind = "Infeasible"


class WrongArity(USDError, ValueError):
    kind = "WrongArity"


class DomainError(USDError, ValueError):
    kind = "DomainError"


class TooLarge(USDError, ValueError):
    kind = "TooLarge"


class ZeroCoefficient(USDError, ValueError):
    kind = "ZeroCoefficient"


class InvalidInput(USDError, ValueError):
    """Malformed or inconsistent input data (bad shapes, norms, priors)."""

    kind = "InvalidInput"
