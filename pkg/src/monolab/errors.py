"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the domain of an operation."""


class UnsupportedDimsError(DomainError):
    """PPT is only a separability certificate at 2x2 and 2x3."""


class CapabilityError(RuntimeError):
    """No evaluation path exists for the requested combination."""


class ConsistencyError(RuntimeError):
    """An internal invariant failed; results must not be trusted."""


class BracketError(RuntimeError):
    """Both ends of a bisection bracket gave the same verdict.

    ``extend`` is ``"low"`` or ``"high"`` and names the end to move.
    """

    def __init__(self, message, extend):
        super().__init__(message)
        self.extend = extend
