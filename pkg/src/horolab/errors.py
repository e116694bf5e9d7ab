"""Exception types shared across the package.

The command line maps these onto distinct exit codes, so library code
should raise the most specific one that applies rather than a bare
ValueError.
"""


class HorolabError(Exception):
    """Base class for all package-specific failures."""


class DomainError(HorolabError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class ConvergenceError(HorolabError, RuntimeError):
    """An iterative routine failed to reach its tolerance.

    Carries the best estimate achieved so callers can still inspect it.
    """

    def __init__(self, message: str, estimate: float | None = None):
        super().__init__(message)
        self.estimate = estimate


class ResourceGuardError(HorolabError, RuntimeError):
    """A computation was refused because it would exceed a hard size limit."""
