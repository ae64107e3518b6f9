"""Exception types shared across the package."""


class QuarkletError(Exception):
    """Base class for all package-specific errors."""


class InvalidParameterError(QuarkletError, ValueError):
    """A parameter violates a documented inequality or domain constraint.

    The message always names the violated constraint, e.g. ``0 < s < m - 1``.
    """


class LevelError(QuarkletError, ValueError):
    """A refinement level lies below the coarsest admissible level."""


class FrameIndexError(QuarkletError, KeyError):
    """An index (p, j, k) lies outside the admissible index set."""


class ConstructionFailedError(QuarkletError, RuntimeError):
    """A numerical construction step failed (no kernel vector, etc.)."""


class DivergenceError(QuarkletError, RuntimeError):
    """A fixed-point iteration failed to converge."""


class IllConditionedError(QuarkletError, RuntimeError):
    """A linear system is too ill-conditioned to solve reliably."""


class DomainError(QuarkletError, ValueError):
    """An evaluation point leaves the admissible domain."""
