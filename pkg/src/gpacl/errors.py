"""Exception types shared across the package."""


class GpaclError(Exception):
    """Base class for package errors."""


class InvalidArgumentError(GpaclError):
    """An argument violates an operation's preconditions (e.g. dimension mismatch)."""


class DegeneratePointError(GpaclError):
    """Gradient requested within tolerance of a non-differentiable point."""


class FitFailureError(GpaclError):
    """GP Gram matrix could not be factorized even at maximum jitter."""


class LevelSetEmptyError(GpaclError):
    """A posterior sample has no zero crossing inside the domain box."""


class DegenerateGradientError(GpaclError):
    """Sample gradient vanished where a direction was required."""


class DirectionNotFoundError(GpaclError):
    """No unsafe point found in the search hyperplane."""


class BranchInfeasibleError(GpaclError):
    """A start/goal branch of a 1-D search has no feasible point."""


class EmptyDataError(GpaclError):
    """No tight points available to assemble GP training data."""


class ConfigError(GpaclError):
    """Run configuration failed strict validation."""
