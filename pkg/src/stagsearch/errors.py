"""Exception types shared across the package."""


class ParityError(ValueError):
    """Grid side incompatible with the requested operation."""


class GridMismatchError(ValueError):
    """Two objects defined on different grids were combined."""


class SizeCapError(ValueError):
    """Dense construction requested above the configured dimension cap."""


class NumericalError(RuntimeError):
    """A numerical routine failed to meet its contract."""


class LowConfidenceError(NumericalError):
    """A spectral estimate could not be separated from noise."""


class BudgetExceededError(RuntimeError):
    """A simulation would exceed its step budget."""
