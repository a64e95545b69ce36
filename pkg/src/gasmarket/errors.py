"""Exception types raised across the package."""


class ParameterError(ValueError):
    """A numeric parameter is outside its admissible range."""


class GridMismatchError(ValueError):
    """Two densities live on different grids."""


class DomainError(ValueError):
    """Input lies outside the domain where an operation is defined."""


class UnsupportedOrderError(ValueError):
    """Kernel order whose coefficient system is not uniquely solvable."""


class EnsembleError(ValueError):
    """Agent ensemble too small or otherwise malformed."""


class InfeasiblePointError(ValueError):
    """No (a, cap) pair realises the requested middle-class scan point."""
