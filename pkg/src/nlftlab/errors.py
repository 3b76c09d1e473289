"""Exception types shared across the library."""


class DomainError(ValueError):
    """An argument is outside the mathematical domain of the operation."""


class ConfigError(ValueError):
    """Invalid configuration (step counts, grids, unknown check ids, ...)."""


class BlowupError(RuntimeError):
    """An integration produced non-finite values even after rescaling."""


class ConsistencyError(RuntimeError):
    """Two internal computations that must agree do not (e.g. winding vs zero count)."""


class PoleError(RuntimeError):
    """Evaluation requested at or too close to a pole / zero of the denominator."""
