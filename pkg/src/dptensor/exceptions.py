"""Exception types shared across the package."""


class ShapeError(ValueError):
    """Operands have incompatible shapes."""


class ConfigError(ValueError):
    """A configuration value violates its contract."""


class DataError(ValueError):
    """A dataset file is missing, malformed, or degenerate."""


class DivergenceError(RuntimeError):
    """Training blew up (non-finite or runaway objective)."""

    def __init__(self, message, epoch=None):
        super().__init__(message)
        self.epoch = epoch
