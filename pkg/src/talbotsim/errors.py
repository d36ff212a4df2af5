"""Exception types shared across the package."""


class ConfigError(ValueError):
    """A configuration file or flag is malformed or violates an invariant."""


class BudgetError(RuntimeError):
    """A requested computation exceeds the configured resource budget."""

    def __init__(self, message: str, estimate_bytes: int | None = None):
        super().__init__(message)
        self.estimate_bytes = estimate_bytes


class CarrierNotFoundError(ValueError):
    """No dominant carrier peak near the expected frequency bin."""
