"""Exception types shared across the package."""


class InvalidInput(ValueError):
    """Malformed words, out-of-range letters, bad parameters."""


class ResourceLimitError(RuntimeError):
    """A computation would exceed its configured size or memory cap."""


class WitnessNotFound(RuntimeError):
    """Search for a positive-valued element exhausted its budget.

    Never raised for a genuinely positive-definite character; it signals
    a table character that is not one.
    """

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}
