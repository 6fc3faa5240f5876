"""Exception types shared across the package."""


class ContractViolation(ValueError):
    """An operation was called with arguments that break its contract."""


class StaleGraphError(RuntimeError):
    """backward() was called twice on the same recorded graph."""


class FormatError(ValueError):
    """A file does not conform to one of the on-disk formats."""
