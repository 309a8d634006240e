"""Exceptions shared across the simulation modules."""


class ContractViolation(ValueError):
    """Raised when an operation is called outside its preconditions."""


class InvariantViolation(RuntimeError):
    """Raised when simulation state becomes internally inconsistent."""
