"""Error types shared across the package."""


class ContractViolation(ValueError):
    """An input violates a documented precondition or type invariant."""


class SizeGuardError(ContractViolation):
    """A requested computation exceeds a hard size or memory cap."""
