"""Tagged exception types shared across the package."""


class MmconcError(Exception):
    """Base class; every error carries a short machine-readable tag."""

    tag = "error"


class FieldMismatchError(MmconcError):
    tag = "field-mismatch"


class ShapeMismatchError(MmconcError):
    tag = "shape-mismatch"


class DomainError(MmconcError):
    """Scalar argument outside its documented domain."""

    tag = "domain"


class NotHermitianError(MmconcError):
    tag = "not-hermitian"


class NotUnitaryError(MmconcError):
    """Carries the achieved deviation from unitarity."""

    tag = "not-unitary"

    def __init__(self, message, deviation=None):
        super().__init__(message)
        self.deviation = deviation


class PreconditionError(MmconcError):
    """A documented hypothesis of an operation fails for the given input."""

    tag = "precondition"


class MembershipError(MmconcError):
    """Input is not a member of the required approximation space."""

    tag = "not-a-member"

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics


class InfeasibleError(MmconcError):
    """Experiment cannot proceed (e.g. rejection rate below the floor)."""

    tag = "infeasible"


class ConfigError(MmconcError):
    tag = "config"
