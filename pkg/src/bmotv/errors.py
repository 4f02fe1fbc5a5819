"""Exception types shared across the package."""


class BmotvError(Exception):
    """Base class for all package errors."""


class InvalidSpecError(BmotvError):
    """Function-spec parameter out of range or malformed."""


class ResolutionMismatchError(InvalidSpecError):
    """Grid resolution incompatible with the requested construction."""


class DimensionError(BmotvError):
    """Unsupported dimension (only 1 and 2 are handled)."""


class GridParseError(BmotvError):
    """Malformed grid file.  Carries the offending line (and field) position."""

    def __init__(self, message, line=None, field=None):
        where = []
        if line is not None:
            where.append(f"line {line}")
        if field is not None:
            where.append(f"field {field}")
        if where:
            message = f"{message} ({', '.join(where)})"
        super().__init__(message)
        self.line = line
        self.field = field


class LatticeError(BmotvError):
    """A length or offset is not a multiple of the cell size h."""


class IncompatibleLatticeError(BmotvError):
    """Operands live on incompatible lattices (h or origin mismatch)."""


class OverlappingFamilyError(BmotvError):
    """Cube family fails the pairwise interior-disjointness check."""


class SupportError(BmotvError):
    """Function support violates an operation's domain restriction."""


class BudgetExceededError(BmotvError):
    """Exact search exceeded its node budget."""
