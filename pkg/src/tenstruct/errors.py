"""Exception hierarchy shared by every tenstruct module."""


class TenstructError(Exception):
    """Base class; ``module`` names the subsystem that raised."""

    module = "tenstruct"


class IndexOutOfRange(TenstructError, IndexError):
    module = "tensor_core"


class DuplicateCoordinate(TenstructError, ValueError):
    module = "tensor_core"


class NonFiniteEntry(TenstructError, ValueError):
    module = "tensor_core"


class SizeMismatch(TenstructError, ValueError):
    module = "tensor_core"


class DimensionMismatch(TenstructError, ValueError):
    module = "tensor_core"


class EvenRootOfNegative(TenstructError, ValueError):
    module = "tensor_core"


class EmptyIndexSet(TenstructError, ValueError):
    module = "tensor_core"


class InternalDisagreement(TenstructError, RuntimeError):
    """Two routes that must agree did not; always an implementation bug."""

    module = "structure_checks"


class OddOrderUnsupported(TenstructError, ValueError):
    module = "p_analysis"


class ResourceLimit(TenstructError, RuntimeError):
    module = "p_analysis"


class NoPositiveProduct(TenstructError, ValueError):
    """Raised with the offending vector in ``x``: it refutes the P property."""

    module = "p_analysis"

    def __init__(self, message, x=None):
        super().__init__(message)
        self.x = x


class NonConvergence(TenstructError, RuntimeError):
    module = "spectral"

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class ParseError(TenstructError, ValueError):
    module = "cli"
