"""Exception types raised across the package."""


class WienerHopfError(Exception):
    """Base class for all package errors."""


class KernelError(WienerHopfError, ValueError):
    pass


class NonIntegrableKernel(KernelError):
    """A decay rate is nonpositive or a tabulated tail does not decay."""


class MomentDiverges(KernelError):
    """The requested absolute moment is not finite."""


class SchemaError(WienerHopfError, ValueError):
    """A kernel-spec or config document does not match its schema.

    ``field`` is a dotted path into the document and ``line`` a 1-based
    line number when the document position is known.
    """

    def __init__(self, message, field=None, line=None):
        self.field = field
        self.line = line
        where = []
        if field:
            where.append(f"field {field!r}")
        if line is not None:
            where.append(f"line {line}")
        super().__init__(f"{message} ({', '.join(where)})" if where else message)


class UnresolvedOscillation(WienerHopfError):
    """Oscillatory quadrature did not reach the requested accuracy."""


class VanishingSymbol(WienerHopfError):
    """A symbol that must be invertible comes too close to zero."""


class UnderResolved(WienerHopfError):
    """Argument jumps between neighbouring samples are too large to unwrap."""


class CaseMismatch(WienerHopfError, ValueError):
    """The moments contradict the requested case."""


class IndexMismatch(WienerHopfError):
    """The computed winding index contradicts the classified case."""


class NotInSpace(WienerHopfError, ValueError):
    """A grid function failed the membership test of a generated space."""


class AllModesDropped(WienerHopfError):
    """Truncation removed every singular direction."""
