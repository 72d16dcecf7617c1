"""Exception hierarchy shared by every rissim module."""


class RisError(Exception):
    """Base class for all errors raised by rissim."""


class ShapeError(RisError, ValueError):
    """Vector or configuration lengths do not agree."""


class DomainError(RisError, ValueError):
    """A numeric argument lies outside the domain of the formula."""


class ConfigurationError(RisError, ValueError):
    """A phase set or configuration is malformed."""


class GridMismatchError(RisError, ValueError):
    """Grid spacing does not divide the requested angular span."""


class CodebookParseError(RisError, ValueError):
    """A codebook document is malformed."""


class CodebookVersionError(CodebookParseError):
    """A codebook document carries an unsupported format version."""


class PatternError(RisError, KeyError):
    """Unknown activation pattern or unsupported cell count."""

    def __str__(self) -> str:
        # KeyError quotes its argument; keep diagnostics single-line and plain.
        return str(self.args[0]) if self.args else ""


class DegenerateGeometryError(RisError, ValueError):
    """An activation mask leaves no radiating cell."""


class ProtocolError(RisError, ValueError):
    """A control-plane operation violates the bus protocol."""
