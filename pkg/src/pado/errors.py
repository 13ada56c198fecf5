"""Exception hierarchy shared by every pado module."""


class PadoError(Exception):
    """Base class for all errors raised by this package."""


class InvalidGraph(PadoError, ValueError):
    """The input graph violates an embedded-planar-graph invariant."""


class NotPlanarEmbedding(InvalidGraph):
    """Rotation system is malformed or fails Euler's relation."""


class Disconnected(InvalidGraph):
    """The graph (or a required subgraph) is not connected."""


class NegativeLength(InvalidGraph):
    """An edge length is negative, NaN or infinite."""


class InvalidParams(PadoError, ValueError):
    """A size, epsilon or other numeric parameter is out of range."""


class ParseError(PadoError, ValueError):
    """Malformed graph text; ``line`` is 1-based (0 when unknown)."""

    def __init__(self, message, line=0):
        self.line = line
        super().__init__(f"line {line}: {message}" if line else message)


class UnreachableNode(PadoError):
    """A node required by a shortest-path computation cannot be reached."""


class UnknownNode(PadoError, LookupError):
    pass


class UnknownRegion(PadoError, LookupError):
    pass


class NoSeparator(PadoError):
    """No balanced fundamental cycle exists; only when preconditions fail."""


class OracleFileError(PadoError):
    pass


class VersionMismatch(OracleFileError):
    pass


class CorruptFile(OracleFileError):
    pass
