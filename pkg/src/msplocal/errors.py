"""Exception types shared across the package."""


class MspError(Exception):
    """Base class for all errors raised by this package."""


class DivisionByZero(MspError, ZeroDivisionError):
    """Division or inversion by the zero rational function."""


class DenominatorVanishes(MspError):
    """A substitution made a denominator identically zero."""


class ParseError(MspError):
    """Malformed textual rational-function input."""


class InvalidMarking(MspError):
    """A stacky marking exponent fails the narrowness condition."""


class WrongEdgeType(MspError):
    """An operation was asked about an edge kind it does not cover."""


class UnsupportedEdgeType(MspError):
    """The edge kind carries no data for this operation (web-internal edges)."""


class NotAValenceTwoVertex(MspError):
    """Balanced-node test called on a vertex without exactly two edges and no legs."""


class NotFlat(MspError):
    """Classification requires a graph with no balanced nodes."""


class BroadInfinityNode(MspError):
    """A node at the deepest level carries non-narrow monodromy."""


class IrregularGraph(MspError):
    """Assembly refuses graphs that are not classified Regular."""


class CapExceeded(MspError):
    """Enumeration was truncated by a search cap."""


class CapTooLarge(MspError):
    """Brute-force enumeration asked for caps above its hard limit."""


class MissingCorrelator(MspError):
    """Tabulated oracle query has no matching table row."""


class DuplicateClass(MspError):
    """Two input graphs share a canonical form."""


class ConfigInvalid(MspError):
    """Run configuration failed strict validation."""


class FileMalformed(MspError):
    """An artifact file could not be parsed against its schema."""
