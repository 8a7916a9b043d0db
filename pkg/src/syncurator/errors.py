"""Exception and warning types shared across the toolkit."""


class SyncuratorError(Exception):
    """Base class for all toolkit errors."""


class ParseError(SyncuratorError):
    """Input file is not well-formed (e.g. malformed JSON)."""


class SchemaError(SyncuratorError):
    """Input parses but violates the canonical schema or an invariant."""


class LengthMismatch(SyncuratorError):
    """Two series that must be frame-aligned have different lengths."""


class CoverageError(SyncuratorError):
    """A signal or pair has insufficient detection coverage."""


class TooSparse(CoverageError):
    """Valid fraction of a signal fell below the configured minimum."""


class InvalidDrop(SyncuratorError):
    """Dropping a channel would leave all scoring weights at zero."""


class InsufficientPairs(SyncuratorError):
    """Not enough usable pairs to assemble the requested manifest."""


class UndefinedDirection(SyncuratorError):
    """Global edit direction has near-zero norm."""


class AllFramesSkipped(SyncuratorError):
    """Every frame was skipped (near-zero per-frame difference)."""


class MissingTextEmbeddings(SyncuratorError):
    """Text embeddings required by a metric are absent from the bundle."""


class NoFacesDetected(SyncuratorError):
    """No frame in the bundle carries a face embedding."""


class DegenerateGeometry(UserWarning):
    """Landmark geometry too degenerate to evaluate a channel formula.

    Emitted as a warning: the affected frames become missing values in the
    channel signal instead of aborting extraction.
    """
