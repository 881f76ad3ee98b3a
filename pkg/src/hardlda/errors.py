"""Exception hierarchy shared by all hardlda modules."""


class HardLdaError(Exception):
    """Base class for all errors raised by this package."""


class CorpusFormatError(HardLdaError):
    """Malformed bag-of-words input (bad header, bad triple, bad count)."""


class CorpusRangeError(HardLdaError):
    """Document or word id outside the range declared by the header."""


class CorpusIOError(HardLdaError):
    """I/O failure while reading or writing corpus files, with file context."""


class DegenerateTopicError(HardLdaError):
    """A topic row cannot be normalized (no mass and no smoothing)."""


class DegenerateStateError(HardLdaError):
    """An operation's denominator vanished (e.g. every document single-topic)."""


class DimensionMismatchError(HardLdaError):
    """Two artifacts that must share a shape do not."""


class EmptyHeldoutError(HardLdaError):
    """Predictive metrics need at least one held-out token."""
