"""Exception types shared across the toolkit."""


class ErsegError(Exception):
    """Base class for all toolkit errors."""


class SegmentationError(ErsegError):
    """Raised when a sentence cannot be segmented at all."""


class TreeParseError(ErsegError):
    """Raised on malformed bracketed trees.

    Carries the character offset of the first offending position when known.
    """

    def __init__(self, message: str, offset: int | None = None):
        if offset is not None:
            message = f"{message} (offset {offset})"
        super().__init__(message)
        self.offset = offset


class AlignmentError(ErsegError):
    """Raised when tree leaves do not cover the sentence text."""


class ScorerError(ErsegError):
    """Raised when a gap scorer cannot produce scores for a sentence."""


class ProtocolError(ScorerError):
    """Raised on malformed or unexpected sidecar protocol messages."""


class TransportError(ScorerError):
    """Raised when the sidecar process dies, times out, or closes its pipes."""


class CorpusFormatError(ErsegError):
    """Raised on malformed corpus or score files."""


class MetricError(ErsegError):
    """Raised when a metric is undefined for the given inputs."""
