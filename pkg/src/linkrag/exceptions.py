"""Exception hierarchy shared by all linkrag modules."""


class LinkRagError(Exception):
    """Base class for every error raised by linkrag."""


class IngestError(LinkRagError):
    """A source document could not be read or decoded."""

    def __init__(self, url, reason):
        super().__init__(f"{url}: {reason}")
        self.url = url
        self.reason = reason


class EmbeddingError(LinkRagError):
    """A remote embedding request failed.

    ``status`` is the HTTP status (None for transport failures),
    ``attempts`` the number of tries made, and ``retry_after`` the server's
    suggested wait in seconds when one was given.
    """

    def __init__(self, message, status=None, attempts=1, retry_after=None):
        super().__init__(message)
        self.status = status
        self.attempts = attempts
        self.retry_after = retry_after


class GenerationError(EmbeddingError):
    """A remote generation request failed (same retry metadata)."""


class IndexFormatError(LinkRagError):
    """Index file is missing, corrupt, or incompatible.

    ``field`` names the offending header field or record attribute.
    """

    def __init__(self, field, message):
        super().__init__(f"{field}: {message}")
        self.field = field


class IndexMismatchError(LinkRagError):
    """Embedding dimension or embedder identifier does not match the index."""


class RetrievalError(LinkRagError):
    """Retrieval was attempted against an empty index."""


class ScoringError(LinkRagError):
    """Answer scoring received empty input or no score was available."""


class UndefinedCorrelationError(LinkRagError, ValueError):
    """Pearson correlation is undefined for the given series."""
