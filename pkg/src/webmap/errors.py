"""Exception hierarchy shared by all engine modules."""


class WebMapError(Exception):
    """Base class for every error raised by this package."""


class EmptyInput(WebMapError):
    """An operation received an empty collection or blank text."""


class DimensionMismatch(WebMapError):
    """Two vectors of different dimensions were combined."""


class DegenerateVector(WebMapError):
    """A zero (or effectively zero) vector where a direction is required."""


class MissingEmbedding(WebMapError):
    """The file-backed provider has no vector for the requested term."""

    def __init__(self, term: str):
        super().__init__(f"no embedding available for term {term!r}")
        self.term = term


class NotReachable(WebMapError):
    """No path exists between the requested graph nodes."""


class EmptySources(WebMapError):
    """A path query was issued with an empty source set."""


class NoAnchor(WebMapError):
    """None of a document's terms is present in the proximity graph."""


class SelfLink(WebMapError):
    """A cluster file cannot link to itself."""


class NoMatch(WebMapError):
    """A query could not be resolved to any cluster file."""

    def __init__(self, message: str, suggestion: str | None = None):
        super().__init__(message)
        self.suggestion = suggestion


class NotFound(WebMapError):
    """A referenced document or cluster does not exist."""


class NoFeatures(WebMapError):
    """A document has no selected terms to build a feature vector from."""


class DomainError(WebMapError):
    """A numeric argument lies outside the function's domain."""


class PartitionError(WebMapError):
    """Subcluster records do not partition the cluster's document set."""


class ConfigError(WebMapError):
    """The engine configuration file is invalid."""
