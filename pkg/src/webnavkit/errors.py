"""Exception types shared across the kit."""


class WebNavKitError(Exception):
    """Base class for all kit errors."""


# --- site graph ---------------------------------------------------------

class NoContent(WebNavKitError):
    """The HTML document is empty or contains no parsable content."""


class UnresolvableAsset(WebNavKitError):
    """A referenced image asset does not exist on disk."""


class MissingHomepage(WebNavKitError):
    """The declared homepage id is not among the parsed pages."""


class DuplicatePageId(WebNavKitError):
    """Two pages share the same page id."""


class UnknownPageId(WebNavKitError):
    """A page id was looked up that is not part of the graph."""


# --- simulator ----------------------------------------------------------

class RecordGraphMismatch(WebNavKitError):
    """An episode record is inconsistent with the navigation graph."""


class EpisodeFinished(WebNavKitError):
    """An action or observation was requested on a finished episode."""


class EpisodeNotFinished(WebNavKitError):
    """A finish-only operation was called before the episode ended."""


class InvalidActionIndex(WebNavKitError):
    """The chosen action index is outside the candidate list."""


# --- data generation ----------------------------------------------------

class NotEnoughTargets(WebNavKitError):
    """Fewer eligible target pages exist than were requested."""


class UnparsableResponse(WebNavKitError):
    """No question/answer pairs could be extracted from an LLM reply."""


class ClientError(WebNavKitError):
    """An external client (LLM, captioner) failed."""


# --- taxonomy / metrics -------------------------------------------------

class TaxonomyParseError(WebNavKitError):
    """A taxonomy file could not be parsed."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class CycleDetected(WebNavKitError):
    """The hypernym taxonomy contains a parent cycle."""


class UnknownSynset(WebNavKitError):
    """A synset id was looked up that is not in the taxonomy."""


class UnknownRecord(WebNavKitError):
    """A trajectory references a record id that cannot be resolved."""


# --- model / training ---------------------------------------------------

class EmptyQuestion(WebNavKitError):
    """The question tokenizes to nothing."""


class UndecodableImage(WebNavKitError):
    """An image file could not be decoded."""


class NoCandidates(WebNavKitError):
    """A navigation step was attempted with an empty candidate set."""


class NonFiniteGradient(WebNavKitError):
    """A gradient check produced NaN or infinite values."""
