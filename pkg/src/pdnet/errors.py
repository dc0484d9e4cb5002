"""Exception types raised across the pipeline."""


class PdnetError(Exception):
    """Base class for all pdnet errors."""


class NormalizationEmpty(PdnetError, ValueError):
    """A name normalized to the empty string."""


class UrlParseError(PdnetError, ValueError):
    """A string could not be interpreted as a URL."""


class CorpusNotFound(PdnetError, FileNotFoundError):
    pass


class ParseFailed(PdnetError, ValueError):
    """Model output could not be parsed into JSON even after repair."""


class ExtractionUnavailable(PdnetError):
    """The completion backend could not produce an answer (retriable)."""


class ReplayMiss(ExtractionUnavailable):
    """No recorded completion exists for a prompt."""


class InvariantViolation(PdnetError, AssertionError):
    """Internal consistency check failed; indicates a bug, not bad input."""


class BuildError(PdnetError, ValueError):
    pass


class ExportError(PdnetError, OSError):
    pass


class QueryError(PdnetError, ValueError):
    pass


class NotFound(PdnetError, KeyError):
    pass


class EvalError(PdnetError, ValueError):
    pass
