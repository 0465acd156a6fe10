"""Exception types shared across the toolkit."""


class BloomQGError(Exception):
    """Base class for all toolkit errors."""


class MappingError(BloomQGError):
    """Annotation label outside the supported label set."""


class DatasetError(BloomQGError):
    """Malformed or incomplete dataset record."""


class TemplateError(BloomQGError):
    """Bad template text or placeholder bindings."""


class StyleError(TemplateError):
    """A cloze template was used where a prefix template is required."""


class BackendError(BloomQGError):
    """An external backend (LM, recognizer, labeler) failed."""


class EmptyResultError(BloomQGError):
    """Every candidate produced by a sampling stage was degenerate."""


class SerializationError(BloomQGError):
    """Generator input could not be serialized or parsed."""


class ConfigError(BloomQGError):
    """Missing or invalid configuration."""


class UndefinedValueError(BloomQGError):
    """A statistic is undefined for the given input (e.g. too few ratings)."""


class AlignmentError(BloomQGError):
    """Generated outputs from different systems could not be aligned."""
