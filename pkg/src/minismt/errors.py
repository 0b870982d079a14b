"""Exception hierarchy. Every error carries a one-word category for the CLI."""


class MinismtError(Exception):
    """Base class; `category` is emitted on the CLI's one-line error output."""

    category = "internal"


class ParameterError(MinismtError):
    """A caller-supplied parameter violates a documented precondition."""

    category = "usage"


class CorpusAlignmentError(MinismtError):
    """Parallel files disagree on line count."""

    category = "data"


class FormatError(MinismtError):
    """A model or corpus file does not follow its declared format."""

    category = "format"


class TrainingError(MinismtError):
    """Training was asked to run on unusable data (e.g. an empty corpus)."""

    category = "data"


class ConfigError(MinismtError):
    """Pipeline configuration is invalid."""

    category = "config"


class MissingArtifactError(MinismtError):
    """A pipeline stage needs an artifact a previous stage has not produced."""

    category = "stage"
