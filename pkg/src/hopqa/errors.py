"""Exception hierarchy shared across the package.

Every operational failure raises a subclass of :class:`HopQAError` so the
CLI and the HTTP service can map errors to diagnostics without matching on
message strings.
"""


class HopQAError(Exception):
    """Base class for all errors raised by this package."""


class ParseError(HopQAError):
    """A line-oriented input file is malformed; carries the line number."""

    def __init__(self, path, line_no, message):
        super().__init__(f"{path}:{line_no}: {message}")
        self.path = str(path)
        self.line_no = line_no


class FormatError(HopQAError):
    """A binary or structured file does not match its expected format."""


class ConfigError(HopQAError):
    """Invalid configuration value (ratios, counts, missing paths...)."""


class DataError(HopQAError):
    """A dataset violates a training precondition (e.g. missing class)."""


class ContractError(HopQAError):
    """A caller violated an operation's precondition."""


class ExhaustedNegativesError(HopQAError):
    """Rejection sampling could not find a corrupt triple; the relation is
    (nearly) complete over the entity set."""


class DivergenceError(HopQAError):
    """Training produced a non-finite loss."""

    def __init__(self, epoch, message=None):
        super().__init__(message or f"non-finite loss at epoch {epoch}")
        self.epoch = epoch


class CheckpointWriteError(HopQAError):
    """Could not write a checkpoint file."""


class CorruptionError(FormatError):
    """A checkpoint file is truncated or has trailing garbage."""


class IncompatibleGraphError(HopQAError):
    """A checkpoint was produced against a different vocabulary."""


class NoEntityFoundError(HopQAError):
    """No gazetteer entry matched the question."""

    def __init__(self, question):
        super().__init__(f"no known entity found in question: {question!r}")
        self.question = question


class AmbiguousEntityError(HopQAError):
    """The best gazetteer match maps to several entities."""

    def __init__(self, surface, candidates):
        super().__init__(
            f"surface form {surface!r} is ambiguous over {len(candidates)} entities"
        )
        self.surface = surface
        self.candidates = list(candidates)


class GenerationError(HopQAError):
    """Question generation failed for a template."""
