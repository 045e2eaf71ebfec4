"""Exception types shared across the toolkit.

Each error class corresponds to one failure mode of the public API; the CLI
maps them onto its exit-code contract (2 input error, 3 incompatibility,
4 join failure, 5 duplicate series).
"""


class TokextError(Exception):
    """Base class for all toolkit errors."""


class InvalidModel(TokextError):
    """A tokenizer model violates its structural invariants."""


class MissingSymbol(TokextError):
    """Encoding hit a symbol outside the vocabulary with byte fallback off."""


class InvalidByteSequence(TokextError):
    """A run of byte tokens does not decode as UTF-8."""

    def __init__(self, message: str, offset: int):
        super().__init__(message)
        self.offset = offset


class InvalidTokenId(TokextError):
    """A token id is out of range for the model decoding it."""


class EmptyCorpus(TokextError):
    """Training input contains no usable text."""


class ConfigError(TokextError):
    """A trainer configuration cannot be satisfied."""


class IncompatibleModels(TokextError):
    """Base and addon models disagree on marker or byte-token layout."""


class KindConflict(TokextError):
    """The same form appears with different kinds in base and addon."""


class EmptyInput(TokextError):
    """A statistics or evaluation operation received no input."""


class EmptyContext(TokextError):
    """A scorer that requires history was given an empty context."""


class ParseError(TokextError):
    """A line-delimited input file is malformed."""

    def __init__(self, message: str, line_number: int):
        super().__init__(f"line {line_number}: {message}")
        self.line_number = line_number


class InvalidScore(TokextError):
    """An offline score record violates its invariants."""


class BoundaryMerge(TokextError):
    """Tokenization merged across the prefix/target boundary."""


class JoinError(TokextError):
    """Offline scores do not cover every step of the evaluated tasks."""

    def __init__(self, message: str, missing: list[str]):
        super().__init__(message)
        self.missing = missing


class DuplicateSeries(TokextError):
    """Two series points share (checkpoint label, task, metric)."""
