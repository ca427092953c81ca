"""Exception types shared across the package."""


class GramtailError(Exception):
    """Base class for all package errors."""


class DomainError(GramtailError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class DegenerateDataError(GramtailError, ValueError):
    """Data admits no meaningful estimate (e.g. all observations equal)."""


class InsufficientDataError(GramtailError, ValueError):
    """Too few observations for the requested fit or scan."""


class ConfigError(GramtailError, ValueError):
    """Invalid configuration value (replicate counts, iteration counts, ...)."""


class ContractViolationError(GramtailError, ValueError):
    """Caller broke an interface contract (e.g. mismatched tails in a test)."""


class NumericsError(GramtailError, ArithmeticError):
    """A numerical routine failed to produce a usable result."""


class ParseError(GramtailError, ValueError):
    """Malformed input file.

    Carries the 1-based line number when known.
    """

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class TokenizationError(GramtailError, ValueError):
    """A transcription contains a character outside the declared alphabet."""

    def __init__(self, message, char=None, position=None):
        self.char = char
        self.position = position
        super().__init__(message)


class EmptyCorpusError(GramtailError, ValueError):
    """A corpus has no usable material after filtering."""


class UnknownFamilyError(GramtailError, KeyError):
    """Requested family or genus is not present in the corpus."""

    def __init__(self, name, available):
        self.name = name
        self.available = list(available)
        super().__init__(f"unknown family {name!r}; available: {', '.join(self.available)}")
