"""Exception hierarchy shared by the analysis modules and the CLI."""


class HolidetError(Exception):
    """Base class for every error raised by this package."""


class InputError(HolidetError):
    """Bad input data; the CLI maps these to exit code 2."""


class ConfigError(HolidetError):
    """Bad configuration; the CLI maps these to exit code 3."""


class RangeError(InputError, IndexError):
    """A subrange or lag lies outside the series."""


class DegenerateWindowError(InputError):
    """A window is too short for the requested statistic."""


class InsufficientDataError(InputError):
    """The series is too short for the requested analysis."""


class InsufficientContextError(InputError):
    """Neighbour-based classification needs at least two windows."""


class WindowTooShortError(InsufficientDataError):
    """Period detection was asked to run on fewer samples than allowed."""


class NoSpikesError(InputError):
    """The spike threshold is undefined (constant signal)."""


class ConsistencyError(HolidetError):
    """Internal invariant violated, e.g. overlapping spikes."""


class AlignmentError(InputError):
    """Two label sequences (or labels and windows) do not line up."""

    def __init__(self, message, offending=()):
        super().__init__(message)
        self.offending = list(offending)


class NormalizationError(InputError):
    """Error metric undefined because the reference signal is all zero."""


class SpecificationError(ConfigError):
    """Invalid generator specification (e.g. overlapping vacancies)."""


class ParseError(InputError):
    """Malformed CSV row; carries the 1-based line number."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class OrderingError(InputError):
    """Timestamps are not strictly increasing."""


class CoverageError(InputError):
    """Fewer than the required fraction of samples are present."""
