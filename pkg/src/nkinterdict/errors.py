"""Exception and warning types shared across the package."""


class GridError(Exception):
    """Base class for all data and usage errors raised by this package."""


class ParseError(GridError):
    """Malformed input text (case file, CSV, JSON).

    Carries the 1-based line number of the offending input line when known.
    """

    def __init__(self, message, line_no=None):
        if line_no is not None:
            message = f"line {line_no}: {message}"
        super().__init__(message)
        self.line_no = line_no


class RefError(GridError):
    """A record references a bus or line that does not exist."""


class DomainError(GridError):
    """A value lies outside its allowed domain (e.g. probability not in (0,1])."""


class UsageError(GridError):
    """An operation was invoked with arguments that violate its contract."""


class SolverError(GridError):
    """A numerical solve failed beyond recovery; carries context of what was solved."""


class DataWarning(UserWarning):
    """Input data was accepted but silently simplified (e.g. ignored tap ratio)."""
