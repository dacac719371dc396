"""Exception hierarchy shared by the library and the command-line front end."""


class SvpgasError(Exception):
    """Base class for all package errors."""


class ConfigError(SvpgasError, ValueError):
    """Invalid run configuration.

    ``problems`` lists every violated field so callers can report them all
    at once rather than one per run.
    """

    def __init__(self, problems):
        if isinstance(problems, str):
            problems = [problems]
        self.problems = list(problems)
        super().__init__("; ".join(self.problems))


class DataError(SvpgasError, ValueError):
    """Malformed or missing input data."""


class DegenerateFilterError(SvpgasError, FloatingPointError):
    """All particle weights vanished at some time index."""

    def __init__(self, t=None):
        self.t = None if t is None else int(t)
        where = "" if t is None else f" at t={self.t}"
        super().__init__(f"particle weights collapsed (all -inf or NaN){where}")
