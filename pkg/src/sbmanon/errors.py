class SbmAnonError(Exception):
    """Base class for library errors."""

    exit_code = 1


class ParameterError(SbmAnonError, ValueError):
    """A probability, rate or size is outside its admissible range."""


class ConfigError(SbmAnonError, ValueError):
    """An experiment configuration is incomplete or infeasible."""


class InfeasibleError(SbmAnonError, ValueError):
    """The requested transformation cannot be carried out on this input."""


class CapacityError(SbmAnonError, RuntimeError):
    """An enumeration or allocation guard was exceeded."""

    exit_code = 3


class ParseError(SbmAnonError, ValueError):
    """Malformed input file."""

    exit_code = 2

    def __init__(self, message, path=None, lineno=None):
        self.path = path
        self.lineno = lineno
        where = ""
        if path is not None:
            where = f"{path}:{lineno}: " if lineno is not None else f"{path}: "
        super().__init__(where + message)


class FormatVersionError(SbmAnonError, ValueError):
    """A run record was written by an incompatible format version."""

    exit_code = 2
