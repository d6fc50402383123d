"""Exception hierarchy shared by the library and the CLI."""


class CollapseBoundsError(Exception):
    """Base class for all errors raised by this package."""

    exit_code = 3


class ValidationError(CollapseBoundsError, ValueError):
    """Bad input: a value, file or configuration failed validation."""

    exit_code = 2


class RegimeError(ValidationError):
    """A correlation length lies outside the small-r regime of the CSL geometry factor."""

    def __init__(self, message, r_valid_max):
        super().__init__(message)
        self.r_valid_max = r_valid_max


class ConversionError(ValidationError):
    """No conversion path between two spectrum kinds, or missing context."""


class ConfigError(ValidationError):
    """Configuration file error carrying a source location."""

    def __init__(self, message, line=None, column=None, path=None):
        loc = []
        if path is not None:
            loc.append(str(path))
        if line is not None:
            loc.append(f"line {line}")
        if column is not None:
            loc.append(f"column {column}")
        prefix = ", ".join(loc)
        super().__init__(f"{prefix}: {message}" if prefix else message)
        self.line = line
        self.column = column
        self.path = path


class NumericalError(CollapseBoundsError, ArithmeticError):
    """A numerical procedure could not produce a meaningful result."""

    exit_code = 3
