"""Exception types shared across the package.

The CLI maps these onto exit codes: configuration problems exit 2,
data/file problems exit 3, numerical failures exit 4.
"""


class DeltansError(Exception):
    """Base class for all package errors."""


class DomainError(DeltansError, ValueError):
    """An argument is outside the mathematical domain of an operation."""


class UnknownFormulaError(DeltansError, KeyError):
    """A formula identifier is not in the registry."""

    def __str__(self):
        # KeyError repr-quotes its message; keep it readable.
        return str(self.args[0]) if self.args else ""


class UnsupportedFormulaError(DomainError):
    """The formula is registered but not implemented for this operation."""


class SchemaError(DeltansError, ValueError):
    """A file or config does not match the expected schema."""


class ParseError(DeltansError, ValueError):
    """A data file row could not be parsed."""

    def __init__(self, message, line=None, column=None):
        location = ""
        if line is not None:
            location = f" (line {line}"
            if column is not None:
                location += f", column {column!r}"
            location += ")"
        super().__init__(message + location)
        self.line = line
        self.column = column


class DataError(DeltansError, ValueError):
    """Inconsistent data, e.g. mismatched pair ids between files."""


class ConfigError(DeltansError, ValueError):
    """Invalid configuration value or field."""


class FitError(DeltansError, RuntimeError):
    """An optimization could not be carried out."""


class GeometryError(DomainError):
    """Ellipsoid/ellipse geometry is degenerate (not positive definite)."""
