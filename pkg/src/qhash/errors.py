"""Exception types shared across the package."""


class QHashError(Exception):
    """Base class for all package errors."""


class StructuralError(QHashError, ValueError):
    """Shapes or lengths of inputs do not fit together."""


class DomainError(QHashError, ValueError):
    """A numeric argument lies outside its allowed range."""


class ParseError(QHashError, ValueError):
    """Malformed text input (group strings, key strings, files)."""


class CapacityError(QHashError, RuntimeError):
    """An enumeration or dimension guard would be exceeded."""
