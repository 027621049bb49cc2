"""Exception types shared across the package.

All of them subclass a builtin so callers that only know about ``ValueError``
or ``NotImplementedError`` keep working.
"""


class DomainError(ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class StructureError(ValueError):
    """A tree or model does not have the structure an operation requires."""


class CapabilityError(NotImplementedError):
    """The requested family, order or model combination is not supported."""


class ConfigError(ValueError):
    """A model configuration is inconsistent (e.g. missing sampler bounds)."""


class NumericalError(ArithmeticError):
    """A quantity that must be positive came out with the wrong sign or non-finite."""
