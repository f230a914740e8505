"""Exception hierarchy."""


class LplabError(Exception):
    """Base class for errors raised by lplab."""


class DomainError(LplabError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class ConfigurationError(LplabError, ValueError):
    """Inconsistent run configuration, grid layout or input file."""
