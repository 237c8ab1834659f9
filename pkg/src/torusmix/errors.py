"""Exception hierarchy. The CLI maps these onto its exit codes."""


class TorusmixError(Exception):
    pass


class DomainError(TorusmixError, ValueError):
    """An argument lies outside the domain of the operation."""


class PrecisionError(TorusmixError):
    """The sampling grid is too coarse for the requested quantity."""


class IntegrationError(TorusmixError, ArithmeticError):
    """A flow integration produced non-finite values."""


class ConfigError(TorusmixError):
    """Malformed or out-of-domain run configuration."""
