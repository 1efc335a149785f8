"""Exception types raised across the package."""


class ParameterError(ValueError):
    """An argument is out of range or inconsistent with another argument."""


class IngestionError(ValueError):
    """A dataset file could not be parsed."""


class NumericError(ArithmeticError):
    """Non-finite values reached a numeric routine."""


class UndefinedMetricError(ValueError):
    """The metric has no value on this input (e.g. a zero denominator)."""


class BootstrapError(RuntimeError):
    """Too many bootstrap resamples produced an undefined metric."""


class ConfigError(ValueError):
    """An experiment configuration is invalid."""
