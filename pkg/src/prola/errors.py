"""Exception hierarchy shared by all prola modules."""


class ProlaError(Exception):
    """Base class for every error raised by this package."""


class InvalidParams(ProlaError, ValueError):
    """Learner parameters outside their permitted ranges."""


class DegenerateDistribution(ProlaError, ArithmeticError):
    """The observed arm carries (almost) all of the play probability."""


class ArmCountMismatch(ProlaError, ValueError):
    pass


class InvalidSpec(ProlaError, ValueError):
    """Malformed reward-process specification."""


class MalformedMatrix(ProlaError, ValueError):
    pass


class HorizonExceeded(ProlaError, IndexError):
    pass


class EmptyWindow(ProlaError, ValueError):
    pass


class ConfigError(ProlaError):
    pass


class ParseError(ConfigError):
    """Config text could not be parsed; message carries line/column."""


class ValidationError(ConfigError, ValueError):
    """Config parsed but violates a constraint; message names it."""
