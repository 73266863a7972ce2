"""Exception hierarchy shared by all bakerweyl modules."""


class BakerWeylError(Exception):
    """Base class for every error raised by this package."""


class DomainError(BakerWeylError, ValueError):
    """An argument lies outside the domain where the quantity is defined."""


class ScaleError(BakerWeylError):
    """A size limit (index overflow, dense cap, oracle budget) would be exceeded."""


class ConvergenceError(BakerWeylError, RuntimeError):
    """An iterative method hit its iteration cap.

    ``interval`` holds the last two estimates so callers can judge how far
    off the answer was.
    """

    def __init__(self, message, interval=None, index=None):
        super().__init__(message)
        self.interval = interval
        self.index = index


class ConfigError(BakerWeylError, ValueError):
    """Malformed or inconsistent experiment configuration."""
