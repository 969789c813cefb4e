"""Exception types shared across the package."""


class ConfigurationError(ValueError):
    """Parameters or topology that no execution can be built from."""


class ResilienceError(ConfigurationError):
    """n < 3t + 1."""


class FieldCapacityError(ConfigurationError):
    """More processors than distinct nonzero field labels."""


class DecodeFailure(Exception):
    """No codeword lies within the requested error distance."""


class InvariantViolation(RuntimeError):
    """A protocol guarantee failed during simulation; always a bug or a model breach."""
