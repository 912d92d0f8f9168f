"""Exception types shared across the package."""


class SpinLZError(Exception):
    """Base class for package-specific errors."""


class DomainError(SpinLZError, ValueError):
    """An argument is outside the mathematical domain of an operation."""


class ValidationError(SpinLZError, ValueError):
    """A physical object (density matrix, tensor set, ...) fails its invariants."""


class ConfigError(SpinLZError, ValueError):
    """An experiment configuration is malformed or violates a precondition.

    ``path`` identifies the offending key, ``line`` the line in the config
    document when the error comes from parsing a file.
    """

    def __init__(self, message, path=None, line=None):
        self.path = path
        self.line = line
        prefix = ""
        if path is not None:
            prefix += f"{path}: "
        if line is not None:
            prefix += f"(line {line}) "
        super().__init__(prefix + message)


class NumericError(SpinLZError, RuntimeError):
    """A numerical procedure failed to converge or lost accuracy."""
