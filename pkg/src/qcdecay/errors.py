class QcdecayError(Exception):
    """Base class for package errors."""


class ConfigError(QcdecayError, ValueError):
    def __init__(self, errors):
        if isinstance(errors, str):
            errors = [errors]
        self.errors = list(errors)
        super().__init__("; ".join(self.errors))


class ResourceCapError(QcdecayError):
    """A run would exceed a configured size cap."""


class NumericalError(QcdecayError, ArithmeticError):
    """Evaluation at a singular point or a failed factorization."""
