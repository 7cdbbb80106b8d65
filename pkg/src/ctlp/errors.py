"""Exception types shared across the package."""


class CTLPError(Exception):
    """Base class for all package errors."""


class InputError(CTLPError, ValueError):
    """Malformed or inconsistent input data."""


class DomainError(CTLPError, ValueError):
    """Argument outside the domain where an operation is defined."""


class LoadError(InputError):
    """Instance document failed validation; ``path`` names the offending field."""

    def __init__(self, message: str, path: str = "$"):
        super().__init__(f"{path}: {message}")
        self.path = path


class CertificateError(CTLPError):
    """An operation needs a regularity certificate that does not hold."""
