"""Exception hierarchy shared by the library and the CLI."""

from typing import Any, Dict, Optional


class GammaKitError(RuntimeError):
    """Base class for every error raised by gammakit."""


class InvalidArgumentError(GammaKitError, ValueError):
    """An operation was called with arguments outside its domain."""


class InvalidDimensionError(InvalidArgumentError):
    """Tuple length or matrix sizes are not usable (e.g. n < 2)."""


class NotAContractionError(InvalidArgumentError):
    """A matrix required to be a contraction has norm above 1 + tol."""

    def __init__(self, message: str, norm: float):
        super().__init__(message)
        self.norm = norm


class NumericalFailureError(GammaKitError):
    """A numerical routine failed or produced an unacceptable residual."""

    def __init__(self, message: str, residual: Optional[float] = None):
        super().__init__(message)
        self.residual = residual


class DegenerateCombinationError(NumericalFailureError):
    """Simultaneous triangularization kept failing for fresh random combinations."""


class TheoremViolationError(GammaKitError):
    """A structural identity of the canonical decomposition did not hold."""

    def __init__(self, message: str, *, diagnostics: Optional[Dict[str, Any]] = None):
        super().__init__(message)
        self.diagnostics: Dict[str, Any] = dict(diagnostics or {})


class InputFormatError(GammaKitError):
    """Malformed JSON input, unknown fields or bad command-line usage."""


class ConfigurationError(GammaKitError):
    """An environment / .env setting has an unusable value."""


class NotAGammaContractionError(GammaKitError):
    """The certificate falsified the Gamma_n-contraction property of a tuple."""

    def __init__(self, message: str, report: Any = None):
        super().__init__(message)
        self.report = report
