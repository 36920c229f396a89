"""Exception hierarchy shared by the numerical modules and the CLI."""


class TdcfieError(Exception):
    """Base class for all package errors."""


class ConfigError(TdcfieError, ValueError):
    """Invalid parameters or configuration (CLI exit code 2)."""


class DomainError(TdcfieError, ValueError):
    """Argument outside the domain of a mathematical operation."""


class InvalidStencil(DomainError):
    """Interpolation stencil with repeated nodes."""


class HistoryError(TdcfieError, ValueError):
    """A history query outside the stored range."""


class NumericalFailure(TdcfieError, RuntimeError):
    """A numerical procedure could not deliver its guarantee (CLI exit code 3)."""


class RootCountMismatch(NumericalFailure):
    """Argument-principle count disagrees with the roots Newton located."""

    def __init__(self, message, expected=None, found=None):
        super().__init__(message)
        self.expected = expected
        self.found = found


class QuadratureRefusal(NumericalFailure):
    """Requested quadrature resolution is too coarse to be trusted."""


class SearchFailure(NumericalFailure):
    """A Newton search failed from every seed."""


class SingularStep(NumericalFailure):
    """An implicit time step has a vanishing diagonal coefficient."""


class UnsupportedConfiguration(DomainError):
    """Valid input that the asymptotic formulas do not cover (e.g. a degenerate critical point)."""
