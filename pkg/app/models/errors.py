"""Exception hierarchy shared by the numerics and the command-line front end"""
from typing import Optional


class GmmsError(Exception):
    """Base class for all toolkit errors"""


class DomainError(GmmsError, ValueError):
    """Argument outside the domain of an operation"""


class DimensionError(GmmsError, ValueError):
    """Operands carry different Fock cutoffs"""


class PreconditionError(GmmsError, ValueError):
    """Input is valid in general but not for this operation"""


class TruncationError(GmmsError):
    """The Fock cutoff is too small for the requested state"""

    def __init__(self, message: str, required_n_max: Optional[int] = None):
        super().__init__(message)
        self.required_n_max = required_n_max


class NumericalIntegrityError(GmmsError):
    """A numerical invariant failed (PSD violation, overflow, no convergence)"""
