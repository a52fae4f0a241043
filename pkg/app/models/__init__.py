"""Data models and errors"""
from .errors import (
    DimensionError,
    DomainError,
    GmmsError,
    NumericalIntegrityError,
    PreconditionError,
    TruncationError,
)
from .schemas import (
    AcceptanceReport,
    AcceptanceResult,
    DistanceRow,
    GmmsKind,
    GmmsSpec,
    OutputFormat,
    PurificationReport,
    QuadratureSpec,
    RunConfig,
    ScanRow,
    SpecTemplate,
    StateReport,
    ToleranceProfile,
)

__all__ = [
    "AcceptanceReport",
    "AcceptanceResult",
    "DimensionError",
    "DistanceRow",
    "DomainError",
    "GmmsError",
    "GmmsKind",
    "GmmsSpec",
    "NumericalIntegrityError",
    "OutputFormat",
    "PreconditionError",
    "PurificationReport",
    "QuadratureSpec",
    "RunConfig",
    "ScanRow",
    "SpecTemplate",
    "StateReport",
    "ToleranceProfile",
    "TruncationError",
]
