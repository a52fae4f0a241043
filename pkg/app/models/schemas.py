"""Pydantic models for state descriptions, tolerances and reports"""
import math
from enum import Enum
from pathlib import Path
from typing import Dict, List, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from .errors import DomainError

TWO_PI = 2.0 * math.pi


class GmmsKind(str, Enum):
    """Candidate family of a Gaussian maximally mixed state"""
    THERMAL = "thermal"
    CVMMS = "cvmms"
    SQUEEZED = "squeezed"
    RIEMANN = "riemann"


# Fields each kind carries, in canonical text order; the first one is the
# parameter an entropy scan varies when a template names no placeholder.
KIND_FIELDS: Dict[GmmsKind, Tuple[str, ...]] = {
    GmmsKind.THERMAL: ("nbar",),
    GmmsKind.CVMMS: ("b",),
    GmmsKind.SQUEEZED: ("b", "s", "phi"),
    GmmsKind.RIEMANN: ("b", "delta"),
}

SCAN_PARAMETER: Dict[GmmsKind, str] = {
    GmmsKind.THERMAL: "nbar",
    GmmsKind.CVMMS: "b",
    GmmsKind.SQUEEZED: "s",
    GmmsKind.RIEMANN: "delta",
}

_ALL_FIELDS = ("nbar", "b", "s", "phi", "delta")


def _split_spec_text(text: str) -> Tuple[str, Dict[str, str]]:
    """Split `kind:key=value,...` into the kind and raw field strings"""
    head, _, tail = text.strip().partition(":")
    raw: Dict[str, str] = {}
    if tail.strip():
        for item in tail.split(","):
            key, sep, value = item.partition("=")
            key = key.strip()
            if not sep or not key:
                raise DomainError(f"Malformed field '{item.strip()}' in spec '{text}'")
            if key in raw:
                raise DomainError(f"Field '{key}' given twice in spec '{text}'")
            raw[key] = value.strip()
    return head.strip().lower(), raw


def _parse_kind(name: str, text: str) -> GmmsKind:
    try:
        return GmmsKind(name)
    except ValueError:
        allowed = ", ".join(k.value for k in GmmsKind)
        raise DomainError(f"Unknown state kind '{name}' in spec '{text}' (expected one of {allowed})")


def _parse_float(key: str, value: str) -> float:
    try:
        return float(value)
    except ValueError:
        raise DomainError(f"Field '{key}' must be a real number, got '{value}'")


class GmmsSpec(BaseModel):
    """Tagged description of a GMMS candidate

    Canonical text forms: `thermal:nbar=1.0`, `cvmms:b=2.0`,
    `squeezed:b=2.0,s=0.3,phi=0.7854`, `riemann:b=1.0,delta=0.1`.
    """
    model_config = ConfigDict(frozen=True, extra="forbid")

    kind: GmmsKind
    nbar: Optional[float] = Field(None, ge=0, description="Mean photon number (thermal)")
    b: Optional[float] = Field(None, gt=0, description="Phase-space boundary radius")
    s: Optional[float] = Field(None, ge=0, description="Squeezing magnitude")
    phi: Optional[float] = Field(None, description="Squeezing argument, reduced to [0, 2pi)")
    delta: Optional[float] = Field(None, gt=0, description="Riemann grid spacing")

    @field_validator("nbar", "b", "s", "phi", "delta")
    @classmethod
    def finite(cls, v):
        if v is not None and not math.isfinite(v):
            raise ValueError("must be finite")
        return v

    @field_validator("phi")
    @classmethod
    def reduce_phi(cls, v):
        if v is None:
            return v
        return math.fmod(math.fmod(v, TWO_PI) + TWO_PI, TWO_PI)

    @model_validator(mode="before")
    @classmethod
    def default_phi(cls, data):
        if isinstance(data, dict) and str(getattr(data.get("kind"), "value", data.get("kind"))) == "squeezed":
            if data.get("phi") is None:
                data = {**data, "phi": 0.0}
        return data

    @model_validator(mode="after")
    def fields_match_kind(self):
        wanted = KIND_FIELDS[self.kind]
        for name in _ALL_FIELDS:
            value = getattr(self, name)
            if name in wanted and value is None:
                raise ValueError(f"field '{name}' is required for kind '{self.kind.value}'")
            if name not in wanted and value is not None:
                raise ValueError(f"field '{name}' is not allowed for kind '{self.kind.value}'")
        return self

    @classmethod
    def parse(cls, text: str) -> "GmmsSpec":
        """Parse the canonical text form"""
        name, raw = _split_spec_text(text)
        kind = _parse_kind(name, text)
        values = {key: _parse_float(key, value) for key, value in raw.items()}
        return cls(kind=kind, **values)

    def __str__(self) -> str:
        fields = ",".join(f"{name}={float(getattr(self, name))!r}" for name in KIND_FIELDS[self.kind])
        return f"{self.kind.value}:{fields}"


class SpecTemplate(BaseModel):
    """A spec text with one free parameter, e.g. `cvmms:b=B` or plain `thermal`"""
    model_config = ConfigDict(frozen=True)

    kind: GmmsKind
    raw: Dict[str, str] = Field(default_factory=dict)

    @classmethod
    def parse(cls, text: str) -> "SpecTemplate":
        name, raw = _split_spec_text(text)
        return cls(kind=_parse_kind(name, text), raw=raw)

    def render(self, value: float, placeholder: Optional[str] = None) -> GmmsSpec:
        """Substitute `value` for the placeholder (or the kind's scan parameter)"""
        fields: Dict[str, float] = {}
        substituted = False
        for key, text in self.raw.items():
            if placeholder is not None and text == placeholder:
                fields[key] = value
                substituted = True
            else:
                fields[key] = _parse_float(key, text)
        if not substituted:
            if placeholder is not None:
                raise DomainError(f"Placeholder '{placeholder}' does not occur in template for '{self.kind.value}'")
            key = SCAN_PARAMETER[self.kind]
            # a template that already fixes the scan parameter is constant along the grid
            if key not in fields:
                fields[key] = value
        return GmmsSpec(kind=self.kind, **fields)


class QuadratureSpec(BaseModel):
    """Polar quadrature orders over a disk"""
    model_config = ConfigDict(frozen=True)

    radial_order: int = Field(64, ge=1, description="Gauss-Legendre nodes on [0, b]")
    angular_order: int = Field(128, ge=1, description="Uniform nodes on [0, 2pi)")

    def doubled(self) -> "QuadratureSpec":
        return QuadratureSpec(radial_order=2 * self.radial_order, angular_order=2 * self.angular_order)


class ToleranceProfile(BaseModel):
    """Cutoff-selection and quadrature tolerances governing all numerics"""
    model_config = ConfigDict(frozen=True)

    tau_trace: float = Field(1e-10, gt=0, lt=1, description="Truncation budget for lost trace")
    tau_psd: float = Field(1e-10, gt=0, description="Largest tolerated negative eigenvalue magnitude")
    tau_grid: float = Field(1e-3, gt=0, description="Husimi grid normalization tolerance")
    quadrature_tol: float = Field(1e-8, gt=0, description="HS change that stops order doubling")
    diagonal_tol: float = Field(1e-12, ge=0, description="Off-diagonal magnitude counted as zero")
    max_doublings: int = Field(3, ge=0, description="Quadrature order doublings before giving up")


class StateReport(BaseModel):
    """Scalar diagnostics of a density operator"""
    spec: Optional[str] = None
    n_max: int
    trace: float
    entropy_nats: float
    purity: float
    mean_photon: float
    offdiag_hs_mass: float
    weights: Optional[List[float]] = None

    @property
    def entropy_bits(self) -> float:
        return self.entropy_nats / math.log(2.0)


class PurificationReport(BaseModel):
    """Outcome of comparing a purification's reduced state against a target"""
    max_entry_deviation: float
    hs_deviation: float
    tol: float
    passed: bool
    offdiag_mass_removed: float = 0.0


class ScanRow(BaseModel):
    """One row of an entropy scan"""
    param: float
    entropy_nats: float
    trace: float
    mean_photon: float


class DistanceRow(BaseModel):
    """One row of a distance scan (parameter against HS distance)"""
    param: float
    hs_distance: float


class AcceptanceResult(BaseModel):
    """Outcome of a single acceptance check"""
    name: str
    passed: bool
    detail: Dict[str, float] = Field(default_factory=dict)
    message: str = ""
    runtime_s: float = 0.0


class AcceptanceReport(BaseModel):
    """All acceptance checks of one run"""
    passed: bool
    results: List[AcceptanceResult]


class OutputFormat(str, Enum):
    """Serialization format of command output"""
    CSV = "csv"
    JSON = "json"


class RunConfig(BaseModel):
    """Validated command-line configuration"""
    spec: Optional[str] = None
    cutoff_policy: str = Field("auto", description="'auto' or 'fixed:<n_max>'")
    tol: Optional[float] = Field(None, gt=0)
    output_format: OutputFormat = OutputFormat.CSV
    out: Optional[Path] = None

    @field_validator("cutoff_policy")
    @classmethod
    def validate_cutoff_policy(cls, v: str) -> str:
        v = v.strip().lower()
        if v == "auto":
            return v
        number = v.split(":", 1)[1] if v.startswith("fixed:") else v
        try:
            n_max = int(number)
        except ValueError:
            raise ValueError("cutoff must be 'auto', 'fixed:<n_max>' or an integer")
        if n_max < 0:
            raise ValueError("fixed n_max must be non-negative")
        return f"fixed:{n_max}"

    @property
    def fixed_n_max(self) -> Optional[int]:
        if self.cutoff_policy == "auto":
            return None
        return int(self.cutoff_policy.split(":", 1)[1])

    def gmms_spec(self) -> GmmsSpec:
        if self.spec is None:
            raise DomainError("Field 'spec' is required")
        return GmmsSpec.parse(self.spec)
