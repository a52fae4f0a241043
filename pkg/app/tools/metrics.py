"""Scalar diagnostics and parameter scans

Entropies are in nats throughout; `StateReport.entropy_bits` converts for
display.
"""
import logging
import math
from typing import Iterable, List, Optional, Union

import numpy as np
from scipy.special import entr

from app.models.errors import DimensionError
from app.models.schemas import (
    DistanceRow,
    GmmsKind,
    GmmsSpec,
    QuadratureSpec,
    ScanRow,
    SpecTemplate,
    StateReport,
    ToleranceProfile,
)

from .fock import FockCutoff, FockDensityOperator, spectrum

logger = logging.getLogger(__name__)


def entropy(rho: FockDensityOperator, tolerance: Optional[ToleranceProfile] = None) -> float:
    """S = -sum_i lambda_i ln lambda_i over the clamped spectrum, 0 ln 0 = 0"""
    values = spectrum(rho, tolerance)
    return float(np.sum(entr(values)))


def purity(rho: FockDensityOperator) -> float:
    """Tr rho^2"""
    return float(np.sum(np.abs(rho.entries) ** 2))


def mean_photon(rho: FockDensityOperator) -> float:
    """Tr(rho a^dagger a) = sum_n n rho_nn"""
    return float(np.dot(np.arange(rho.cutoff.dim), rho.diagonal))


def offdiag_hs_mass(rho: FockDensityOperator) -> float:
    """HS norm of the off-diagonal part"""
    return float(np.linalg.norm(rho.entries - np.diag(rho.entries.diagonal())))


def hs_distance(a: FockDensityOperator, b: FockDensityOperator) -> float:
    """sqrt(Tr[(a-b)^dagger (a-b)])"""
    if a.cutoff.n_max != b.cutoff.n_max:
        raise DimensionError(f"Cutoff mismatch: n_max {a.cutoff.n_max} vs {b.cutoff.n_max}")
    return float(np.linalg.norm(a.entries - b.entries))


def thermal_entropy(nbar: float) -> float:
    """(nbar+1) ln(nbar+1) - nbar ln(nbar)"""
    if nbar == 0:
        return 0.0
    return (nbar + 1.0) * math.log1p(nbar) - nbar * math.log(nbar)


def state_report(
    rho: FockDensityOperator,
    spec: Optional[GmmsSpec] = None,
    include_weights: bool = False,
    tolerance: Optional[ToleranceProfile] = None,
) -> StateReport:
    return StateReport(
        spec=str(spec) if spec is not None else None,
        n_max=rho.cutoff.n_max,
        trace=rho.trace,
        entropy_nats=entropy(rho, tolerance),
        purity=purity(rho),
        mean_photon=mean_photon(rho),
        offdiag_hs_mass=offdiag_hs_mass(rho),
        weights=rho.diagonal.tolist() if include_weights else None,
    )


def _template(template: Union[SpecTemplate, str]) -> SpecTemplate:
    return SpecTemplate.parse(template) if isinstance(template, str) else template


def _build(spec, cutoff, quad, tolerance):
    # local import: states pulls in the quadrature machinery
    from .states import build_state

    return build_state(spec, cutoff, quad, tolerance)


def entropy_scan(
    template: Union[SpecTemplate, str],
    grid: Iterable[float],
    cutoff: Optional[FockCutoff] = None,
    placeholder: Optional[str] = None,
    quad: Optional[QuadratureSpec] = None,
    tolerance: Optional[ToleranceProfile] = None,
) -> List[ScanRow]:
    """Entropy, trace and mean photon number along a one-parameter family"""
    template = _template(template)
    rows = []
    for value in grid:
        spec = template.render(float(value), placeholder)
        rho = _build(spec, cutoff, quad, tolerance)
        rows.append(
            ScanRow(param=float(value), entropy_nats=entropy(rho, tolerance), trace=rho.trace, mean_photon=mean_photon(rho))
        )
        logger.debug(f"Entropy scan {spec}: S={rows[-1].entropy_nats:.12g}")
    return rows


def distance_scan(
    template_a: Union[SpecTemplate, str],
    template_b: Union[SpecTemplate, str],
    grid: Iterable[float],
    placeholder: Optional[str] = None,
    cutoff: Optional[FockCutoff] = None,
    quad: Optional[QuadratureSpec] = None,
    tolerance: Optional[ToleranceProfile] = None,
) -> List[DistanceRow]:
    """HS distance between two families evaluated at a shared cutoff"""
    from .states import auto_cutoff

    template_a, template_b = _template(template_a), _template(template_b)
    rows = []
    for value in grid:
        spec_a = template_a.render(float(value), placeholder)
        spec_b = template_b.render(float(value), placeholder)
        shared = cutoff or FockCutoff(
            max(auto_cutoff(spec_a, tolerance).n_max, auto_cutoff(spec_b, tolerance).n_max)
        )
        distance = hs_distance(_build(spec_a, shared, quad, tolerance), _build(spec_b, shared, quad, tolerance))
        rows.append(DistanceRow(param=float(value), hs_distance=distance))
        logger.debug(f"Distance {spec_a} vs {spec_b} at n_max={shared.n_max}: {distance:.6e}")
    return rows


def riemann_convergence(
    b: float,
    deltas: Iterable[float],
    cutoff: Optional[FockCutoff] = None,
    tolerance: Optional[ToleranceProfile] = None,
) -> List[DistanceRow]:
    """HS distance of the Riemann-sum candidate to the closed-form CVMMS per grid spacing"""
    return distance_scan(
        SpecTemplate(kind=GmmsKind.RIEMANN, raw={"b": repr(float(b))}),
        SpecTemplate(kind=GmmsKind.CVMMS, raw={"b": repr(float(b))}),
        deltas,
        cutoff=cutoff,
        tolerance=tolerance,
    )


def squeezing_distance_scan(
    b: float,
    s_values: Iterable[float],
    phi: float = 0.0,
    cutoff: Optional[FockCutoff] = None,
    quad: Optional[QuadratureSpec] = None,
    tolerance: Optional[ToleranceProfile] = None,
) -> List[DistanceRow]:
    """HS distance of the squeezed GMMS to the CVMMS of the same boundary per squeezing s"""
    return distance_scan(
        SpecTemplate(kind=GmmsKind.SQUEEZED, raw={"b": repr(float(b)), "phi": repr(float(phi))}),
        SpecTemplate(kind=GmmsKind.CVMMS, raw={"b": repr(float(b))}),
        s_values,
        cutoff=cutoff,
        quad=quad,
        tolerance=tolerance,
    )


def entropy_ceiling(cutoff: FockCutoff) -> float:
    """ln(n_max + 1), the largest entropy a state on the truncated space can have"""
    return math.log(cutoff.dim)


__all__ = [
    "distance_scan",
    "entropy",
    "entropy_ceiling",
    "entropy_scan",
    "hs_distance",
    "mean_photon",
    "offdiag_hs_mass",
    "purity",
    "riemann_convergence",
    "squeezing_distance_scan",
    "state_report",
    "thermal_entropy",
]
