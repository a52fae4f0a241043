"""Tools module - numerical building blocks"""
from .fock import FockCutoff, FockDensityOperator, FockPureVector, SchmidtPureState, TwoModePureState
from .metrics import entropy, hs_distance, mean_photon, state_report
from .phasespace import PhaseSpaceGrid, husimi_grid, husimi_point, smoothing_check, wigner_point
from .purify import g_purify, partial_trace_B, tmsv, verify_purification
from .states import auto_cutoff, build_state, cvmms_state, quadrature_gmms, riemann_gmms, thermal_state

__all__ = [
    "FockCutoff",
    "FockDensityOperator",
    "FockPureVector",
    "PhaseSpaceGrid",
    "SchmidtPureState",
    "TwoModePureState",
    "auto_cutoff",
    "build_state",
    "cvmms_state",
    "entropy",
    "g_purify",
    "hs_distance",
    "husimi_grid",
    "husimi_point",
    "mean_photon",
    "partial_trace_B",
    "quadrature_gmms",
    "riemann_gmms",
    "smoothing_check",
    "state_report",
    "thermal_state",
    "tmsv",
    "verify_purification",
]
