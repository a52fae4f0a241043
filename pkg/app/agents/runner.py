"""Orchestration of toolkit workflows

GmmsRunner resolves the cutoff policy, builds candidates, purifies and
verifies them, and records every step it takes so the command-line front end
can report what was done. It also hosts the acceptance suite.
"""
import logging
import math
import time
from typing import Any, Callable, Dict, List, Optional, Tuple

import numpy as np

from app.config import get_settings
from app.models import (
    AcceptanceReport,
    AcceptanceResult,
    DistanceRow,
    GmmsError,
    GmmsKind,
    GmmsSpec,
    PurificationReport,
    RunConfig,
    ScanRow,
    StateReport,
    ToleranceProfile,
)
from app.tools.fock import FockCutoff, FockDensityOperator, embedded_mms, partial_trace_B, partial_trace_B_general
from app.tools.metrics import (
    distance_scan,
    entropy,
    entropy_ceiling,
    entropy_scan,
    hs_distance,
    riemann_convergence,
    squeezing_distance_scan,
    state_report,
)
from app.tools.phasespace import (
    PhaseSpaceGrid,
    directional_spread,
    husimi_grid,
    husimi_point,
    radial_profile,
    smoothing_check,
)
from app.tools.purify import (
    apply_ancilla_unitary,
    g_purify,
    purify_with_truncation,
    random_ancilla_unitary,
    tmsv,
    verify_purification,
)
from app.tools.special import regularized_lower_gamma_sequence
from app.tools.states import (
    auto_cutoff,
    build_state,
    cvmms_state,
    geometric_cutoff,
    quadrature_gmms_with_diagnostics,
    thermal_state,
)

logger = logging.getLogger(__name__)

# Entrywise tolerance of the purification round trip
VERIFY_TOL = 1e-12

ACCEPTANCE_CHECKS = (
    "thermal_tmsv_correspondence",
    "cvmms_unit_trace",
    "purification_round_trip",
    "squeezed_collapse",
    "husimi_profile",
    "smoothing_identity",
    "riemann_convergence",
    "squeezing_distance",
    "ancilla_freedom",
    "entropy_ceiling",
)


class GmmsRunner:
    """
    Runs toolkit workflows and keeps a record of each step

    Every public workflow appends {action, input, observation} entries to
    `steps`; the list is reset at the start of each workflow.
    """

    def __init__(self, tolerance: ToleranceProfile, seed: int = 20240601):
        self.tolerance = tolerance
        self.seed = seed
        self.steps: List[Dict[str, str]] = []

    def _record(self, action: str, input: Any, observation: Any) -> None:
        self.steps.append({"action": action, "input": str(input), "observation": str(observation)[:200]})

    def resolve_cutoff(self, spec: GmmsSpec, config: Optional[RunConfig] = None) -> FockCutoff:
        """Fixed cutoff from the config, otherwise the automatic policy"""
        fixed = config.fixed_n_max if config is not None else None
        cutoff = FockCutoff(fixed) if fixed is not None else auto_cutoff(spec, self.tolerance)
        self._record("resolve_cutoff", spec, f"n_max={cutoff.n_max}")
        return cutoff

    def build(self, spec: GmmsSpec, config: Optional[RunConfig] = None) -> FockDensityOperator:
        cutoff = self.resolve_cutoff(spec, config)
        rho = build_state(spec, cutoff, tolerance=self.tolerance)
        self._record("build_state", spec, f"trace={rho.trace!r}, diagonal={rho.diagonal_flag}")
        return rho

    def state(self, config: RunConfig, include_weights: bool = False) -> StateReport:
        """Build the configured candidate and summarise it"""
        self.steps = []
        spec = config.gmms_spec()
        rho = self.build(spec, config)
        report = state_report(rho, spec, include_weights, self.tolerance)
        self._record("state_report", spec, f"entropy_nats={report.entropy_nats!r}")
        return report

    def purify(self, config: RunConfig) -> Tuple[np.ndarray, PurificationReport]:
        """g-purify the configured candidate and verify the reduced state

        Non-diagonal candidates lose their off-diagonal part first; the
        verification compares against that diagonal part and the report
        carries the HS mass removed.
        """
        self.steps = []
        spec = config.gmms_spec()
        rho = self.build(spec, config)
        state, removed = purify_with_truncation(rho, self.tolerance)
        self._record("purify", spec, f"offdiag_mass_removed={removed!r}")
        target = FockDensityOperator.from_diagonal(rho.diagonal, rho.cutoff)
        report = verify_purification(state, target, VERIFY_TOL)
        report = report.model_copy(update={"offdiag_mass_removed": removed})
        self._record("verify_purification", spec, f"max_entry_deviation={report.max_entry_deviation!r}")
        return np.asarray(state.coefficients), report

    def husimi(self, config: RunConfig, extent: Optional[float] = None, resolution: Optional[int] = None) -> PhaseSpaceGrid:
        self.steps = []
        settings = get_settings()
        spec = config.gmms_spec()
        rho = self.build(spec, config)
        extent = settings.husimi_extent if extent is None else extent
        resolution = settings.husimi_resolution if resolution is None else resolution
        grid = husimi_grid(rho, extent, resolution)
        self._record("husimi_grid", spec, f"extent={extent}, resolution={resolution}")
        return grid

    def _fixed_cutoff(self, config: Optional[RunConfig]) -> Optional[FockCutoff]:
        fixed = config.fixed_n_max if config is not None else None
        return FockCutoff(fixed) if fixed is not None else None

    def scan_entropy(self, template: str, grid: List[float], placeholder: Optional[str] = None, config: Optional[RunConfig] = None) -> List[ScanRow]:
        self.steps = []
        rows = entropy_scan(template, grid, self._fixed_cutoff(config), placeholder, tolerance=self.tolerance)
        self._record("entropy_scan", template, f"{len(rows)} rows")
        return rows

    def scan_distance(self, template_a: str, template_b: str, grid: List[float], placeholder: Optional[str] = None, config: Optional[RunConfig] = None) -> List[DistanceRow]:
        self.steps = []
        rows = distance_scan(template_a, template_b, grid, placeholder, self._fixed_cutoff(config), tolerance=self.tolerance)
        self._record("distance_scan", f"{template_a} vs {template_b}", f"{len(rows)} rows")
        return rows

    def scan_riemann(self, b: float, deltas: List[float], config: Optional[RunConfig] = None) -> List[DistanceRow]:
        self.steps = []
        rows = riemann_convergence(b, deltas, self._fixed_cutoff(config), self.tolerance)
        self._record("riemann_convergence", f"b={b}", f"{len(rows)} rows")
        return rows

    def scan_squeezing(self, b: float, s_values: List[float], phi: float = 0.0, config: Optional[RunConfig] = None) -> List[DistanceRow]:
        self.steps = []
        rows = squeezing_distance_scan(b, s_values, phi, self._fixed_cutoff(config), tolerance=self.tolerance)
        self._record("squeezing_distance_scan", f"b={b}, phi={phi}", f"{len(rows)} rows")
        return rows

    # ------------------------------------------------------------------
    # Acceptance suite
    # ------------------------------------------------------------------

    def run_acceptance(self, names: Optional[List[str]] = None) -> AcceptanceReport:
        """Run the named acceptance checks (all by default)"""
        self.steps = []
        results = []
        for name in names or ACCEPTANCE_CHECKS:
            if name not in ACCEPTANCE_CHECKS:
                raise ValueError(f"Unknown acceptance check '{name}'")
            check: Callable[[], Tuple[bool, Dict[str, float]]] = getattr(self, f"_check_{name}")
            start = time.perf_counter()
            try:
                passed, detail = check()
                message = ""
            except GmmsError as e:
                passed, detail, message = False, {}, f"{type(e).__name__}: {e}"
            runtime = time.perf_counter() - start
            result = AcceptanceResult(name=name, passed=passed, detail=detail, message=message, runtime_s=runtime)
            if passed:
                logger.info(f"Acceptance {name}: pass ({runtime:.2f}s)")
            else:
                logger.error(f"Acceptance {name}: FAIL {detail} {message}")
            self._record("acceptance", name, "pass" if passed else "fail")
            results.append(result)
        return AcceptanceReport(passed=all(r.passed for r in results), results=results)

    def _check_thermal_tmsv_correspondence(self):
        start = time.perf_counter()
        worst = 0.0
        for zeta in (0.25, 0.5, 1.0, 2.0):
            nbar = math.sinh(zeta) ** 2
            cutoff = FockCutoff(
                max(
                    auto_cutoff(GmmsSpec(kind=GmmsKind.THERMAL, nbar=nbar), self.tolerance).n_max,
                    geometric_cutoff(math.tanh(zeta) ** 2, self.tolerance.tau_trace),
                )
            )
            reduced = partial_trace_B(tmsv(zeta, cutoff, self.tolerance))
            thermal = thermal_state(nbar, cutoff, self.tolerance)
            worst = max(worst, float(np.max(np.abs(reduced.entries - thermal.entries))))
        runtime = time.perf_counter() - start
        return worst <= 1e-12 and runtime < 1.0, {"max_entry_deviation": worst, "runtime_s": runtime}

    def _check_cvmms_unit_trace(self):
        detail = {}
        passed = True
        for x in (0.25, 1.0, 4.0, 25.0):
            b = math.sqrt(x)
            rho = cvmms_state(b, auto_cutoff(GmmsSpec(kind=GmmsKind.CVMMS, b=b), self.tolerance), self.tolerance)
            horizon = int(math.ceil(x + 20.0 * math.sqrt(x) + 60))
            identity = float(np.sum(regularized_lower_gamma_sequence(horizon, x)))
            relative = abs(identity - x) / x
            detail[f"trace_b2_{x:g}"] = rho.trace
            detail[f"gamma_sum_rel_err_b2_{x:g}"] = relative
            passed &= 1.0 - 1e-10 <= rho.trace <= 1.0 + 1e-12 and relative <= 1e-10
        return passed, detail

    def _check_purification_round_trip(self):
        specs = (
            "thermal:nbar=1",
            "cvmms:b=1.5",
            "squeezed:b=1,s=0.2,phi=0",
            "riemann:b=1,delta=0.2",
        )
        worst_entry = 0.0
        worst_entropy = 0.0
        for text in specs:
            rho = build_state(GmmsSpec.parse(text), tolerance=self.tolerance)
            target = FockDensityOperator.from_diagonal(rho.diagonal, rho.cutoff)
            reduced = partial_trace_B(g_purify(target, self.tolerance))
            worst_entry = max(worst_entry, float(np.max(np.abs(reduced.entries - target.entries))))
            worst_entropy = max(worst_entropy, abs(entropy(reduced, self.tolerance) - entropy(target, self.tolerance)))
        passed = worst_entry <= 1e-13 and worst_entropy <= 1e-12
        return passed, {"max_entry_deviation": worst_entry, "max_entropy_deviation": worst_entropy}

    def _check_squeezed_collapse(self):
        worst_distance = 0.0
        worst_change = 0.0
        for b in (0.5, 1.0, 2.0):
            cutoff = auto_cutoff(GmmsSpec(kind=GmmsKind.CVMMS, b=b), self.tolerance)
            rho, diagnostics = quadrature_gmms_with_diagnostics(b, 0.0, 0.0, cutoff, tolerance=self.tolerance)
            worst_distance = max(worst_distance, hs_distance(rho, cvmms_state(b, cutoff, self.tolerance)))
            worst_change = max(worst_change, diagnostics.last_change)
        passed = worst_distance <= 1e-8 and worst_change < 1e-8
        return passed, {"max_hs_distance": worst_distance, "max_doubling_change": worst_change}

    def _check_husimi_profile(self):
        start = time.perf_counter()
        settings = get_settings()
        rho = build_state(GmmsSpec(kind=GmmsKind.CVMMS, b=1.0), tolerance=self.tolerance)
        grid = husimi_grid(rho, settings.husimi_extent, settings.husimi_resolution)
        centre = settings.husimi_resolution // 2
        peak_at_centre = np.unravel_index(int(np.argmax(grid.values)), grid.values.shape) == (centre, centre)
        spread = max(directional_spread(rho, r) for r in (0.5, 1.0, 2.0, 3.0))
        q0 = husimi_point(rho, 0.0)
        q0_error = abs(q0 - (1.0 - math.exp(-1.0)) / math.pi)
        profile = radial_profile(rho, np.linspace(0.0, settings.husimi_extent, 81))
        monotone = bool(np.all(np.diff(profile) <= 1e-14))
        wide = build_state(GmmsSpec(kind=GmmsKind.CVMMS, b=5.0), tolerance=self.tolerance)
        ratio_narrow = q0 / husimi_point(rho, 2.0, strict=False)
        ratio_wide = husimi_point(wide, 0.0) / husimi_point(wide, 2.0, strict=False)
        runtime = time.perf_counter() - start
        passed = (
            peak_at_centre
            and spread < 1e-12
            and q0_error <= 1e-10
            and monotone
            and ratio_wide < ratio_narrow
            and runtime < 10.0
        )
        detail = {
            "directional_spread": spread,
            "q0_error": q0_error,
            "q0_over_q2_b1": ratio_narrow,
            "q0_over_q2_b5": ratio_wide,
            "runtime_s": runtime,
        }
        return passed, detail

    def _check_smoothing_identity(self):
        points = (0.0, 0.5, 1.0 + 0.5j, -0.7 + 1.2j, 2.0j)
        states = {
            "vacuum": thermal_state(0.0, FockCutoff(0), self.tolerance),
            "thermal_1": build_state(GmmsSpec(kind=GmmsKind.THERMAL, nbar=1.0), tolerance=self.tolerance),
            "cvmms_1": build_state(GmmsSpec(kind=GmmsKind.CVMMS, b=1.0), tolerance=self.tolerance),
        }
        detail = {name: max(smoothing_check(rho, beta) for beta in points) for name, rho in states.items()}
        return all(v < 1e-6 for v in detail.values()), detail

    def _check_riemann_convergence(self):
        rows = riemann_convergence(1.0, [0.2, 0.1, 0.05], tolerance=self.tolerance)
        distances = [row.hs_distance for row in rows]
        passed = all(later < earlier for earlier, later in zip(distances, distances[1:]))
        return passed, {f"delta_{row.param:g}": row.hs_distance for row in rows}

    def _check_squeezing_distance(self):
        rows = squeezing_distance_scan(1.0, [0.2, 0.1, 0.05, 0.0], tolerance=self.tolerance)
        distances = [row.hs_distance for row in rows]
        decreasing = all(later < earlier for earlier, later in zip(distances[:3], distances[1:3]))
        passed = decreasing and distances[3] <= 1e-8
        return passed, {f"s_{row.param:g}": row.hs_distance for row in rows}

    def _check_ancilla_freedom(self):
        rng = np.random.default_rng(self.seed)
        cutoff = FockCutoff(8)
        weights = rng.random(cutoff.dim)
        rho = FockDensityOperator.from_diagonal(weights / weights.sum(), cutoff)
        state = g_purify(rho, self.tolerance)
        worst = 0.0
        for _ in range(20):
            rotated = apply_ancilla_unitary(state, random_ancilla_unitary(cutoff, rng))
            reduced = partial_trace_B_general(rotated)
            worst = max(worst, float(np.max(np.abs(reduced.entries - rho.entries))))
        return worst <= 1e-12, {"max_entry_deviation": worst}

    def _check_entropy_ceiling(self):
        specs = (
            "thermal:nbar=2",
            "cvmms:b=2",
            "squeezed:b=1,s=0.2,phi=0",
            "riemann:b=1,delta=0.2",
        )
        excess = -math.inf
        for text in specs:
            rho = build_state(GmmsSpec.parse(text), tolerance=self.tolerance)
            excess = max(excess, entropy(rho, self.tolerance) - entropy_ceiling(rho.cutoff))
        mms = embedded_mms(16, FockCutoff(20))
        mms_error = abs(entropy(mms, self.tolerance) - math.log(16))
        return excess <= 1e-12 and mms_error <= 1e-12, {"max_excess": excess, "mms16_error": mms_error}


def create_runner(tolerance: Optional[ToleranceProfile] = None, tau_trace: Optional[float] = None) -> GmmsRunner:
    """
    Factory function to create a GmmsRunner

    Args:
        tolerance: Explicit tolerance profile (uses config if not provided)
        tau_trace: Per-run override of the truncation budget

    Returns:
        Configured GmmsRunner instance
    """
    tolerance = tolerance or get_settings().tolerance_profile()
    if tau_trace is not None:
        tolerance = tolerance.model_copy(update={"tau_trace": tau_trace})
    return GmmsRunner(tolerance=tolerance)
