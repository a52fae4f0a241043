"""g-purification of Fock-diagonal states and its verification

A diagonal state sum_n p_n |n><n| maps to the Schmidt-form pure state
sum_n sqrt(p_n) |n>_A |n>_B. Every other purification differs from it by a
unitary on the ancilla B alone.
"""
import logging
import math
from dataclasses import dataclass
from typing import Optional, Tuple, Union

import numpy as np
from scipy.linalg import expm

from app.models.errors import DimensionError, DomainError, NumericalIntegrityError, PreconditionError, TruncationError
from app.models.schemas import PurificationReport, ToleranceProfile

from .fock import (
    FockCutoff,
    FockDensityOperator,
    SchmidtPureState,
    TwoModePureState,
    partial_trace_B,
    partial_trace_B_general,
    resolve_tolerance,
    truncate_offdiagonal,
)
from .metrics import entropy
from .states import geometric_cutoff

logger = logging.getLogger(__name__)

UNITARY_TOL = 1e-12

PureState = Union[SchmidtPureState, TwoModePureState]


@dataclass(frozen=True)
class AncillaUnitary:
    """Unitary acting on the ancilla mode B"""
    cutoff: FockCutoff
    entries: np.ndarray

    def __post_init__(self):
        d = self.cutoff.dim
        if self.entries.shape != (d, d):
            raise DimensionError(f"Unitary shape {self.entries.shape} does not match cutoff dimension {d}")
        deviation = np.max(np.abs(self.entries @ self.entries.conj().T - np.eye(d)))
        if deviation > UNITARY_TOL:
            raise PreconditionError(f"Ancilla operator is not unitary (max |UU^dagger - 1| = {deviation:.3e})")

    @classmethod
    def create(cls, matrix: np.ndarray, cutoff: FockCutoff) -> "AncillaUnitary":
        entries = np.array(matrix, dtype=complex, copy=True)
        entries.setflags(write=False)
        return cls(cutoff=cutoff, entries=entries)

    @classmethod
    def identity(cls, cutoff: FockCutoff) -> "AncillaUnitary":
        return cls.create(np.eye(cutoff.dim), cutoff)


def parity_unitary(cutoff: FockCutoff) -> AncillaUnitary:
    """Diagonal (-1)^n phases"""
    return AncillaUnitary.create(np.diag((-1.0) ** np.arange(cutoff.dim)), cutoff)


def random_ancilla_unitary(cutoff: FockCutoff, rng: Optional[np.random.Generator] = None) -> AncillaUnitary:
    """Haar-distributed unitary from the QR decomposition of a complex Ginibre matrix"""
    rng = rng or np.random.default_rng()
    d = cutoff.dim
    z = (rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))) / math.sqrt(2.0)
    q, r = np.linalg.qr(z)
    phases = np.diagonal(r) / np.abs(np.diagonal(r))
    return AncillaUnitary.create(q * phases[None, :], cutoff)


def g_purify(rho: FockDensityOperator, tolerance: Optional[ToleranceProfile] = None) -> SchmidtPureState:
    """Map sum_n p_n |n><n| to sum_n sqrt(p_n) |n>_A |n>_B (non-negative root branch)"""
    if not rho.diagonal_flag:
        raise PreconditionError(
            "g_purify needs a Fock-diagonal state; truncate the off-diagonal part explicitly "
            "(purify_with_truncation) or eigendecompose first"
        )
    tol = resolve_tolerance(tolerance)
    weights = rho.diagonal
    lowest = float(np.min(weights, initial=0.0))
    if lowest < -tol.tau_psd:
        raise NumericalIntegrityError(f"Negative Fock weight {lowest:.3e} below -tau_psd={tol.tau_psd:.1e}")
    return SchmidtPureState.create(np.sqrt(np.clip(weights, 0.0, None)), rho.cutoff)


def purify_with_truncation(
    rho: FockDensityOperator,
    tolerance: Optional[ToleranceProfile] = None,
    renormalize: bool = False,
) -> Tuple[SchmidtPureState, float]:
    """Drop the off-diagonal part (reporting its HS norm), then g-purify"""
    diagonal, removed = truncate_offdiagonal(rho)
    if removed > 0:
        logger.warning(f"Truncated off-diagonal HS mass {removed:.3e} before purification")
    state = g_purify(diagonal, tolerance)
    if renormalize:
        state = state.normalized()
    return state, removed


def tmsv(zeta: float, cutoff: FockCutoff, tolerance: Optional[ToleranceProfile] = None) -> SchmidtPureState:
    """sqrt(1 - lambda^2) sum_n (-lambda)^n |n>_A |n>_B with lambda = tanh(zeta)"""
    if zeta < 0 or not math.isfinite(zeta):
        raise DomainError(f"Two-mode squeezing must be finite and non-negative, got {zeta}")
    tol = resolve_tolerance(tolerance)
    coefficients = np.zeros(cutoff.dim)
    if zeta == 0.0:
        coefficients[0] = 1.0
    else:
        lam = math.tanh(zeta)
        if lam ** (2 * (cutoff.n_max + 1)) >= tol.tau_trace:
            required = geometric_cutoff(lam * lam, tol.tau_trace)
            raise TruncationError(
                f"TMSV zeta={zeta} needs n_max >= {required}, got {cutoff.n_max}",
                required_n_max=required,
            )
        n = np.arange(cutoff.dim)
        coefficients = (-1.0) ** n * np.exp(n * math.log(lam)) / math.cosh(zeta)
    return SchmidtPureState.create(coefficients, cutoff)


def two_mode_squeezer_tmsv(zeta: float, cutoff: FockCutoff) -> TwoModePureState:
    """exp(zeta (ab - a^dagger b^dagger)) |0,0> in the truncated two-mode space"""
    d = cutoff.dim
    a = np.diag(np.sqrt(np.arange(1, d)), k=1)
    eye = np.eye(d)
    a_a, a_b = np.kron(a, eye), np.kron(eye, a)
    generator = zeta * (a_a @ a_b - a_a.T @ a_b.T)
    vacuum = np.zeros(d * d)
    vacuum[0] = 1.0
    psi = expm(generator) @ vacuum
    return TwoModePureState.create(psi.reshape(d, d), cutoff)


def finite_mes(d: int, cutoff: FockCutoff) -> SchmidtPureState:
    """(1/sqrt d) sum_{l<d} |l>_A |l>_B"""
    if not 1 <= d <= cutoff.dim:
        raise DomainError(f"MES dimension {d} must lie in 1..{cutoff.dim}")
    coefficients = np.zeros(cutoff.dim)
    coefficients[:d] = 1.0 / math.sqrt(d)
    return SchmidtPureState.create(coefficients, cutoff)


def apply_ancilla_unitary(state: PureState, u: AncillaUnitary) -> TwoModePureState:
    """(1 (x) U)|psi>: C'[m, k] = sum_n C[m, n] U[k, n]"""
    if state.cutoff.n_max != u.cutoff.n_max:
        raise DimensionError(f"Cutoff mismatch: state n_max {state.cutoff.n_max} vs unitary n_max {u.cutoff.n_max}")
    if isinstance(state, SchmidtPureState):
        state = state.to_two_mode()
    return TwoModePureState.create(state.coefficients @ u.entries.T, state.cutoff)


def entanglement_entropy(state: PureState, tolerance: Optional[ToleranceProfile] = None) -> float:
    """Von Neumann entropy of the reduced state on A, in nats"""
    return entropy(partial_trace_B_general(state), tolerance)


def verify_purification(state: PureState, rho: FockDensityOperator, tol: float) -> PurificationReport:
    """Compare Tr_B |psi><psi| against rho entrywise and in HS norm"""
    if state.cutoff.n_max != rho.cutoff.n_max:
        raise DimensionError(f"Cutoff mismatch: state n_max {state.cutoff.n_max} vs rho n_max {rho.cutoff.n_max}")
    reduced = partial_trace_B(state) if isinstance(state, SchmidtPureState) else partial_trace_B_general(state)
    difference = reduced.entries - rho.entries
    max_dev = float(np.max(np.abs(difference)))
    hs_dev = float(np.linalg.norm(difference))
    passed = max_dev <= tol
    if not passed:
        logger.info(f"Purification check failed: max deviation {max_dev:.3e} > {tol:.1e}")
    return PurificationReport(max_entry_deviation=max_dev, hs_deviation=hs_dev, tol=tol, passed=passed)
