"""Truncated Fock-space containers and linear algebra

Every value here is immutable: arrays are copied on construction and marked
read-only, and every operation returns a new value.
"""
import logging
from dataclasses import dataclass
from typing import Optional, Tuple, Union

import numpy as np
from scipy.linalg import eigvalsh

from app.config.settings import get_settings
from app.models.errors import DimensionError, DomainError, NumericalIntegrityError, TruncationError
from app.models.schemas import ToleranceProfile

logger = logging.getLogger(__name__)

# Rounding slack allowed above unit trace / unit norm
OVER_UNIT_SLACK = 1e-12


def resolve_tolerance(tolerance: Optional[ToleranceProfile] = None) -> ToleranceProfile:
    """Explicit tolerance, or the configured default profile"""
    return tolerance if tolerance is not None else get_settings().tolerance_profile()


def _frozen(array: np.ndarray, dtype=complex) -> np.ndarray:
    out = np.array(array, dtype=dtype, copy=True)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class FockCutoff:
    """Highest retained photon number; dimension is n_max + 1"""
    n_max: int

    def __post_init__(self):
        if isinstance(self.n_max, bool) or int(self.n_max) != self.n_max or self.n_max < 0:
            raise DomainError(f"n_max must be a non-negative integer, got {self.n_max}")
        object.__setattr__(self, "n_max", int(self.n_max))

    @property
    def dim(self) -> int:
        return self.n_max + 1


def _check_same_cutoff(a: FockCutoff, b: FockCutoff) -> None:
    if a.n_max != b.n_max:
        raise DimensionError(f"Cutoff mismatch: n_max {a.n_max} vs {b.n_max}")


@dataclass(frozen=True)
class FockDensityOperator:
    """Hermitian operator on a cutoff-N Fock space

    Also used unnormalized as a quadrature accumulator; `validated` enforces
    the density-operator invariants.
    """
    cutoff: FockCutoff
    entries: np.ndarray
    diagonal_flag: bool

    def __post_init__(self):
        d = self.cutoff.dim
        if self.entries.shape != (d, d):
            raise DimensionError(f"Operator shape {self.entries.shape} does not match cutoff dimension {d}")

    @classmethod
    def from_matrix(
        cls,
        matrix: np.ndarray,
        cutoff: FockCutoff,
        diagonal_tol: Optional[float] = None,
    ) -> "FockDensityOperator":
        """Hermitise a dense matrix and detect whether it is diagonal"""
        matrix = np.asarray(matrix, dtype=complex)
        if matrix.shape != (cutoff.dim, cutoff.dim):
            raise DimensionError(f"Operator shape {matrix.shape} does not match cutoff dimension {cutoff.dim}")
        if diagonal_tol is None:
            diagonal_tol = resolve_tolerance().diagonal_tol
        hermitian = 0.5 * (matrix + matrix.conj().T)
        np.fill_diagonal(hermitian, hermitian.diagonal().real)
        off = hermitian - np.diag(hermitian.diagonal())
        flag = bool(np.max(np.abs(off), initial=0.0) <= diagonal_tol)
        return cls(cutoff=cutoff, entries=_frozen(hermitian), diagonal_flag=flag)

    @classmethod
    def from_diagonal(cls, weights: np.ndarray, cutoff: FockCutoff) -> "FockDensityOperator":
        weights = np.asarray(weights, dtype=float)
        if weights.shape != (cutoff.dim,):
            raise DimensionError(f"{weights.shape[0]} weights given for cutoff dimension {cutoff.dim}")
        return cls(cutoff=cutoff, entries=_frozen(np.diag(weights)), diagonal_flag=True)

    @classmethod
    def zero(cls, cutoff: FockCutoff) -> "FockDensityOperator":
        return cls.from_diagonal(np.zeros(cutoff.dim), cutoff)

    @property
    def diagonal(self) -> np.ndarray:
        return self.entries.diagonal().real.copy()

    @property
    def trace(self) -> float:
        return float(np.sum(self.entries.diagonal().real))

    def normalized(self) -> "FockDensityOperator":
        """Explicit renormalization to unit trace"""
        tr = self.trace
        if tr <= 0:
            raise NumericalIntegrityError(f"Cannot normalize operator with trace {tr}")
        return FockDensityOperator(self.cutoff, _frozen(self.entries / tr), self.diagonal_flag)

    def eigenvalues(self) -> np.ndarray:
        if self.diagonal_flag:
            return np.sort(self.diagonal)
        return eigvalsh(self.entries)

    def validated(self, tolerance: Optional[ToleranceProfile] = None) -> "FockDensityOperator":
        """Check trace budget and numerical positive semidefiniteness"""
        tol = resolve_tolerance(tolerance)
        tr = self.trace
        if tr > 1.0 + OVER_UNIT_SLACK:
            raise NumericalIntegrityError(f"Trace {tr!r} exceeds 1 beyond rounding")
        if tr < 1.0 - tol.tau_trace:
            raise TruncationError(
                f"Trace deficit {1.0 - tr:.3e} exceeds truncation budget {tol.tau_trace:.1e} at n_max={self.cutoff.n_max}"
            )
        spectrum(self, tol)
        return self


def spectrum(rho: FockDensityOperator, tolerance: Optional[ToleranceProfile] = None) -> np.ndarray:
    """Eigenvalues with tiny negatives clamped to zero

    Eigenvalues below -tau_psd are a hard error; those in (-tau_psd, 0) are
    clamped and reported.
    """
    tol = resolve_tolerance(tolerance)
    values = rho.eigenvalues()
    lowest = float(np.min(values, initial=0.0))
    if lowest < -tol.tau_psd:
        raise NumericalIntegrityError(f"Eigenvalue {lowest:.3e} below -tau_psd={tol.tau_psd:.1e}")
    negative = values < 0
    if np.any(negative):
        logger.warning(f"Clamped {int(np.sum(negative))} negative eigenvalue(s), smallest {lowest:.3e}")
        values = np.where(negative, 0.0, values)
    return values


@dataclass(frozen=True)
class FockPureVector:
    """Single-mode ket in the number basis"""
    cutoff: FockCutoff
    amplitudes: np.ndarray

    def __post_init__(self):
        if self.amplitudes.shape != (self.cutoff.dim,):
            raise DimensionError(f"Ket length {self.amplitudes.shape} does not match cutoff dimension {self.cutoff.dim}")

    @classmethod
    def create(cls, amplitudes: np.ndarray, cutoff: FockCutoff) -> "FockPureVector":
        return cls(cutoff=cutoff, amplitudes=_frozen(amplitudes))

    @property
    def norm_squared(self) -> float:
        return float(np.sum(np.abs(self.amplitudes) ** 2))


@dataclass(frozen=True)
class SchmidtPureState:
    """Two-mode pure state sum_n c_n |n>_A |n>_B"""
    cutoff: FockCutoff
    coefficients: np.ndarray

    def __post_init__(self):
        if self.coefficients.shape != (self.cutoff.dim,):
            raise DimensionError(
                f"{self.coefficients.shape[0]} Schmidt coefficients for cutoff dimension {self.cutoff.dim}"
            )

    @classmethod
    def create(cls, coefficients: np.ndarray, cutoff: FockCutoff) -> "SchmidtPureState":
        return cls(cutoff=cutoff, coefficients=_frozen(coefficients))

    @property
    def norm_squared(self) -> float:
        return float(np.sum(np.abs(self.coefficients) ** 2))

    @property
    def weights(self) -> np.ndarray:
        return np.abs(self.coefficients) ** 2

    def normalized(self) -> "SchmidtPureState":
        """Explicit renormalization; never applied silently"""
        norm = np.sqrt(self.norm_squared)
        if norm == 0:
            raise NumericalIntegrityError("Cannot normalize a zero state")
        return SchmidtPureState.create(self.coefficients / norm, self.cutoff)

    def to_two_mode(self) -> "TwoModePureState":
        return TwoModePureState.create(np.diag(self.coefficients), self.cutoff)


@dataclass(frozen=True)
class TwoModePureState:
    """General two-mode pure state sum_{m,n} C[m, n] |m>_A |n>_B"""
    cutoff: FockCutoff
    coefficients: np.ndarray

    def __post_init__(self):
        d = self.cutoff.dim
        if self.coefficients.shape != (d, d):
            raise DimensionError(f"Coefficient matrix {self.coefficients.shape} does not match cutoff dimension {d}")

    @classmethod
    def create(cls, coefficients: np.ndarray, cutoff: FockCutoff) -> "TwoModePureState":
        return cls(cutoff=cutoff, coefficients=_frozen(coefficients))

    @property
    def norm_squared(self) -> float:
        return float(np.sum(np.abs(self.coefficients) ** 2))


def partial_trace_B(state: SchmidtPureState) -> FockDensityOperator:
    """Tr_B |Gamma><Gamma| = sum_n |c_n|^2 |n><n|"""
    return FockDensityOperator.from_diagonal(state.weights, state.cutoff)


def partial_trace_B_general(state: Union[TwoModePureState, SchmidtPureState]) -> FockDensityOperator:
    """Reduced state on A of an arbitrary two-mode pure state, rho_A = C C^dagger"""
    if isinstance(state, SchmidtPureState):
        return partial_trace_B(state)
    c = state.coefficients
    return FockDensityOperator.from_matrix(c @ c.conj().T, state.cutoff)


def bipartite_projector(state: Union[TwoModePureState, SchmidtPureState]) -> np.ndarray:
    """Dense |psi><psi| on the (n_max+1)^2 dimensional space, A index major"""
    if isinstance(state, SchmidtPureState):
        state = state.to_two_mode()
    psi = state.coefficients.reshape(-1)
    return np.outer(psi, psi.conj())


def trace_out_b(projector: np.ndarray, cutoff: FockCutoff) -> FockDensityOperator:
    """Brute-force partial trace of a dense bipartite operator: sum_k <k|_B . |k>_B"""
    d = cutoff.dim
    if projector.shape != (d * d, d * d):
        raise DimensionError(f"Bipartite operator shape {projector.shape} does not match cutoff dimension {d}")
    reduced = np.einsum("ikjk->ij", projector.reshape(d, d, d, d))
    return FockDensityOperator.from_matrix(reduced, cutoff)


def outer_product(ket: FockPureVector) -> FockDensityOperator:
    """Rank-1 operator |ket><ket| with trace ||ket||^2"""
    a = ket.amplitudes
    return FockDensityOperator.from_matrix(np.outer(a, a.conj()), ket.cutoff)


def add_scaled(acc: FockDensityOperator, op: FockDensityOperator, w: float) -> FockDensityOperator:
    """acc + w * op for a non-negative real weight"""
    _check_same_cutoff(acc.cutoff, op.cutoff)
    if w < 0 or not np.isfinite(w):
        raise DomainError(f"Accumulation weight must be finite and non-negative, got {w}")
    if acc.diagonal_flag and op.diagonal_flag:
        return FockDensityOperator.from_diagonal(acc.diagonal + w * op.diagonal, acc.cutoff)
    return FockDensityOperator.from_matrix(acc.entries + w * op.entries, acc.cutoff)


def truncate_offdiagonal(rho: FockDensityOperator) -> Tuple[FockDensityOperator, float]:
    """Drop off-diagonal entries, returning the diagonal part and the HS norm removed"""
    off = rho.entries - np.diag(rho.entries.diagonal())
    removed = float(np.linalg.norm(off))
    return FockDensityOperator.from_diagonal(rho.diagonal, rho.cutoff), removed


def fock_projector(n: int, cutoff: FockCutoff) -> FockDensityOperator:
    """|n><n|"""
    if not 0 <= n <= cutoff.n_max:
        raise DomainError(f"Fock level {n} outside 0..{cutoff.n_max}")
    weights = np.zeros(cutoff.dim)
    weights[n] = 1.0
    return FockDensityOperator.from_diagonal(weights, cutoff)


def embedded_mms(d: int, cutoff: FockCutoff) -> FockDensityOperator:
    """Finite maximally mixed state 1/d on levels 0..d-1"""
    if not 1 <= d <= cutoff.dim:
        raise DomainError(f"MMS dimension {d} must lie in 1..{cutoff.dim}")
    weights = np.zeros(cutoff.dim)
    weights[:d] = 1.0 / d
    return FockDensityOperator.from_diagonal(weights, cutoff)
