"""Constructors for GMMS candidates and the kets they are built from

Thermal, disk-bounded coherent (CVMMS), disk-bounded squeezed coherent and
Riemann-sum candidates, plus the cutoff policy that keeps truncation losses
below the configured budget.
"""
import logging
import math
from dataclasses import dataclass
from typing import Callable, Optional, Tuple

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.special import gammaln

from app.models.errors import DomainError, NumericalIntegrityError, TruncationError
from app.models.schemas import GmmsKind, GmmsSpec, QuadratureSpec, ToleranceProfile
from app.config.settings import get_settings

from .fock import (
    FockCutoff,
    FockDensityOperator,
    FockPureVector,
    resolve_tolerance,
    spectrum,
)
from .special import hermite_sequence, regularized_lower_gamma, regularized_lower_gamma_sequence

logger = logging.getLogger(__name__)

# Upper bound on automatically chosen cutoffs
MAX_AUTO_N_MAX = 4000


@dataclass(frozen=True)
class QuadratureDiagnostics:
    """How a disk-quadrature operator was obtained"""
    radial_order: int
    angular_order: int
    last_change: float
    trace: float
    offdiag_hs_mass: float


# ---------------------------------------------------------------------------
# Cutoff policy
# ---------------------------------------------------------------------------

def geometric_cutoff(ratio: float, tau: float) -> int:
    """Smallest n_max with ratio^(n_max+1) < tau"""
    if not 0.0 <= ratio < 1.0:
        raise DomainError(f"Geometric ratio must lie in [0, 1), got {ratio}")
    if ratio == 0.0:
        return 0
    n_max = int(math.floor(math.log(tau) / math.log(ratio)))
    while ratio ** (n_max + 1) >= tau:
        n_max += 1
    return max(n_max, 0)


def poisson_cutoff(x: float, tau: float) -> int:
    """Smallest n_max whose Poisson(x) tail mass above n_max is below tau"""
    if x < 0:
        raise DomainError(f"Poisson mean must be non-negative, got {x}")
    if x == 0.0:
        return 0
    horizon = int(math.ceil(x + 20.0 * math.sqrt(x) + 60))
    tails = regularized_lower_gamma_sequence(horizon, x)
    below = np.nonzero(tails < tau)[0]
    if below.size == 0:
        raise TruncationError(f"No cutoff up to {horizon} reaches tail {tau:g} for mean {x}")
    return int(below[0])


def cvmms_tail(b: float, n_max: int) -> float:
    """Trace lost above n_max by the disk-bounded coherent mixture"""
    x = b * b
    horizon = max(n_max, int(math.ceil(x + 20.0 * math.sqrt(x) + 60)))
    weights = regularized_lower_gamma_sequence(horizon, x) / x
    return float(np.sum(weights[n_max + 1:]))


def cvmms_cutoff(b: float, tau: float) -> int:
    """Smallest n_max keeping the CVMMS trace deficit below tau"""
    if b <= 0:
        raise DomainError(f"Boundary radius b must be positive, got {b}")
    x = b * b
    horizon = int(math.ceil(x + 20.0 * math.sqrt(x) + 60))
    weights = regularized_lower_gamma_sequence(horizon, x) / x
    tails = np.concatenate([np.cumsum(weights[::-1])[::-1][1:], [0.0]])
    return int(np.nonzero(tails < tau)[0][0])


def squeezed_cutoff(b: float, s: float, phi: float, tau: float) -> int:
    """Smallest tested n_max whose squeezed coherent kets on the disk boundary lose less than tau"""
    if s == 0.0:
        return cvmms_cutoff(b, tau)
    x = (b * math.exp(s)) ** 2 + math.sinh(s) ** 2
    n_max = poisson_cutoff(x, tau)
    angles = np.linspace(0.0, 2.0 * math.pi, 64, endpoint=False)
    boundary = b * np.exp(1j * angles)
    while n_max <= MAX_AUTO_N_MAX:
        try:
            amps = sc_amplitudes(boundary, s, phi, n_max)
        except NumericalIntegrityError:
            break
        deficit = float(np.max(1.0 - np.sum(np.abs(amps) ** 2, axis=1)))
        if deficit < tau:
            return n_max
        n_max = int(math.ceil(1.25 * n_max)) + 2
    raise TruncationError(f"No cutoff up to {MAX_AUTO_N_MAX} contains squeezed GMMS b={b}, s={s}")


def auto_cutoff(spec: GmmsSpec, tolerance: Optional[ToleranceProfile] = None) -> FockCutoff:
    """Cutoff policy for a candidate description"""
    tau = resolve_tolerance(tolerance).tau_trace
    if spec.kind == GmmsKind.THERMAL:
        n_max = geometric_cutoff(spec.nbar / (spec.nbar + 1.0), tau)
    elif spec.kind == GmmsKind.CVMMS:
        n_max = cvmms_cutoff(spec.b, tau)
    elif spec.kind == GmmsKind.SQUEEZED:
        n_max = squeezed_cutoff(spec.b, spec.s, spec.phi, tau)
    else:
        n_max = poisson_cutoff(spec.b * spec.b, tau)
    if n_max > MAX_AUTO_N_MAX:
        raise TruncationError(
            f"Auto cutoff for {spec} needs n_max={n_max}, above the limit {MAX_AUTO_N_MAX}",
            required_n_max=n_max,
        )
    logger.info(f"Auto cutoff for {spec}: n_max={n_max}")
    return FockCutoff(n_max)


# ---------------------------------------------------------------------------
# Kets
# ---------------------------------------------------------------------------

def coherent_amplitudes(alphas: np.ndarray, n_max: int) -> np.ndarray:
    """Rows e^{-|a|^2/2} a^n / sqrt(n!) for every a in `alphas`, log-domain magnitudes"""
    alphas = np.atleast_1d(np.asarray(alphas, dtype=complex))
    n = np.arange(n_max + 1, dtype=float)
    mod = np.abs(alphas)[:, None]
    with np.errstate(divide="ignore", invalid="ignore"):
        log_mod = np.where(mod > 0, np.log(mod), -np.inf)
        log_mag = -0.5 * mod ** 2 + n * log_mod - 0.5 * gammaln(n + 1.0)
    log_mag[:, 0] = -0.5 * mod[:, 0] ** 2
    phase = np.exp(1j * n * np.angle(alphas)[:, None])
    return np.exp(log_mag) * phase


def sc_amplitudes(alphas: np.ndarray, s: float, phi: float, n_max: int) -> np.ndarray:
    """Number-basis amplitudes of S(zeta) D(alpha)|0>, zeta = s e^{i phi}

    Uses the Hermite expansion with argument alpha / sqrt(2 nu cosh s),
    nu = e^{i phi} sinh s; the square roots share the branch e^{i phi / 2}.
    s = 0 is the removable singularity and returns coherent amplitudes.
    """
    if s < 0:
        raise DomainError(f"Squeezing magnitude must be non-negative, got {s}")
    if s == 0.0:
        return coherent_amplitudes(alphas, n_max)
    alphas = np.atleast_1d(np.asarray(alphas, dtype=complex))
    c, t = math.cosh(s), math.tanh(s)
    half_phase = np.exp(0.5j * phi)
    z = alphas / (half_phase * math.sqrt(math.sinh(2.0 * s)))
    hermite = hermite_sequence(n_max, z).T
    n = np.arange(n_max + 1, dtype=float)
    scale = np.exp(n * 0.5 * math.log(0.5 * t) - 0.5 * gammaln(n + 1.0)) * half_phase ** n
    envelope = np.exp(-0.5 * (np.abs(alphas) ** 2 - np.exp(-1j * phi) * t * alphas ** 2)) / math.sqrt(c)
    return envelope[:, None] * scale[None, :] * hermite


def _check_coherent_tail(x: float, cutoff: FockCutoff, tau: float, what: str) -> None:
    tail = regularized_lower_gamma(cutoff.n_max + 1, x) if cutoff.n_max >= 0 else 1.0
    if tail >= tau:
        required = poisson_cutoff(x, tau)
        raise TruncationError(
            f"{what}: tail mass {tail:.3e} above n_max={cutoff.n_max} exceeds {tau:.1e}; need n_max >= {required}",
            required_n_max=required,
        )


def coherent_ket(
    alpha: complex,
    cutoff: FockCutoff,
    tolerance: Optional[ToleranceProfile] = None,
    strict: bool = True,
) -> FockPureVector:
    """|alpha> = e^{-|alpha|^2/2} sum_n alpha^n / sqrt(n!) |n>"""
    if strict:
        _check_coherent_tail(abs(alpha) ** 2, cutoff, resolve_tolerance(tolerance).tau_trace, f"coherent |{alpha}>")
    return FockPureVector.create(coherent_amplitudes(np.array([alpha]), cutoff.n_max)[0], cutoff)


def sc_ket(
    alpha: complex,
    s: float,
    phi: float,
    cutoff: FockCutoff,
    tolerance: Optional[ToleranceProfile] = None,
) -> FockPureVector:
    """Squeezed coherent ket S(zeta) D(alpha)|0>, checked post hoc by its norm"""
    if s == 0.0:
        return coherent_ket(alpha, cutoff, tolerance)
    tau = resolve_tolerance(tolerance).tau_trace
    amps = sc_amplitudes(np.array([alpha]), s, phi, cutoff.n_max)[0]
    ket = FockPureVector.create(amps, cutoff)
    deficit = 1.0 - ket.norm_squared
    if deficit > tau:
        raise TruncationError(
            f"Squeezed coherent ket alpha={alpha}, s={s}: norm deficit {deficit:.3e} exceeds {tau:.1e} at n_max={cutoff.n_max}"
        )
    return ket


# ---------------------------------------------------------------------------
# Diagonal closed forms
# ---------------------------------------------------------------------------

def thermal_state(
    nbar: float,
    cutoff: FockCutoff,
    tolerance: Optional[ToleranceProfile] = None,
) -> FockDensityOperator:
    """rho_th = sum_n nbar^n / (nbar+1)^(n+1) |n><n|"""
    if nbar < 0 or not math.isfinite(nbar):
        raise DomainError(f"Mean photon number must be finite and non-negative, got {nbar}")
    tol = resolve_tolerance(tolerance)
    weights = np.zeros(cutoff.dim)
    if nbar == 0.0:
        weights[0] = 1.0
    else:
        ratio = nbar / (nbar + 1.0)
        if ratio ** (cutoff.n_max + 1) >= tol.tau_trace:
            required = geometric_cutoff(ratio, tol.tau_trace)
            raise TruncationError(
                f"Thermal nbar={nbar} needs n_max >= {required}, got {cutoff.n_max}",
                required_n_max=required,
            )
        n = np.arange(cutoff.dim, dtype=float)
        weights = np.exp(n * math.log(ratio) - math.log1p(nbar))
    return FockDensityOperator.from_diagonal(weights, cutoff).validated(tol)


def cvmms_weights(b: float, n_max: int) -> np.ndarray:
    """w_n = P(n+1, b^2) / b^2"""
    x = b * b
    return regularized_lower_gamma_sequence(n_max, x) / x


def cvmms_state(
    b: float,
    cutoff: FockCutoff,
    tolerance: Optional[ToleranceProfile] = None,
) -> FockDensityOperator:
    """(1/pi b^2) int_{|alpha|<=b} |alpha><alpha| d^2 alpha in closed form"""
    if not (b > 0 and math.isfinite(b)):
        raise DomainError(f"Boundary radius b must be positive, got {b}")
    tol = resolve_tolerance(tolerance)
    weights = cvmms_weights(b, cutoff.n_max)
    deficit = 1.0 - float(np.sum(weights))
    if deficit >= tol.tau_trace:
        required = cvmms_cutoff(b, tol.tau_trace)
        raise TruncationError(
            f"CVMMS b={b}: trace deficit {deficit:.3e} at n_max={cutoff.n_max}; need n_max >= {required}",
            required_n_max=required,
        )
    return FockDensityOperator.from_diagonal(weights, cutoff).validated(tol)


# ---------------------------------------------------------------------------
# Quadrature-built candidates
# ---------------------------------------------------------------------------

def _polar_nodes(radius: float, quad: QuadratureSpec) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Gauss-Legendre radii on [0, radius] with area weight r, uniform angles"""
    x, w = leggauss(quad.radial_order)
    r = 0.5 * radius * (x + 1.0)
    wr = 0.5 * radius * w * r
    theta = 2.0 * math.pi * np.arange(quad.angular_order) / quad.angular_order
    return r, wr, theta


def _disk_operator(
    radius: float,
    radial_weight: Callable[[np.ndarray], np.ndarray],
    amplitudes: Callable[[np.ndarray], np.ndarray],
    quad: QuadratureSpec,
) -> np.ndarray:
    """sum over polar nodes of weight * |psi(alpha)><psi(alpha)|"""
    r, wr, theta = _polar_nodes(radius, quad)
    wt = 2.0 * math.pi / quad.angular_order
    alphas = (r[:, None] * np.exp(1j * theta)[None, :]).ravel()
    weights = ((wr * radial_weight(r))[:, None] * np.full(theta.shape, wt)[None, :]).ravel()
    amps = amplitudes(alphas)
    rho = amps.T @ (weights[:, None] * amps.conj())
    return 0.5 * (rho + rho.conj().T)


def _converged_disk_operator(
    radius: float,
    radial_weight: Callable[[np.ndarray], np.ndarray],
    amplitudes: Callable[[np.ndarray], np.ndarray],
    cutoff: FockCutoff,
    quad: QuadratureSpec,
    tol: ToleranceProfile,
) -> Tuple[FockDensityOperator, QuadratureDiagnostics]:
    """Double the quadrature orders until the HS change drops below quadrature_tol"""
    previous = _disk_operator(radius, radial_weight, amplitudes, quad)
    change = math.inf
    for _ in range(tol.max_doublings):
        quad = quad.doubled()
        current = _disk_operator(radius, radial_weight, amplitudes, quad)
        change = float(np.linalg.norm(current - previous))
        logger.debug(f"Quadrature ({quad.radial_order}, {quad.angular_order}): HS change {change:.3e}")
        previous = current
        if change < tol.quadrature_tol:
            break
    else:
        if tol.max_doublings > 0:
            raise NumericalIntegrityError(
                f"Disk quadrature did not converge after {tol.max_doublings} doublings (last change {change:.3e})"
            )
    rho = FockDensityOperator.from_matrix(previous, cutoff, tol.diagonal_tol)
    off = previous - np.diag(previous.diagonal())
    diagnostics = QuadratureDiagnostics(
        radial_order=quad.radial_order,
        angular_order=quad.angular_order,
        last_change=change,
        trace=rho.trace,
        offdiag_hs_mass=float(np.linalg.norm(off)),
    )
    return rho, diagnostics


def quadrature_gmms_with_diagnostics(
    b: float,
    s: float,
    phi: float,
    cutoff: FockCutoff,
    quad: Optional[QuadratureSpec] = None,
    tolerance: Optional[ToleranceProfile] = None,
    renormalize: bool = False,
) -> Tuple[FockDensityOperator, QuadratureDiagnostics]:
    """(1/pi b^2) int_{|alpha|<=b} |alpha,zeta><alpha,zeta| d^2 alpha by polar quadrature

    The full angle is integrated; off-diagonal structure is measured and
    reported, never assumed away.
    """
    if not (b > 0 and math.isfinite(b)):
        raise DomainError(f"Boundary radius b must be positive, got {b}")
    if s < 0:
        raise DomainError(f"Squeezing magnitude must be non-negative, got {s}")
    tol = resolve_tolerance(tolerance)
    quad = quad or get_settings().quadrature()
    norm = 1.0 / (math.pi * b * b)
    rho, diagnostics = _converged_disk_operator(
        b,
        lambda r: np.full(r.shape, norm),
        lambda alphas: sc_amplitudes(alphas, s, phi, cutoff.n_max),
        cutoff,
        quad,
        tol,
    )
    deficit = 1.0 - diagnostics.trace
    if deficit > tol.tau_trace:
        logger.warning(f"Squeezed GMMS b={b}, s={s}: trace deficit {deficit:.3e} at n_max={cutoff.n_max}")
    spectrum(rho, tol)
    if renormalize:
        rho = rho.normalized()
    return rho, diagnostics


def quadrature_gmms(
    b: float,
    s: float,
    phi: float,
    cutoff: FockCutoff,
    quad: Optional[QuadratureSpec] = None,
    tolerance: Optional[ToleranceProfile] = None,
    renormalize: bool = False,
) -> FockDensityOperator:
    rho, diagnostics = quadrature_gmms_with_diagnostics(b, s, phi, cutoff, quad, tolerance, renormalize)
    logger.info(
        f"Squeezed GMMS b={b}, s={s}, phi={phi}: trace {diagnostics.trace:.12f}, "
        f"off-diagonal HS mass {diagnostics.offdiag_hs_mass:.3e}, "
        f"orders ({diagnostics.radial_order}, {diagnostics.angular_order})"
    )
    return rho


def thermal_coherent_mixture(
    nbar: float,
    cutoff: FockCutoff,
    quad: Optional[QuadratureSpec] = None,
    tolerance: Optional[ToleranceProfile] = None,
) -> FockDensityOperator:
    """(1/pi nbar) int e^{-|alpha|^2/nbar} |alpha><alpha| d^2 alpha by polar quadrature

    The radial domain stops where the Gaussian weight falls below tau_trace.
    """
    if not (nbar > 0 and math.isfinite(nbar)):
        raise DomainError(f"Coherent-mixture form needs nbar > 0, got {nbar}")
    tol = resolve_tolerance(tolerance)
    quad = quad or get_settings().quadrature()
    radius = math.sqrt(nbar * (math.log(1.0 / tol.tau_trace) + 10.0))
    rho, _ = _converged_disk_operator(
        radius,
        lambda r: np.exp(-r ** 2 / nbar) / (math.pi * nbar),
        lambda alphas: coherent_amplitudes(alphas, cutoff.n_max),
        cutoff,
        quad,
        tol,
    )
    return rho


def riemann_gmms(
    b: float,
    delta: float,
    cutoff: FockCutoff,
    tolerance: Optional[ToleranceProfile] = None,
) -> FockDensityOperator:
    """(1/k) sum_i delta^2 |alpha_i><alpha_i| over lattice cells centred inside the disk

    Square lattice of spacing delta with a cell centred at the origin; k is
    the trace-normalizing constant.
    """
    if not (b > 0 and math.isfinite(b)):
        raise DomainError(f"Boundary radius b must be positive, got {b}")
    if not (delta > 0 and math.isfinite(delta)):
        raise DomainError(f"Grid spacing delta must be positive, got {delta}")
    if delta >= 2.0 * b:
        raise DomainError(f"Grid spacing delta={delta} >= 2b={2.0 * b} leaves no cells in the disk")
    tol = resolve_tolerance(tolerance)
    _check_coherent_tail(b * b, cutoff, tol.tau_trace, f"Riemann GMMS b={b}")
    reach = b / delta
    m = int(math.floor(reach * (1.0 + 1e-12)))
    i, j = np.meshgrid(np.arange(-m, m + 1), np.arange(-m, m + 1), indexing="ij")
    inside = (i ** 2 + j ** 2) <= reach ** 2 * (1.0 + 1e-12)
    alphas = delta * (i[inside] + 1j * j[inside]).astype(complex)
    if alphas.size == 0:
        raise DomainError(f"Riemann grid for b={b}, delta={delta} is empty")
    if delta >= b:
        logger.warning(f"Riemann grid b={b}, delta={delta} holds only the origin cell")
    amps = coherent_amplitudes(alphas, cutoff.n_max)
    rho = amps.T @ amps.conj()
    k = float(np.sum(rho.diagonal().real))
    logger.debug(f"Riemann GMMS b={b}, delta={delta}: {alphas.size} cells, k={k * delta ** 2:.6g}")
    return FockDensityOperator.from_matrix(rho / k, cutoff, tol.diagonal_tol).validated(tol)


def kappa_report(rho: FockDensityOperator, b: float, s: float, phi: float) -> np.ndarray:
    """kappa_n = <n|rho|n> * b^2 * e^{K b^2}, K = 1 - tanh(s) cos(phi)"""
    k = 1.0 - math.tanh(s) * math.cos(phi)
    return rho.diagonal * b * b * math.exp(k * b * b)


def build_state(
    spec: GmmsSpec,
    cutoff: Optional[FockCutoff] = None,
    quad: Optional[QuadratureSpec] = None,
    tolerance: Optional[ToleranceProfile] = None,
) -> FockDensityOperator:
    """Construct the candidate described by `spec`"""
    cutoff = cutoff or auto_cutoff(spec, tolerance)
    if spec.kind == GmmsKind.THERMAL:
        return thermal_state(spec.nbar, cutoff, tolerance)
    if spec.kind == GmmsKind.CVMMS:
        return cvmms_state(spec.b, cutoff, tolerance)
    if spec.kind == GmmsKind.SQUEEZED:
        return quadrature_gmms(spec.b, spec.s, spec.phi, cutoff, quad, tolerance)
    return riemann_gmms(spec.b, spec.delta, cutoff, tolerance)
