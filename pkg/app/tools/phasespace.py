"""Husimi Q and Wigner functions on the phase plane

Q(beta) = (1/pi) <beta|rho|beta> for any operator; the Wigner function is
evaluated for Fock-diagonal states only, where it is a Laguerre sum. The
smoothing check ties the two together through
Q(beta) = (2/pi) int W(alpha) exp(-2|alpha - beta|^2) d^2 alpha.
"""
import logging
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.integrate import trapezoid

from app.config.settings import get_settings
from app.models.errors import DomainError, PreconditionError
from app.models.schemas import QuadratureSpec, ToleranceProfile

from .fock import FockDensityOperator, resolve_tolerance
from .special import laguerre_sequence
from .states import _check_coherent_tail, coherent_amplitudes
from .tables import read_table, write_table

logger = logging.getLogger(__name__)

GRID_HEADER = ("re", "im", "value")


@dataclass(frozen=True)
class PhaseSpaceGrid:
    """Real-valued function sampled on a square lattice

    values[i, j] is taken at re_axis[i] + 1j * im_axis[j]; CSV rows run over
    i first, then j.
    """
    re_min: float
    re_max: float
    im_min: float
    im_max: float
    resolution: int
    values: np.ndarray

    def __post_init__(self):
        if self.resolution < 1:
            raise DomainError(f"Grid resolution must be positive, got {self.resolution}")
        if self.values.shape != (self.resolution, self.resolution):
            raise DomainError(f"Grid values shape {self.values.shape} does not match resolution {self.resolution}")

    @staticmethod
    def _axis(low: float, high: float, resolution: int) -> np.ndarray:
        if resolution == 1:
            return np.array([0.5 * (low + high)])
        return np.linspace(low, high, resolution)

    @property
    def re_axis(self) -> np.ndarray:
        return self._axis(self.re_min, self.re_max, self.resolution)

    @property
    def im_axis(self) -> np.ndarray:
        return self._axis(self.im_min, self.im_max, self.resolution)

    def points(self) -> np.ndarray:
        """Complex sample points, same layout as `values`"""
        return self.re_axis[:, None] + 1j * self.im_axis[None, :]

    def at(self, beta: complex) -> float:
        """Value at the lattice point nearest to beta"""
        i = int(np.argmin(np.abs(self.re_axis - beta.real)))
        j = int(np.argmin(np.abs(self.im_axis - beta.imag)))
        return float(self.values[i, j])

    @property
    def argmax(self) -> complex:
        i, j = np.unravel_index(int(np.argmax(self.values)), self.values.shape)
        return complex(self.re_axis[i], self.im_axis[j])

    def to_csv(self) -> str:
        pts = self.points().ravel()
        return write_table(GRID_HEADER, [pts.real, pts.imag, self.values.ravel()])

    @classmethod
    def from_csv(cls, text: str) -> "PhaseSpaceGrid":
        header, data = read_table(text)
        if tuple(header) != GRID_HEADER:
            raise DomainError(f"Expected header {','.join(GRID_HEADER)}, got {','.join(header)}")
        resolution = int(round(math.sqrt(data.shape[0])))
        if resolution * resolution != data.shape[0] or resolution == 0:
            raise DomainError(f"{data.shape[0]} rows do not form a square grid")
        re, im = data[:, 0], data[:, 1]
        if resolution == 1:
            return cls(re[0], re[0], im[0], im[0], 1, data[:, 2].reshape(1, 1))
        return cls(
            re_min=float(re.min()),
            re_max=float(re.max()),
            im_min=float(im.min()),
            im_max=float(im.max()),
            resolution=resolution,
            values=data[:, 2].reshape(resolution, resolution),
        )


def _husimi_values(rho: FockDensityOperator, betas: np.ndarray) -> np.ndarray:
    amps = coherent_amplitudes(betas.ravel(), rho.cutoff.n_max)
    if rho.diagonal_flag:
        values = np.abs(amps) ** 2 @ rho.diagonal
    else:
        values = np.einsum("pi,ij,pj->p", amps.conj(), rho.entries, amps).real
    return (values / math.pi).reshape(betas.shape)


def husimi_point(
    rho: FockDensityOperator,
    beta: complex,
    tolerance: Optional[ToleranceProfile] = None,
    strict: bool = True,
) -> float:
    """(1/pi) <beta|rho|beta>

    A coherent ket whose truncation tail exceeds tau_trace raises
    TruncationError. With `strict=False` the ket is projected onto the
    retained levels instead, which leaves the overlap with rho unchanged.
    """
    if strict:
        tau = resolve_tolerance(tolerance).tau_trace
        _check_coherent_tail(abs(beta) ** 2, rho.cutoff, tau, f"Husimi point beta={beta}")
    return float(_husimi_values(rho, np.array([complex(beta)]))[0])


def _require_diagonal(rho: FockDensityOperator, what: str) -> None:
    if not rho.diagonal_flag:
        raise PreconditionError(f"{what} is only available for Fock-diagonal states")


def _wigner_values(rho: FockDensityOperator, alphas: np.ndarray) -> np.ndarray:
    x = 4.0 * np.abs(alphas.ravel()) ** 2
    signs = (-1.0) ** np.arange(rho.cutoff.dim)
    # e^{-x/2} L_n(x) stays within [-1, 1]
    damped = laguerre_sequence(rho.cutoff.n_max, x) * np.exp(-0.5 * x)[None, :]
    values = (2.0 / math.pi) * ((signs * rho.diagonal) @ damped)
    return values.reshape(alphas.shape)


def wigner_point(rho: FockDensityOperator, alpha: complex) -> float:
    """(2/pi) sum_n p_n (-1)^n e^{-2|alpha|^2} L_n(4|alpha|^2)"""
    _require_diagonal(rho, "Wigner function")
    return float(_wigner_values(rho, np.array([complex(alpha)]))[0])


def _square_grid(extent: float, resolution: int) -> PhaseSpaceGrid:
    if not (extent > 0 and math.isfinite(extent)):
        raise DomainError(f"Grid extent must be positive, got {extent}")
    if resolution < 1:
        raise DomainError(f"Grid resolution must be positive, got {resolution}")
    return PhaseSpaceGrid(-extent, extent, -extent, extent, resolution, np.zeros((resolution, resolution)))


def husimi_grid(rho: FockDensityOperator, extent: float, resolution: int) -> PhaseSpaceGrid:
    """Q on [-extent, extent]^2 with `resolution` points per axis"""
    grid = _square_grid(extent, resolution)
    values = _husimi_values(rho, grid.points())
    low = float(values.min())
    if low < -1e-12:
        logger.warning(f"Husimi grid has negative value {low:.3e}")
    logger.debug(f"Husimi grid extent={extent}, resolution={resolution}, n_max={rho.cutoff.n_max}")
    return PhaseSpaceGrid(grid.re_min, grid.re_max, grid.im_min, grid.im_max, resolution, values)


def wigner_grid(rho: FockDensityOperator, extent: float, resolution: int) -> PhaseSpaceGrid:
    _require_diagonal(rho, "Wigner grid")
    grid = _square_grid(extent, resolution)
    values = _wigner_values(rho, grid.points())
    return PhaseSpaceGrid(grid.re_min, grid.re_max, grid.im_min, grid.im_max, resolution, values)


def grid_integral(grid: PhaseSpaceGrid) -> float:
    """Trapezoidal integral over the grid area"""
    if grid.resolution < 2:
        raise DomainError("A single-point grid has no area to integrate over")
    inner = trapezoid(grid.values, grid.im_axis, axis=1)
    return float(trapezoid(inner, grid.re_axis))


def radial_profile(rho: FockDensityOperator, radii: np.ndarray, direction: float = 0.0) -> np.ndarray:
    """Q along the ray r e^{i direction}"""
    radii = np.asarray(radii, dtype=float)
    return _husimi_values(rho, radii * np.exp(1j * direction))


def directional_spread(rho: FockDensityOperator, radius: float, directions: int = 16) -> float:
    """(max - min) / max of Q over equally spaced directions at fixed |beta|"""
    angles = 2.0 * math.pi * np.arange(directions) / directions
    values = _husimi_values(rho, radius * np.exp(1j * angles))
    top = float(values.max())
    if top <= 0:
        return 0.0
    return float((values.max() - values.min()) / top)


def smoothing_check(
    rho: FockDensityOperator,
    beta: complex,
    quad: Optional[QuadratureSpec] = None,
    margin: Optional[float] = None,
) -> float:
    """|Q(beta) - (2/pi) int W(alpha) exp(-2|alpha - beta|^2) d^2 alpha|

    The integral runs over the disk of radius `margin` around beta (which
    lies inside |alpha| <= |beta| + margin), in polar coordinates centred
    on beta.
    """
    _require_diagonal(rho, "Smoothing check")
    settings = get_settings()
    quad = quad or settings.smoothing_quadrature()
    margin = settings.smoothing_margin if margin is None else margin
    x, w = leggauss(quad.radial_order)
    r = 0.5 * margin * (x + 1.0)
    wr = 0.5 * margin * w * r
    theta = 2.0 * math.pi * np.arange(quad.angular_order) / quad.angular_order
    offsets = r[:, None] * np.exp(1j * theta)[None, :]
    wigner = _wigner_values(rho, complex(beta) + offsets)
    kernel = np.exp(-2.0 * r ** 2)
    integral = (2.0 / math.pi) * (2.0 * math.pi / quad.angular_order) * float(np.sum((wr * kernel)[:, None] * wigner))
    deviation = abs(husimi_point(rho, beta, strict=False) - integral)
    logger.debug(f"Smoothing check beta={beta}: deviation {deviation:.3e} at orders ({quad.radial_order}, {quad.angular_order})")
    return deviation


def wigner_negativity_volume(rho: FockDensityOperator, extent: float, resolution: int) -> float:
    """int |W| - 1 on the grid; zero for non-negative Wigner functions"""
    grid = wigner_grid(rho, extent, resolution)
    absolute = PhaseSpaceGrid(grid.re_min, grid.re_max, grid.im_min, grid.im_max, resolution, np.abs(grid.values))
    return grid_integral(absolute) - 1.0


def render_png(grid: PhaseSpaceGrid, path: str, title: Optional[str] = None) -> None:
    """Grayscale image of the grid"""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(5, 5))
    ax.imshow(
        grid.values.T,
        origin="lower",
        extent=(grid.re_min, grid.re_max, grid.im_min, grid.im_max),
        cmap="gray",
    )
    ax.set_xlabel("Re beta")
    ax.set_ylabel("Im beta")
    if title:
        ax.set_title(title)
    fig.savefig(path, dpi=120, bbox_inches="tight")
    plt.close(fig)
    logger.info(f"Wrote grid image to {path}")
