"""Test cases for Husimi and Wigner phase-space functions"""
import math

import numpy as np
import pytest

from app.models import DomainError, GmmsSpec, PreconditionError, QuadratureSpec, TruncationError
from app.tools.fock import FockCutoff, FockDensityOperator, fock_projector
from app.tools.phasespace import (
    PhaseSpaceGrid,
    directional_spread,
    grid_integral,
    husimi_grid,
    husimi_point,
    radial_profile,
    render_png,
    smoothing_check,
    wigner_grid,
    wigner_negativity_volume,
    wigner_point,
)
from app.tools.states import build_state, cvmms_state

SAMPLE_POINTS = [0.0, 0.5, 1.0 + 0.5j, -0.7 + 1.2j, 2.0j]


class TestHusimiPoint:
    """Test Q(beta) = <beta|rho|beta> / pi"""

    @pytest.mark.parametrize("beta", SAMPLE_POINTS)
    def test_vacuum(self, vacuum, beta):
        assert husimi_point(vacuum, beta, strict=False) == pytest.approx(math.exp(-abs(beta) ** 2) / math.pi, rel=1e-12)

    def test_cvmms_origin(self, cvmms_one):
        assert husimi_point(cvmms_one, 0.0) == pytest.approx((1.0 - math.exp(-1.0)) / math.pi, abs=1e-10)

    def test_thermal_closed_form(self, thermal_one, rng):
        for _ in range(10):
            beta = complex(*rng.uniform(-2.0, 2.0, size=2))
            expected = math.exp(-abs(beta) ** 2 / 2.0) / (2.0 * math.pi)
            assert husimi_point(thermal_one, beta, strict=False) == pytest.approx(expected, abs=1e-9)

    def test_non_diagonal_operator(self):
        """Test the general sandwich on a superposition |psi> = (|0> + |1>)/sqrt 2"""
        cutoff = FockCutoff(1)
        rho = FockDensityOperator.from_matrix(np.full((2, 2), 0.5), cutoff)
        beta = 0.3 + 0.4j
        psi_overlap = math.exp(-abs(beta) ** 2 / 2.0) * (1.0 + np.conj(beta)) / math.sqrt(2.0)
        assert husimi_point(rho, beta, strict=False) == pytest.approx(abs(psi_overlap) ** 2 / math.pi, rel=1e-12)

    def test_strict_mode_flags_truncated_ket(self, cvmms_one):
        with pytest.raises(TruncationError):
            husimi_point(cvmms_one, 6.0, strict=True)

    def test_truncated_ket_rejected_by_default(self, tolerance):
        rho = cvmms_state(1.0, FockCutoff(20), tolerance)
        with pytest.raises(TruncationError):
            husimi_point(rho, 10.0)
        assert husimi_point(rho, 10.0, strict=False) >= 0.0

    def test_default_accepts_contained_ket(self, thermal_one):
        expected = math.exp(-0.25 / 2.0) / (2.0 * math.pi)
        assert husimi_point(thermal_one, 0.5) == pytest.approx(expected, abs=1e-9)


class TestWignerPoint:
    """Test the Fock-diagonal Wigner sum"""

    def test_vacuum_peak(self, vacuum):
        assert wigner_point(vacuum, 0.0) == pytest.approx(2.0 / math.pi)

    def test_single_photon_negative(self):
        assert wigner_point(fock_projector(1, FockCutoff(3)), 0.0) == pytest.approx(-2.0 / math.pi)

    def test_thermal_origin(self, thermal_one):
        assert wigner_point(thermal_one, 0.0) == pytest.approx(2.0 / (3.0 * math.pi), abs=1e-9)

    def test_thermal_gaussian(self, thermal_one):
        alpha = 0.8 - 0.3j
        expected = 2.0 / (3.0 * math.pi) * math.exp(-2.0 * abs(alpha) ** 2 / 3.0)
        assert wigner_point(thermal_one, alpha) == pytest.approx(expected, abs=1e-9)

    def test_non_diagonal_rejected(self):
        rho = FockDensityOperator.from_matrix(np.full((2, 2), 0.5), FockCutoff(1))
        with pytest.raises(PreconditionError):
            wigner_point(rho, 0.0)


class TestHusimiGrid:
    """Test grids, their integrals and CSV form"""

    def test_cvmms_profile(self, cvmms_one):
        """Test the b = 1 grid is peaked at the centre and radially symmetric"""
        grid = husimi_grid(cvmms_one, 4.0, 81)
        assert grid.values.shape == (81, 81)
        assert np.unravel_index(int(np.argmax(grid.values)), grid.values.shape) == (40, 40)
        assert np.min(grid.values) >= -1e-12
        for radius in (0.5, 1.0, 2.0, 3.0):
            assert directional_spread(cvmms_one, radius) < 1e-12

    def test_radial_decrease(self, cvmms_one, thermal_one):
        radii = np.linspace(0.0, 4.0, 41)
        for rho in (cvmms_one, thermal_one):
            assert np.all(np.diff(radial_profile(rho, radii)) <= 1e-14)

    def test_flattens_with_boundary(self, cvmms_one, tolerance):
        wide = build_state(GmmsSpec.parse("cvmms:b=5"), tolerance=tolerance)
        narrow_ratio = husimi_point(cvmms_one, 0.0) / husimi_point(cvmms_one, 2.0, strict=False)
        wide_ratio = husimi_point(wide, 0.0) / husimi_point(wide, 2.0, strict=False)
        assert wide_ratio < narrow_ratio

    def test_vacuum_normalization(self, vacuum, tolerance):
        assert grid_integral(husimi_grid(vacuum, 5.0, 101)) == pytest.approx(1.0, abs=tolerance.tau_grid)

    def test_cvmms_normalization(self, cvmms_one, tolerance):
        assert grid_integral(husimi_grid(cvmms_one, 6.0, 121)) == pytest.approx(1.0, abs=tolerance.tau_grid)

    def test_single_point_grid(self, vacuum):
        grid = husimi_grid(vacuum, 3.0, 1)
        assert grid.values.shape == (1, 1)
        assert grid.values[0, 0] == pytest.approx(1.0 / math.pi)
        restored = PhaseSpaceGrid.from_csv(grid.to_csv())
        assert restored.resolution == 1
        assert restored.values[0, 0] == grid.values[0, 0]

    def test_csv_round_trip(self, cvmms_one):
        grid = husimi_grid(cvmms_one, 2.0, 11)
        text = grid.to_csv()
        lines = text.splitlines()
        assert lines[0] == "re,im,value"
        assert len(lines) == 1 + 11 * 11
        restored = PhaseSpaceGrid.from_csv(text)
        np.testing.assert_array_equal(restored.values, grid.values)
        assert (restored.re_min, restored.re_max) == (-2.0, 2.0)

    def test_csv_rejects_ragged_grid(self):
        with pytest.raises(DomainError):
            PhaseSpaceGrid.from_csv("re,im,value\n0,0,1\n0,1,1\n")

    def test_invalid_extent(self, vacuum):
        with pytest.raises(DomainError):
            husimi_grid(vacuum, 0.0, 11)

    def test_render_png(self, cvmms_one, tmp_path):
        pytest.importorskip("matplotlib")
        path = tmp_path / "q.png"
        render_png(husimi_grid(cvmms_one, 3.0, 21), str(path))
        assert path.read_bytes()[:8] == b"\x89PNG\r\n\x1a\n"


class TestSmoothingIdentity:
    """Test Q as the Gaussian smoothing of W"""

    @pytest.mark.parametrize("beta", SAMPLE_POINTS)
    def test_default_quadrature(self, vacuum, thermal_one, cvmms_one, beta):
        for rho in (vacuum, thermal_one, cvmms_one):
            assert smoothing_check(rho, beta) < 1e-6

    def test_vacuum_origin_is_tight(self, vacuum):
        assert smoothing_check(vacuum, 0.0) < 1e-8

    def test_refinement_reduces_deviation(self, thermal_one):
        beta = 1.0 + 0.5j
        coarse = smoothing_check(thermal_one, beta, QuadratureSpec(radial_order=6, angular_order=8))
        fine = smoothing_check(thermal_one, beta, QuadratureSpec(radial_order=24, angular_order=32))
        assert fine < coarse

    def test_non_diagonal_rejected(self):
        rho = FockDensityOperator.from_matrix(np.full((2, 2), 0.5), FockCutoff(1))
        with pytest.raises(PreconditionError):
            smoothing_check(rho, 0.0)


class TestWignerDiagnostics:
    """Test Wigner grids and the negativity volume"""

    def test_wigner_grid_normalization(self, thermal_one):
        assert grid_integral(wigner_grid(thermal_one, 6.0, 121)) == pytest.approx(1.0, abs=1e-3)

    def test_negativity(self, vacuum):
        assert wigner_negativity_volume(vacuum, 5.0, 101) == pytest.approx(0.0, abs=1e-3)
        assert wigner_negativity_volume(fock_projector(1, FockCutoff(3)), 5.0, 101) > 0.1
