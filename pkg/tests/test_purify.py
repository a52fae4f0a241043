"""Test cases for g-purification"""
import math

import numpy as np
import pytest

from app.models import DimensionError, DomainError, GmmsSpec, PreconditionError, TruncationError
from app.tools.fock import (
    FockCutoff,
    FockDensityOperator,
    bipartite_projector,
    embedded_mms,
    partial_trace_B,
    partial_trace_B_general,
    trace_out_b,
)
from app.tools.metrics import entropy, thermal_entropy
from app.tools.purify import (
    AncillaUnitary,
    apply_ancilla_unitary,
    entanglement_entropy,
    finite_mes,
    g_purify,
    parity_unitary,
    purify_with_truncation,
    random_ancilla_unitary,
    tmsv,
    two_mode_squeezer_tmsv,
    verify_purification,
)
from app.tools.states import build_state, geometric_cutoff, thermal_state


def random_diagonal_state(cutoff: FockCutoff, rng: np.random.Generator) -> FockDensityOperator:
    weights = rng.random(cutoff.dim)
    return FockDensityOperator.from_diagonal(weights / weights.sum(), cutoff)


class TestGPurify:
    """Test the diagonal purification map"""

    @pytest.mark.parametrize(
        "text", ["thermal:nbar=1", "cvmms:b=2", "squeezed:b=1,s=0.2,phi=0", "riemann:b=1,delta=0.2"]
    )
    def test_round_trip(self, text, tolerance):
        """Test Tr_B of the purification recovers the diagonal state and its entropy"""
        rho = build_state(GmmsSpec.parse(text), tolerance=tolerance)
        target = FockDensityOperator.from_diagonal(rho.diagonal, rho.cutoff)
        state = g_purify(target, tolerance)
        reduced = partial_trace_B(state)
        assert np.max(np.abs(reduced.entries - target.entries)) <= 1e-13
        assert entropy(reduced) == pytest.approx(entropy(target), abs=1e-12)

    def test_coefficients_are_non_negative_roots(self, thermal_one, tolerance):
        state = g_purify(thermal_one, tolerance)
        assert np.all(state.coefficients.real >= 0)
        np.testing.assert_allclose(state.coefficients.real, np.sqrt(thermal_one.diagonal))

    def test_non_diagonal_rejected(self):
        rho = FockDensityOperator.from_matrix(np.full((2, 2), 0.5), FockCutoff(1))
        with pytest.raises(PreconditionError):
            g_purify(rho)

    def test_truncation_path_reports_mass(self, tolerance):
        rho = build_state(GmmsSpec.parse("squeezed:b=1,s=0.3,phi=0"), tolerance=tolerance)
        state, removed = purify_with_truncation(rho, tolerance)
        assert removed > 1e-3
        np.testing.assert_allclose(state.weights, rho.diagonal, atol=1e-15)

    def test_dense_projector_oracle(self, small_cutoff, rng):
        """Test the Schmidt-form partial trace against the dense bipartite projector"""
        rho = random_diagonal_state(small_cutoff, rng)
        state = g_purify(rho)
        dense = trace_out_b(bipartite_projector(state), small_cutoff)
        np.testing.assert_allclose(dense.entries, rho.entries, atol=1e-15)


class TestTmsv:
    """Test the two-mode squeezed vacuum"""

    @pytest.mark.parametrize("zeta", [0.25, 0.5, 1.0, 2.0])
    def test_reduced_state_is_thermal(self, zeta, tolerance):
        nbar = math.sinh(zeta) ** 2
        cutoff = FockCutoff(geometric_cutoff(math.tanh(zeta) ** 2, tolerance.tau_trace) + 1)
        reduced = partial_trace_B(tmsv(zeta, cutoff, tolerance))
        np.testing.assert_allclose(reduced.entries, thermal_state(nbar, cutoff, tolerance).entries, atol=1e-12)

    def test_g_purify_of_thermal_matches_tmsv_magnitudes(self, tolerance):
        nbar = math.sinh(1.0) ** 2
        cutoff = FockCutoff(geometric_cutoff(math.tanh(1.0) ** 2, tolerance.tau_trace) + 1)
        state = g_purify(thermal_state(nbar, cutoff, tolerance))
        np.testing.assert_allclose(np.abs(state.coefficients), np.abs(tmsv(1.0, cutoff).coefficients), atol=1e-13)

    def test_matches_two_mode_squeezer(self):
        """Test the closed form against exp(zeta (ab - a^dagger b^dagger))|0,0>"""
        cutoff = FockCutoff(40)
        expected = two_mode_squeezer_tmsv(0.5, cutoff)
        np.testing.assert_allclose(tmsv(0.5, cutoff).to_two_mode().coefficients, expected.coefficients, atol=1e-10)

    def test_zero_squeezing_is_vacuum(self, small_cutoff):
        assert tmsv(0.0, small_cutoff).coefficients[0] == 1.0

    def test_cutoff_too_small(self, tolerance):
        with pytest.raises(TruncationError):
            tmsv(2.0, FockCutoff(10), tolerance)

    def test_negative_squeezing(self, small_cutoff):
        with pytest.raises(DomainError):
            tmsv(-0.1, small_cutoff)

    def test_entanglement_entropy_matches_thermal(self):
        cutoff = FockCutoff(120)
        zeta = 0.8
        assert entanglement_entropy(tmsv(zeta, cutoff)) == pytest.approx(thermal_entropy(math.sinh(zeta) ** 2), abs=1e-8)


class TestAncillaFreedom:
    """Test that unitaries on the ancilla leave the reduced state unchanged"""

    def test_random_unitaries(self, rng):
        cutoff = FockCutoff(8)
        rho = random_diagonal_state(cutoff, rng)
        state = g_purify(rho)
        for _ in range(20):
            rotated = apply_ancilla_unitary(state, random_ancilla_unitary(cutoff, rng))
            reduced = partial_trace_B_general(rotated)
            assert np.max(np.abs(reduced.entries - rho.entries)) <= 1e-12

    def test_parity(self, rng):
        cutoff = FockCutoff(8)
        rho = random_diagonal_state(cutoff, rng)
        rotated = apply_ancilla_unitary(g_purify(rho), parity_unitary(cutoff))
        assert verify_purification(rotated, rho, 1e-14).passed

    def test_non_unitary_rejected(self, small_cutoff):
        with pytest.raises(PreconditionError):
            AncillaUnitary.create(2.0 * np.eye(small_cutoff.dim), small_cutoff)

    def test_cutoff_mismatch(self, small_cutoff):
        state = g_purify(embedded_mms(2, small_cutoff))
        with pytest.raises(DimensionError):
            apply_ancilla_unitary(state, AncillaUnitary.identity(FockCutoff(3)))


class TestFiniteMes:
    """Test the finite maximally entangled state"""

    @pytest.mark.parametrize("d", [1, 2, 16])
    def test_reduces_to_mms(self, d):
        cutoff = FockCutoff(20)
        state = finite_mes(d, cutoff)
        np.testing.assert_allclose(partial_trace_B(state).entries, embedded_mms(d, cutoff).entries, atol=1e-15)
        assert entanglement_entropy(state) == pytest.approx(math.log(d), abs=1e-12)

    def test_out_of_range(self):
        with pytest.raises(DomainError):
            finite_mes(0, FockCutoff(4))


class TestVerifyPurification:
    """Test the verification report"""

    def test_detects_mismatch(self, small_cutoff):
        state = finite_mes(2, small_cutoff)
        report = verify_purification(state, embedded_mms(4, small_cutoff), 1e-12)
        assert not report.passed
        assert report.max_entry_deviation == pytest.approx(0.25)

    def test_cutoff_mismatch(self, small_cutoff):
        with pytest.raises(DimensionError):
            verify_purification(finite_mes(2, small_cutoff), embedded_mms(2, FockCutoff(3)), 1e-12)
