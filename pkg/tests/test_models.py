"""Hamiltonian constructors, the metric operator, and the regime classifier."""

import numpy as np
import pytest

from ptsim.errors import DimMismatch, MetricUndefined, UnsupportedFamily
from ptsim.models import (
    Family,
    HamiltonianSpec,
    build_hamiltonian,
    check_pseudo_hermiticity,
    classify_regime,
    metric_eta,
    normalization_c,
)
from ptsim.qcore import ID2, SIGMA_X


class TestBuildHamiltonian:
    def test_hermitian_limit(self):
        np.testing.assert_allclose(
            build_hamiltonian(HamiltonianSpec(Family.PT, 0.0)), SIGMA_X
        )

    def test_pt_half(self):
        want = np.array([[0.5j, 1], [1, -0.5j]])
        np.testing.assert_allclose(build_hamiltonian(HamiltonianSpec(Family.PT, 0.5)), want)

    def test_time_reversal_half(self):
        want = np.array([[0, 1.5], [0.5, 0]], dtype=complex)
        np.testing.assert_allclose(
            build_hamiltonian(HamiltonianSpec(Family.TIME_REVERSAL, 0.5)), want
        )

    def test_no_symmetry(self):
        got = build_hamiltonian(HamiltonianSpec(Family.NO_SYMMETRY, 0.5, 0.3))
        want = np.array([[0.3 + 0.5j, 1], [1, -0.3 - 0.5j]])
        np.testing.assert_allclose(got, want)

    def test_passive_is_shifted_pt(self):
        for a in (0.0, 0.3, 0.9, 1.7):
            pt = build_hamiltonian(HamiltonianSpec(Family.PT, a))
            passive = build_hamiltonian(HamiltonianSpec(Family.PASSIVE_PT, a))
            np.testing.assert_array_equal(passive, pt - 1j * a * ID2)

    def test_embedded_rejected(self):
        with pytest.raises(UnsupportedFamily):
            build_hamiltonian(HamiltonianSpec(Family.EMBEDDED, 0.5))

    @pytest.mark.parametrize("a", [0.0, 0.2, 0.5, 0.8, 0.99])
    def test_eigenvalues_of_pt_and_t_families(self, a):
        want = np.sqrt(1 - a * a)
        for fam in (Family.PT, Family.TIME_REVERSAL):
            ev = np.linalg.eigvals(build_hamiltonian(HamiltonianSpec(fam, a)))
            np.testing.assert_allclose(sorted(ev.real), [-want, want], atol=1e-10)
            np.testing.assert_allclose(ev.imag, 0.0, atol=1e-10)

    @pytest.mark.parametrize("a", [0.1, 0.5, 1.3])
    def test_time_reversal_symmetry(self, a):
        H = build_hamiltonian(HamiltonianSpec(Family.TIME_REVERSAL, a))
        assert np.abs(np.conj(H) - H).max() < 1e-12

    def test_spec_validation(self):
        with pytest.raises(ValueError):
            HamiltonianSpec(Family.PT, -0.1)
        with pytest.raises(ValueError):
            HamiltonianSpec(Family.NO_SYMMETRY, 0.5, np.nan)


class TestMetric:
    def test_identity_at_zero(self):
        np.testing.assert_allclose(metric_eta(0.0), ID2)

    def test_half(self):
        got = metric_eta(0.5)
        s = 1 / np.sqrt(0.75)
        want = s * np.array([[1, -0.5j], [0.5j, 1]])
        np.testing.assert_allclose(got, want)
        assert got[0, 0].real == pytest.approx(1.1547, abs=5e-5)
        assert got[0, 1].imag == pytest.approx(-0.5774, abs=5e-5)

    def test_eigenvalues_half(self):
        # closed form (1 +- a)/sqrt(1 - a^2), cross-checked numerically
        lam = np.linalg.eigvalsh(metric_eta(0.5))
        want = np.array([0.5, 1.5]) / np.sqrt(0.75)
        np.testing.assert_allclose(np.sort(lam), want, atol=1e-12)
        np.testing.assert_allclose(np.sort(lam), [0.5774, 1.7321], atol=5e-5)

    def test_positive_definite_sweep(self):
        for a in np.linspace(0.0, 0.999, 40):
            assert np.linalg.eigvalsh(metric_eta(a)).min() > 0

    def test_undefined_at_and_beyond_ep(self):
        for a in (1.0, 1.5):
            with pytest.raises(MetricUndefined):
                metric_eta(a)
        with pytest.raises(ValueError):
            metric_eta(-0.2)


class TestNormalization:
    def test_trivial(self):
        assert normalization_c(0.0) == pytest.approx(2.0, abs=1e-12)

    def test_half(self):
        assert normalization_c(0.5) == pytest.approx(2 / np.sqrt(0.75), abs=1e-12)
        assert normalization_c(0.5) == pytest.approx(2.3094, abs=5e-5)

    def test_divergence_toward_ep(self):
        assert normalization_c(0.99) == pytest.approx(2 / np.sqrt(1 - 0.99**2), abs=1e-10)
        assert normalization_c(0.99) == pytest.approx(14.1779, abs=5e-4)
        assert normalization_c(0.999) > normalization_c(0.99) > normalization_c(0.9)

    def test_undefined(self):
        with pytest.raises(MetricUndefined):
            normalization_c(1.0)


class TestRegime:
    def test_unbroken(self):
        r = classify_regime(0.5)
        assert r.kind == "unbroken" and r.epsilon == pytest.approx(0.5)

    def test_exceptional_point(self):
        assert classify_regime(1.0).kind == "exceptional-point"
        assert classify_regime(1.0 + 1e-13).kind == "exceptional-point"
        assert classify_regime(1.0 - 1e-13).kind == "exceptional-point"

    def test_broken(self):
        r = classify_regime(1.25)
        assert r.kind == "broken" and r.epsilon == pytest.approx(-0.25)

    def test_deterministic_boundaries(self):
        assert classify_regime(1.0 - 1e-9).kind == "unbroken"
        assert classify_regime(1.0 + 1e-9).kind == "broken"
        with pytest.raises(ValueError):
            classify_regime(-0.5)


class TestPseudoHermiticity:
    def test_certifies_pt(self):
        H = build_hamiltonian(HamiltonianSpec(Family.PT, 0.5))
        assert check_pseudo_hermiticity(H, metric_eta(0.5)) < 1e-10

    def test_hermitian_with_identity_metric(self):
        assert check_pseudo_hermiticity(SIGMA_X, ID2) == 0.0

    def test_rejects_no_symmetry_family(self):
        H = build_hamiltonian(HamiltonianSpec(Family.NO_SYMMETRY, 0.5, 0.5))
        assert check_pseudo_hermiticity(H, metric_eta(0.5)) > 0.1

    def test_dim_mismatch(self):
        with pytest.raises(DimMismatch):
            check_pseudo_hermiticity(SIGMA_X, np.eye(4))
