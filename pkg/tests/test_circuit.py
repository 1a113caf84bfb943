import numpy as np
import pytest
from fractions import Fraction

from sawchain.circuit import (CircuitParams, capacitance_matrix,
                              full_potential_energy, gamma_of_k,
                              interaction_kernel,
                              kernel_decomposition_deviation,
                              potential_energy, single_cell_derived)


def params(alpha=-0.8, gamma=1.0, ej=80.0, n=1):
    return CircuitParams(alpha=alpha, gamma=gamma, ej_over_ec=ej, n_cells=n)


class TestCircuitParams:
    @pytest.mark.parametrize("alpha", [-1.0, 0.0, 0.3, -1.2])
    def test_alpha_range_rejected(self, alpha):
        with pytest.raises(ValueError):
            params(alpha=alpha)

    def test_invalid_gamma_ej_n(self):
        with pytest.raises(ValueError):
            params(gamma=-0.1)
        with pytest.raises(ValueError):
            params(ej=0.0)
        with pytest.raises(ValueError):
            params(n=0)

    def test_frustrated_flag(self):
        assert params(alpha=-0.6).frustrated
        assert not params(alpha=-0.5).frustrated
        assert not params(alpha=-0.4).frustrated

    def test_frustration_parameter(self):
        # alpha = 1 - 2f
        assert params(alpha=-0.5).frustration == pytest.approx(0.75)


class TestPotential:
    def test_zero_phase_at_critical_alpha(self):
        assert potential_energy(0.0, params(alpha=-0.5)) == pytest.approx(0.0)

    def test_even_symmetry(self):
        rng = np.random.default_rng(1)
        p = params()
        for phi in rng.uniform(-np.pi, np.pi, size=20):
            assert potential_energy(phi, p) == pytest.approx(
                potential_energy(-phi, p), abs=1e-14)

    def test_double_well_minima_equal(self):
        p = params(alpha=-0.8)
        u0 = single_cell_derived(p).u0
        assert potential_energy(u0, p) == pytest.approx(
            potential_energy(-u0, p), abs=1e-14)

    def test_barrier_against_grid_scan(self):
        # independent oracle: dense scan of the 1d landscape
        p = params(alpha=-0.8)
        phi = np.linspace(-np.pi / 2, np.pi / 2, 2_000_001)
        u = 2 + p.alpha - 2 * np.cos(phi) - p.alpha * np.cos(2 * phi)
        barrier_scan = u[phi.size // 2] - u.min()
        cell = single_cell_derived(p)
        assert cell.barrier == pytest.approx(barrier_scan, rel=1e-9)
        assert cell.barrier == pytest.approx(0.225, abs=1e-12)

    def test_minima_are_stationary(self):
        for alpha in (-0.55, -0.7, -0.9, -0.99):
            p = params(alpha=alpha)
            u0 = single_cell_derived(p).u0
            grad = 2 * np.sin(u0) + 2 * alpha * np.sin(2 * u0)
            assert abs(grad) < 1e-12

    def test_barrier_vanishes_at_critical(self):
        assert single_cell_derived(params(alpha=-0.5)).barrier == pytest.approx(0.0)

    def test_potential_sums_over_cells(self):
        p = params(n=3)
        one = potential_energy(0.3, p)
        assert potential_energy([0.3, 0.3, 0.3], p) == pytest.approx(3 * one)

    def test_full_two_phase_form_matches_reduced(self):
        # symmetric mode: phi1 = phi2 = phi walks chi0 up by 2 phi per cell
        p = params(n=4)
        phi = 0.37
        chi0 = np.arange(5) * 2 * phi
        chi_plus = chi0[:-1] + phi
        assert full_potential_energy(chi0, chi_plus, p) == pytest.approx(
            potential_energy([phi] * 4, p), abs=1e-12)

    def test_full_form_shape_validation(self):
        with pytest.raises(ValueError):
            full_potential_energy([0.0, 0.0], [0.0, 0.0], params(n=2))


class TestSingleCell:
    def test_u0_at_critical(self):
        assert single_cell_derived(params(alpha=-0.5)).u0 == 0.0

    def test_u0_high_precision(self):
        mp = pytest.importorskip("mpmath")
        mp.mp.dps = 40
        expected = float(mp.acos(mp.mpf(1) / mp.mpf("1.6")))
        assert single_cell_derived(params(alpha=-0.8)).u0 == pytest.approx(
            expected, abs=1e-15)

    @pytest.mark.parametrize("alpha,gamma", [(-0.8, 0.0), (-0.8, 1.0),
                                             (-0.6, 0.3), (-0.95, 2.5)])
    def test_frequency_mass_identity(self, alpha, gamma):
        # Omega^2 m_eff = E_J |4 alpha + 1/|alpha||, all in E_C units
        p = params(alpha=alpha, gamma=gamma)
        cell = single_cell_derived(p)
        lhs = cell.omega**2 * cell.m_eff
        rhs = p.ej_over_ec * abs(4 * alpha + 1 / abs(alpha))
        assert lhs == pytest.approx(rhs, rel=1e-12)

    def test_domain_error_outside_double_well(self):
        with pytest.raises(ValueError):
            single_cell_derived(params(alpha=-0.4))


class TestGammaOfK:
    def test_decoupled_limit_is_flat(self):
        p = params(gamma=0.0)
        ks = np.linspace(0.1, 2 * np.pi - 0.1, 17)
        vals = gamma_of_k(ks, p)
        assert np.allclose(vals, 1.0 / (1 + 2 * abs(p.alpha)), atol=1e-14)

    def test_zero_at_k0(self):
        assert gamma_of_k(0.0, params(gamma=1.0)) == 0.0

    def test_value_at_pi_rational_oracle(self):
        # sin^2(pi/2) = 1 exactly, so Gamma(pi) = 1/(gamma/2 + 1 + 2|alpha|)
        expected = Fraction(1) / (Fraction(1, 2) + 1 + 2 * Fraction(8, 10))
        assert expected == Fraction(10, 31)
        assert gamma_of_k(np.pi, params(alpha=-0.8, gamma=1.0)) == pytest.approx(
            float(expected), abs=1e-15)

    def test_reflection_symmetry_and_monotonicity(self):
        p = params(gamma=0.7)
        ks = np.linspace(0.0, np.pi, 40)
        assert np.allclose(gamma_of_k(ks, p), gamma_of_k(2 * np.pi - ks, p),
                           atol=1e-14)
        vals = gamma_of_k(ks, p)  # |sin(k/2)| increases on [0, pi]
        assert np.all(np.diff(vals) >= -1e-15)
        assert vals.max() <= 1.0 / (1 + 2 * abs(p.alpha)) + 1e-15


class TestInteractionKernel:
    def test_gamma_zero_sentinel(self):
        k = interaction_kernel(params(gamma=0.0))
        assert k.gamma_o == 0.0
        assert k.gamma_d == pytest.approx(1 / 2.6)
        assert k.ell0 is None
        assert k.no_interaction

    @pytest.mark.parametrize("gamma", [0.1, 0.5, 2.0, 10.0])
    def test_sum_identity(self, gamma):
        k = interaction_kernel(params(alpha=-0.8, gamma=gamma))
        assert k.gamma_d + k.gamma_o == pytest.approx(1 / 2.6, rel=1e-14)

    def test_small_gamma_screening_length(self):
        # ell0 -> sqrt((2|alpha|+1)/(2 gamma)); high-precision series oracle
        mp = pytest.importorskip("mpmath")
        mp.mp.dps = 50
        a, g = mp.mpf("1.6"), mp.mpf("0.01")
        arg = (a + 1 + g - mp.sqrt(g * (2 * a + g + 2))) / (a + 1)
        exact = float(1 / abs(mp.log(arg)))
        k = interaction_kernel(params(alpha=-0.8, gamma=0.01))
        assert k.ell0 == pytest.approx(exact, rel=1e-12)
        assert k.ell0 == pytest.approx(np.sqrt(130), rel=0.05)

    @pytest.mark.parametrize("gamma", [0.1, 1.0, 10.0])
    def test_decomposition_matches_fourier_transform(self, gamma):
        dev = kernel_decomposition_deviation(params(alpha=-0.8, gamma=gamma),
                                             n_grid=512)
        assert dev < 1e-8

    def test_inverse_screening_monotone_in_gamma(self):
        gammas = np.linspace(0.05, 10.0, 60)
        inv = [1 / interaction_kernel(params(gamma=g)).ell0 for g in gammas]
        assert np.all(np.diff(inv) > 0)

    def test_internal_verification_runs(self):
        interaction_kernel(params(gamma=1.0), verify=True)


class TestCapacitanceMatrix:
    @pytest.mark.parametrize("n", [2, 4, 16, 64])
    def test_inverse_is_tridiagonal(self, n):
        c = capacitance_matrix(params(gamma=0.7, n=n), n)
        inv = np.linalg.inv(c)
        off = np.triu(np.abs(inv), k=2)
        assert off.max() < 1e-10 * np.abs(inv).max()

    def test_structure(self):
        c = capacitance_matrix(params(gamma=0.5, n=3), 3)
        assert np.allclose(c, [[3, 2, 1], [2, 2, 1], [1, 1, 1]])

    def test_size_cap(self):
        with pytest.raises(ValueError):
            capacitance_matrix(params(n=1), 65)
