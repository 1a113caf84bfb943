import json
import math

import numpy as np
import pytest

from sawchain.circuit import CircuitParams, single_cell_derived
from sawchain.variational import (HigherOrderAmplitude,
                                  enumerate_cluster_amplitudes,
                                  exchange_couplings,
                                  higher_order_log_amplitude,
                                  single_block_amplitudes, solve_variational,
                                  tunneling_amplitude, wkb_amplitude)


def circuit(alpha=-0.8, gamma=1.0, ej=80.0, n=64):
    return CircuitParams(alpha=alpha, gamma=gamma, ej_over_ec=ej, n_cells=n)


def test_rejects_short_or_unfrustrated_chains():
    with pytest.raises(ValueError):
        solve_variational(circuit(n=1))
    with pytest.raises(ValueError):
        solve_variational(circuit(alpha=-0.4))


class TestOverlapMatrix:
    def test_gamma_zero_is_diagonal(self):
        sol = solve_variational(circuit(gamma=0.0, n=64))
        a = sol.a_table
        assert np.max(np.abs(a[1:])) / a[0] < 1e-10
        # normalization constant of the cosine grid: A(0) = (pi/4) m_eff Omega
        cell = sol.cell
        assert a[0] == pytest.approx(np.pi / 4 * cell.m_eff * cell.omega, rel=1e-12)

    def test_transform_matches_direct_double_sum(self):
        for n in (16, 128):
            sol = solve_variational(circuit(n=n))
            direct = np.array([
                np.pi / (2 * n) * sum(
                    z * math.cos(k * d) for z, k in zip(sol.zeta, sol.k_grid))
                for d in range(n)
            ])
            assert np.max(np.abs(direct - sol.a_table)) < 1e-12

    def test_a0_grows_logarithmically(self):
        ns = (64, 128, 256, 512)
        a0 = [solve_variational(circuit(n=n)).a_table[0] for n in ns]
        x = np.log(ns)
        slope, _ = np.polyfit(x, a0, 1)
        pred = np.polyval(np.polyfit(x, a0, 1), x)
        r2 = 1 - np.sum((a0 - pred) ** 2) / np.sum((a0 - np.mean(a0)) ** 2)
        assert slope > 0
        assert r2 > 0.9999

    def test_large_d_log_slope_matches_a0_slope(self):
        # A(d) ~ c1 - c2 ln d beyond the screening length, with c2 equal to
        # the ln N growth rate of A(0)
        n = 2048
        sol = solve_variational(circuit(n=n))
        d = np.arange(8, n // 4)
        c2 = -np.polyfit(np.log(d), sol.a_table[d], 1)[0]
        ns = (256, 512, 1024, 2048)
        a0 = [solve_variational(circuit(n=m)).a_table[0] for m in ns]
        c_n = np.polyfit(np.log(ns), a0, 1)[0]
        assert c2 == pytest.approx(c_n, rel=0.05)

    def test_a_table_monotone_decreasing(self):
        for gamma in (0.1, 1.0):
            sol = solve_variational(circuit(gamma=gamma, n=256))
            assert np.all(np.diff(sol.a_table) < 0)

    def test_zeta_positive_and_flat_at_gamma_zero(self):
        sol = solve_variational(circuit(gamma=0.0, n=32))
        expected = sol.d_coeff / 4 * math.sqrt(2 * 0.8 + 1)
        assert np.allclose(sol.zeta, expected, rtol=1e-14)
        assert np.all(solve_variational(circuit(n=32)).zeta > 0)


class TestTunneling:
    def test_underflow_sentinel(self):
        sol = solve_variational(circuit(ej=1e6, n=512))
        assert tunneling_amplitude(sol) == 0.0

    def test_monotone_toward_critical_frustration(self):
        vals = [tunneling_amplitude(solve_variational(circuit(alpha=a)))
                for a in (-0.9, -0.8, -0.7, -0.6, -0.55)]
        assert all(b > a for a, b in zip(vals, vals[1:]))

    def test_log_linear_in_chain_length(self):
        ns = np.array([8, 16, 32, 64, 128, 256])
        logs = [exchange_couplings(solve_variational(circuit(n=int(n)))).log_delta
                for n in ns]
        x = np.log(ns)
        slope, intercept = np.polyfit(x, logs, 1)
        pred = slope * x + intercept
        r2 = 1 - np.sum((logs - pred) ** 2) / np.sum((logs - np.mean(logs)) ** 2)
        assert slope < 0
        assert r2 > 0.99

    def test_prefactor_scales_amplitude(self):
        sol = solve_variational(circuit(n=16))
        assert tunneling_amplitude(sol, prefactor=2.0) == pytest.approx(
            2 * tunneling_amplitude(sol), rel=1e-14)


class TestWkb:
    def test_amplitude_at_critical_point(self):
        # vanishing barrier: exponent 0, amplitude 1/(2 pi) in hbar Omega units
        p = CircuitParams(alpha=-0.5, gamma=1.0, ej_over_ec=80)
        assert wkb_amplitude(p) == pytest.approx(1 / (2 * np.pi), rel=1e-12)
        assert single_block_amplitudes(p).wkb_exponent == 0.0

    def test_domain_error(self):
        with pytest.raises(ValueError):
            wkb_amplitude(CircuitParams(alpha=-0.4, gamma=1.0, ej_over_ec=80))

    def test_exponent_asymptote_near_critical(self):
        # S -> (4/3) sqrt(ej (gamma+2)) (2|alpha|-1)^(3/2)
        ej, gamma = 80.0, 1.0
        coef = (4 / 3) * math.sqrt(ej * (gamma + 2))
        p = CircuitParams(alpha=-0.5005, gamma=gamma, ej_over_ec=ej)
        t = 2 * 0.5005 - 1
        assert single_block_amplitudes(p).wkb_exponent == pytest.approx(
            coef * t ** 1.5, rel=0.02)
        # power-law fit over the wider window keeps the universal 3/2 slope
        ts = np.array([0.002, 0.005, 0.01, 0.02, 0.05, 0.1])
        ys = [single_block_amplitudes(
            CircuitParams(alpha=-(1 + t) / 2, gamma=gamma, ej_over_ec=ej)
        ).wkb_exponent for t in ts]
        slope = np.polyfit(np.log(ts), np.log(ys), 1)[0]
        assert 1.40 < slope < 1.55

    @pytest.mark.parametrize("gamma", [0.0, 1.0, 3.0])
    def test_variational_to_wkb_ratio(self, gamma):
        p = CircuitParams(alpha=-0.501, gamma=gamma, ej_over_ec=80)
        amps = single_block_amplitudes(p)
        assert amps.variational_exponent / amps.wkb_exponent == pytest.approx(
            0.75, abs=0.02)


class TestExchangeCouplings:
    def test_tables_monotone_and_bounded(self):
        m = exchange_couplings(solve_variational(circuit(n=256)))
        j_abs = m.j1 * m.j_table
        assert np.all(np.diff(j_abs) <= 0)
        assert np.all(j_abs > 0)
        assert j_abs[0] <= 1.0  # J(d) <= J_0 = hbar Omega
        assert m.j_table[0] == pytest.approx(1.0)

    @pytest.mark.parametrize("gamma", [0.1, 0.5, 1.5])
    def test_power_law_exponent_matches_analytic(self, gamma):
        m = exchange_couplings(solve_variational(circuit(gamma=gamma, n=1000)))
        assert m.beta_fit == pytest.approx(m.beta_analytic, rel=0.10)
        assert m.fit_r_squared > 0.995

    def test_beta_analytic_value(self):
        m = exchange_couplings(solve_variational(circuit(n=16)))
        cell = single_cell_derived(circuit(n=16))
        d = math.sqrt(80 * (4 * 0.8 - 1 / 0.8))
        assert m.beta_analytic == pytest.approx(d * cell.u0**2 * math.sqrt(0.5),
                                                rel=1e-12)

    def test_delta_tilde_increases_when_n_decreases(self):
        tilde = [exchange_couplings(solve_variational(circuit(n=n))).delta_tilde
                 for n in (256, 128, 64, 32)]
        assert all(b > a for a, b in zip(tilde, tilde[1:]))

    def test_gamma_zero_collapse(self):
        m = exchange_couplings(solve_variational(circuit(gamma=0.0, n=32)))
        assert m.no_interaction
        assert m.ell0 is None
        assert m.beta_fit is None
        assert np.allclose(m.j_table, 1.0)  # structureless couplings

    def test_fit_window_empty_flag(self):
        m = exchange_couplings(solve_variational(circuit(n=8)))
        assert m.beta_fit is None
        assert m.fit_r_squared is None

    def test_json_document_keys(self):
        m = exchange_couplings(solve_variational(circuit(n=32)))
        doc = json.loads(m.to_json())
        for key in ("alpha", "gamma", "ej_over_ec", "n_cells", "u0",
                    "hbar_omega", "delta", "j_table", "delta_tilde",
                    "beta_fit", "beta_analytic", "ell0"):
            assert key in doc
        assert len(doc["j_table"]) == 31

    def test_delta_tilde_finite_under_underflow(self):
        # individual amplitudes underflow but the ratio stays meaningful
        m = exchange_couplings(solve_variational(circuit(ej=1e5, n=256)))
        assert m.delta == 0.0
        assert m.j1 == 0.0
        assert math.isfinite(m.delta_tilde) and m.delta_tilde > 0


class TestHigherOrder:
    def setup_method(self):
        self.sol = solve_variational(circuit(n=512))

    def test_order2_odd_equals_exchange_log(self):
        spec = HigherOrderAmplitude(order=2, parities=(-1,), distances=(1,))
        m = exchange_couplings(self.sol)
        assert higher_order_log_amplitude(spec, self.sol) == m.log_j1

    def test_even_to_odd_ratio(self):
        # J+(d)/J(d) = exp(-8 u0^2 A(d))
        odd = HigherOrderAmplitude(order=2, parities=(-1,), distances=(1,))
        even = HigherOrderAmplitude(order=2, parities=(1,), distances=(1,))
        diff = (higher_order_log_amplitude(even, self.sol)
                - higher_order_log_amplitude(odd, self.sol))
        assert diff == pytest.approx(-8 * self.sol.u0_sq * self.sol.a_table[1],
                                     rel=1e-12)

    def test_parity_flip_strictly_decreases_amplitude(self):
        base = HigherOrderAmplitude(order=3, parities=(-1, -1, 1),
                                    distances=(1, 1, 2))
        val = higher_order_log_amplitude(base, self.sol)
        for i in range(3):
            if base.parities[i] == 1:
                continue
            flipped = list(base.parities)
            flipped[i] = 1
            other = HigherOrderAmplitude(order=3, parities=tuple(flipped),
                                         distances=(1, 1, 2))
            assert higher_order_log_amplitude(other, self.sol) < val

    def test_cluster_validation(self):
        with pytest.raises(ValueError):
            HigherOrderAmplitude(order=2, parities=(-1,), distances=(3,))
        with pytest.raises(ValueError):
            HigherOrderAmplitude(order=3, parities=(-1, -1), distances=(1, 1))
        with pytest.raises(ValueError):
            HigherOrderAmplitude(order=2, parities=(-2,), distances=(1,))
        with pytest.raises(ValueError):
            HigherOrderAmplitude(order=0, parities=(), distances=())

    def test_enumeration_counts_and_order1(self):
        recs = enumerate_cluster_amplitudes(self.sol, max_order=4)
        assert len(recs) == 1 + 2 + 3 + 4
        assert recs[0]["order"] == 1
        assert recs[0]["log_amplitude"] == pytest.approx(
            -2 * self.sol.u0_sq * self.sol.a_table[0])

    def test_more_odd_pairs_means_larger_amplitude(self):
        recs = enumerate_cluster_amplitudes(self.sol, max_order=4)
        for order in (2, 3, 4):
            vals = [r["log_amplitude"] for r in recs if r["order"] == order]
            # records are emitted with n_odd descending
            assert all(a > b for a, b in zip(vals, vals[1:]))
