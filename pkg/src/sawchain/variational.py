"""Gaussian variational mapping of the frustrated chain onto spin variables.

A product of Gaussians centered on the potential minima turns the circuit
Hamiltonian into a spin model.  The Gaussian widths follow from the harmonic
normal modes: on the open-chain cosine grid k_j = pi*(j + 1/2)/N the width
parameter is

    zeta(k) = (D/4) * sqrt(gamma/2 + (2|alpha|+1) sin^2(k/2)) / |sin(k/2)|,
    D = sqrt((E_J/E_C) (4|alpha| - 1/|alpha|)),

and the overlap matrix is the cosine transform

    A(d) = (pi / 2N) * sum_j zeta(k_j) cos(k_j d).

The half-integer grid makes the gamma = 0 limit exactly diagonal, and the
normalization is fixed so that the fitted decay exponent of the exchange
couplings reproduces the analytic value beta = D u0^2 sqrt(gamma/2) (the
large-d slope of A is then (D/4) sqrt(gamma/2) per unit ln d).

Spin-model amplitudes (pre-exponential factors of order hbar*Omega are
configurable and default to exactly hbar*Omega):

    Delta  = Delta_0 exp(-2 u0^2 A(0))                    single flip
    J(d)   = J_0 exp(-4 u0^2 [A(0) - A(d)])               odd pair flip
    J+(d)  = J_0 exp(-4 u0^2 [A(0) + A(d)])               even pair flip
    J^(n)  = J_0 exp(-4 u0^2 [(n/2) A(0) + sum_i P_i A(d_i)])

with pair parities P_i = +-1 induced by the per-cell flip signs.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import fft as _fft

from .circuit import CircuitParams, SingleCellDerived, interaction_kernel, single_cell_derived

__all__ = [
    "VariationalSolution",
    "SpinModelParams",
    "HigherOrderAmplitude",
    "SingleBlockAmplitudes",
    "solve_variational",
    "tunneling_amplitude",
    "wkb_amplitude",
    "single_block_amplitudes",
    "exchange_couplings",
    "higher_order_log_amplitude",
    "enumerate_cluster_amplitudes",
]

# exp() underflow guard for reported amplitudes
_EXP_FLOOR = -700.0


def _safe_exp(x: float) -> float:
    if x < _EXP_FLOOR:
        return 0.0
    return float(math.exp(x)) if x < 700.0 else float("inf")


@dataclass(frozen=True)
class VariationalSolution:
    """Width table zeta(k) and overlap matrix A(d) for one parameter point."""

    params: CircuitParams
    cell: SingleCellDerived
    d_coeff: float
    k_grid: np.ndarray
    zeta: np.ndarray
    a_table: np.ndarray  # A(d), d = 0 .. N-1

    @property
    def u0_sq(self) -> float:
        return self.cell.u0 ** 2


@dataclass(frozen=True)
class SpinModelParams:
    """Effective spin model derived from one circuit parameter point.

    Amplitudes are in units of hbar*Omega times the chosen pre-exponential
    factors; `j_table` holds J(d)/J(1) for d = 1 .. N-1 (first entry 1).
    """

    alpha: float
    gamma: float
    ej_over_ec: float
    n_cells: int
    u0: float
    hbar_omega: float
    delta: float
    j1: float
    j_table: np.ndarray
    delta_tilde: float
    beta_fit: float | None
    beta_analytic: float
    ell0: float | None
    fit_r_squared: float | None = None
    fit_window: tuple[int, int] | None = None
    no_interaction: bool = False
    log_delta: float = field(default=float("nan"), repr=False)
    log_j1: float = field(default=float("nan"), repr=False)

    def to_dict(self) -> dict:
        return {
            "alpha": self.alpha,
            "gamma": self.gamma,
            "ej_over_ec": self.ej_over_ec,
            "n_cells": self.n_cells,
            "u0": self.u0,
            "hbar_omega": self.hbar_omega,
            "delta": self.delta,
            "j1": self.j1,
            "j_table": [float(x) for x in self.j_table],
            "delta_tilde": self.delta_tilde,
            "beta_fit": self.beta_fit,
            "beta_analytic": self.beta_analytic,
            "ell0": self.ell0,
            "fit_r_squared": self.fit_r_squared,
            "fit_window": list(self.fit_window) if self.fit_window else None,
            "no_interaction": self.no_interaction,
        }

    def to_json(self, **kwargs) -> str:
        kwargs.setdefault("indent", 2)
        return json.dumps(self.to_dict(), **kwargs)


@dataclass(frozen=True)
class HigherOrderAmplitude:
    """A simultaneous flip of `order` adjacent cells.

    `parities` and `distances` list the pair parity P_i = +-1 and separation
    d_i of every intra-cluster pair with d_i in {1, 2}: order-1 of them at
    d = 1 and order-2 at d = 2.
    """

    order: int
    parities: tuple[int, ...]
    distances: tuple[int, ...]

    def __post_init__(self):
        if self.order < 1:
            raise ValueError("order must be >= 1")
        if len(self.parities) != len(self.distances):
            raise ValueError("parities and distances must have equal length")
        if any(p not in (-1, 1) for p in self.parities):
            raise ValueError("parities must be +-1")
        if any(d > 2 or d < 1 for d in self.distances):
            raise ValueError(
                "pair distances beyond 2 are outside the modeled flip clusters"
            )
        want_d1 = max(self.order - 1, 0)
        want_d2 = max(self.order - 2, 0)
        got_d1 = sum(1 for d in self.distances if d == 1)
        got_d2 = sum(1 for d in self.distances if d == 2)
        if (got_d1, got_d2) != (want_d1, want_d2):
            raise ValueError(
                f"order {self.order} cluster needs {want_d1} pairs at d=1 and "
                f"{want_d2} at d=2, got {got_d1} and {got_d2}"
            )


@dataclass(frozen=True)
class SingleBlockAmplitudes:
    """Single-cell tunneling amplitude by the two routes, in hbar*Omega units.

    `variational_exponent` uses the printed small-barrier asymptote
    convention u0^2 * m_eff * Omega / 2, whose ratio to the WKB exponent
    tends to 3/4 as alpha -> -0.5.
    """

    variational_exponent: float
    wkb_exponent: float
    delta_variational: float
    delta_wkb: float


def solve_variational(params: CircuitParams) -> VariationalSolution:
    """Compute zeta(k) and A(d) for an N-cell chain (N >= 2, frustrated)."""
    n = params.n_cells
    if n < 2:
        raise ValueError(f"variational chain solution needs n_cells >= 2, got {n}")
    if not params.frustrated:
        raise ValueError(
            f"alpha = {params.alpha} is outside the frustrated regime (-1, -0.5)"
        )
    cell = single_cell_derived(params)
    a2 = params.abs_alpha
    d_coeff = math.sqrt(params.ej_over_ec * (4.0 * a2 - 1.0 / a2))
    k = np.pi * (np.arange(n) + 0.5) / n
    s = np.sin(k / 2.0)
    zeta = 0.25 * d_coeff * np.sqrt(params.gamma / 2.0 + (2.0 * a2 + 1.0) * s * s) / s
    # A(d) = (pi/2N) sum_j zeta_j cos(pi (j+1/2) d / N); DCT-II gives twice the sum.
    a_table = np.pi / (4.0 * n) * _fft.dct(zeta, type=2)
    return VariationalSolution(
        params=params,
        cell=cell,
        d_coeff=float(d_coeff),
        k_grid=k,
        zeta=zeta,
        a_table=a_table,
    )


def tunneling_amplitude(sol: VariationalSolution, prefactor: float = 1.0) -> float:
    """Single-flip amplitude Delta in hbar*Omega units (0.0 on underflow)."""
    log_delta = math.log(prefactor) - 2.0 * sol.u0_sq * sol.a_table[0]
    return _safe_exp(log_delta)


def wkb_amplitude(params: CircuitParams) -> float:
    """Quasiclassical single-cell amplitude in hbar*Omega units.

    Delta_wkb = (1/2pi) exp(-S) with the barrier action
    S = 2 sqrt(2 m_eff E_J) [sqrt(2|a| - 1/(2|a|)) - arccos(1/(2|a|))/sqrt(2|a|)].
    """
    return single_block_amplitudes(params).delta_wkb


def single_block_amplitudes(params: CircuitParams) -> SingleBlockAmplitudes:
    """Variational and WKB tunneling exponents for one isolated cell."""
    if params.alpha > -0.5:
        raise ValueError(
            f"alpha = {params.alpha} is outside the frustrated regime (-1, -0.5]"
        )
    cell = single_cell_derived(params)
    t = 2.0 * params.abs_alpha
    var_exp = cell.u0 ** 2 * cell.m_eff * cell.omega / 2.0
    action = (
        2.0
        * math.sqrt(2.0 * cell.m_eff * params.ej_over_ec)
        * (math.sqrt(t - 1.0 / t) - math.acos(1.0 / t) / math.sqrt(t))
        if t > 1.0
        else 0.0
    )
    return SingleBlockAmplitudes(
        variational_exponent=float(var_exp),
        wkb_exponent=float(action),
        delta_variational=_safe_exp(-var_exp),
        delta_wkb=_safe_exp(-action) / (2.0 * math.pi),
    )


def _power_law_fit(sol: VariationalSolution, ell0: float | None):
    """Least-squares slope of ln J(d)/J(1) vs ln d on ell0 < d < N/4."""
    n = sol.params.n_cells
    if ell0 is None:
        return None, None, None
    d = np.arange(1, n)
    mask = (d > ell0) & (d < n / 4.0)
    if np.count_nonzero(mask) < 2:
        return None, None, None
    x = np.log(d[mask])
    y = 4.0 * sol.u0_sq * (sol.a_table[1:][mask] - sol.a_table[1])
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid**2)) / ss_tot if ss_tot > 0 else 0.0
    window = (int(math.floor(ell0)) + 1, int(math.ceil(n / 4.0)) - 1)
    return float(-slope), r2, window


def exchange_couplings(sol: VariationalSolution, delta0: float = 1.0,
                       j0: float = 1.0) -> SpinModelParams:
    """Exchange table J(d), tunneling Delta and derived dimensionless data.

    `delta0` and `j0` are the pre-exponential factors in hbar*Omega units;
    delta_tilde = Delta/J(1) is evaluated in log space so it stays finite
    when the individual amplitudes underflow.
    """
    params = sol.params
    u0_sq = sol.u0_sq
    a0 = float(sol.a_table[0])
    kernel = interaction_kernel(params, verify=False)

    log_delta = math.log(delta0) - 2.0 * u0_sq * a0
    log_j = math.log(j0) - 4.0 * u0_sq * (a0 - sol.a_table[1:])
    log_j1 = float(log_j[0])
    with np.errstate(under="ignore"):
        j_rel = np.exp(log_j - log_j1)

    beta_analytic = sol.d_coeff * u0_sq * math.sqrt(params.gamma / 2.0)
    beta_fit, r2, window = _power_law_fit(sol, kernel.ell0)

    return SpinModelParams(
        alpha=params.alpha,
        gamma=params.gamma,
        ej_over_ec=params.ej_over_ec,
        n_cells=params.n_cells,
        u0=sol.cell.u0,
        hbar_omega=sol.cell.omega,
        delta=_safe_exp(log_delta),
        j1=_safe_exp(log_j1),
        j_table=j_rel,
        delta_tilde=_safe_exp(log_delta - log_j1),
        beta_fit=beta_fit,
        beta_analytic=float(beta_analytic),
        ell0=kernel.ell0,
        fit_r_squared=r2,
        fit_window=window,
        no_interaction=kernel.no_interaction,
        log_delta=log_delta,
        log_j1=log_j1,
    )


def higher_order_log_amplitude(spec: HigherOrderAmplitude,
                               sol: VariationalSolution) -> float:
    """ln(J^(n)/J_0^(n)) for a multi-cell flip configuration."""
    if sol.params.n_cells < 3:
        raise ValueError("cluster amplitudes need at least 3 cells for d = 2 pairs")
    a = sol.a_table
    pair_sum = sum(p * a[d] for p, d in zip(spec.parities, spec.distances))
    return float(-4.0 * sol.u0_sq * (spec.order / 2.0 * a[0] + pair_sum))


def _canonical_cluster(order: int, n_odd: int) -> HigherOrderAmplitude:
    """Contiguous cluster whose first `n_odd` nearest-neighbor pairs are odd.

    Per-cell flip signs fix the d = 2 parities: P(i, i+2) = P(i, i+1) * P(i+1, i+2).
    """
    nn = [-1] * n_odd + [1] * (order - 1 - n_odd)
    parities = list(nn)
    distances = [1] * len(nn)
    for i in range(order - 2):
        parities.append(nn[i] * nn[i + 1])
        distances.append(2)
    return HigherOrderAmplitude(order=order, parities=tuple(parities),
                                distances=tuple(distances))


def enumerate_cluster_amplitudes(sol: VariationalSolution, max_order: int = 4):
    """Log-amplitudes of the canonical flip clusters of orders 1 .. max_order.

    For each order n the n parity families o..o, o..e, .., e..e are evaluated
    (odd pairs listed first); order 1 is the single flip.  Returns a list of
    dicts with keys order, label, n_odd, log_amplitude.
    """
    out = [{
        "order": 1,
        "label": "single",
        "n_odd": 0,
        "log_amplitude": -2.0 * sol.u0_sq * float(sol.a_table[0]),
    }]
    for order in range(2, max_order + 1):
        for n_odd in range(order - 1, -1, -1):
            spec = _canonical_cluster(order, n_odd)
            label = "-".join("o" if p == -1 else "e" for p in spec.parities[: order - 1])
            out.append({
                "order": order,
                "label": label,
                "n_odd": n_odd,
                "log_amplitude": higher_order_log_amplitude(spec, sol),
            })
    return out
