"""Closed-form circuit quantities of a frustrated saw-tooth Josephson chain.

Each triangular cell holds two 0-junctions (Josephson energy E_J, charging
energy E_C) and one pi-junction (alpha*E_J with alpha < 0).  In the frustrated
regime -1 < alpha < -0.5 the reduced per-cell potential

    U(phi)/E_J = 2 + alpha - 2 cos(phi) - alpha cos(2 phi)

is a double well with minima at phi = +-u0, u0 = arccos(1/(2|alpha|)).
Embedding the pi-junctions in a transmission line with ground capacitance
C_0 = gamma*C couples the cell momenta through the kernel

    Gamma(k) = sin^2(k/2) / (gamma/2 + (1 + 2|alpha|) sin^2(k/2)),

whose real-space decomposition Gamma_d delta_{d0} - Gamma_o exp(-d/ell0)
defines the charge screening length ell0.

Unit conventions used throughout the package: energies in E_C, frequencies
in E_C/hbar, masses in hbar^2/E_C.  The only energy scale that enters any
formula is the ratio E_J/E_C.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "CircuitParams",
    "SingleCellDerived",
    "InteractionKernel",
    "potential_energy",
    "full_potential_energy",
    "single_cell_derived",
    "gamma_of_k",
    "interaction_kernel",
    "kernel_decomposition_deviation",
    "capacitance_matrix",
]

# Maximum cell count for the dense capacitance-matrix helper; anything larger
# should go through the k-space kernel.
_DENSE_CAP = 64


@dataclass(frozen=True)
class CircuitParams:
    """Physical inputs of one chain: frustration ratio, capacitance ratio,
    Josephson-to-charging energy ratio and cell count."""

    alpha: float
    gamma: float
    ej_over_ec: float
    n_cells: int = 1

    def __post_init__(self):
        if not -1.0 < self.alpha < 0.0:
            raise ValueError(
                f"alpha must lie in (-1, 0), got {self.alpha}"
            )
        if self.gamma < 0.0:
            raise ValueError(f"gamma must be >= 0, got {self.gamma}")
        if self.ej_over_ec <= 0.0:
            raise ValueError(
                f"ej_over_ec must be > 0, got {self.ej_over_ec}"
            )
        if int(self.n_cells) != self.n_cells or self.n_cells < 1:
            raise ValueError(f"n_cells must be an integer >= 1, got {self.n_cells}")

    @property
    def abs_alpha(self) -> float:
        return abs(self.alpha)

    @property
    def frustrated(self) -> bool:
        """True iff the per-cell potential is a double well (alpha < -0.5)."""
        return self.alpha < -0.5

    @property
    def frustration(self) -> float:
        """Conventional frustration parameter f, with alpha = 1 - 2f."""
        return (1.0 - self.alpha) / 2.0


@dataclass(frozen=True)
class SingleCellDerived:
    """Per-cell landscape and small-oscillation data.

    u0       minimum position (radians)
    barrier  U(0) - U(u0) in units of E_J
    omega    small-oscillation frequency in units of E_C/hbar
    m_eff    effective mass in units of hbar^2/E_C
    """

    u0: float
    barrier: float
    omega: float
    m_eff: float


@dataclass(frozen=True)
class InteractionKernel:
    """Real-space decomposition of Gamma(k): diagonal weight, off-diagonal
    weight and screening length (None when gamma = 0, no interaction)."""

    gamma_d: float
    gamma_o: float
    ell0: float | None

    @property
    def no_interaction(self) -> bool:
        return self.ell0 is None


def potential_energy(phi, params: CircuitParams):
    """Reduced per-cell potential, summed over cells, in units of E_J.

    `phi` holds one symmetric-mode phase per cell; scalars are accepted.
    """
    phi = np.asarray(phi, dtype=float)
    a = params.alpha
    per_cell = 2.0 + a - 2.0 * np.cos(phi) - a * np.cos(2.0 * phi)
    return float(np.sum(per_cell))


def full_potential_energy(chi0, chi_plus, params: CircuitParams) -> float:
    """Two-phase-per-cell potential of the raw circuit, in units of E_J.

    `chi0` are the N+1 bottom-node phases, `chi_plus` the N top-node phases.
    Kept as a documentation-level evaluator; the reduced symmetric-mode form
    in :func:`potential_energy` is the canonical representation.
    """
    chi0 = np.asarray(chi0, dtype=float)
    chi_plus = np.asarray(chi_plus, dtype=float)
    n = chi_plus.size
    if chi0.size != n + 1:
        raise ValueError("chi0 must have one more entry than chi_plus")
    a = params.alpha
    u = (
        2.0
        + a
        - np.cos(chi_plus - chi0[:-1])
        - np.cos(chi0[1:] - chi_plus)
        - a * np.cos(chi0[:-1] - chi0[1:])
    )
    return float(np.sum(u))


def single_cell_derived(params: CircuitParams) -> SingleCellDerived:
    """Minimum position, barrier height, frequency and mass of one cell.

    Requires the double-well regime alpha <= -0.5 (u0 and the barrier vanish
    at the boundary alpha = -0.5).
    """
    a2 = params.abs_alpha
    if params.alpha > -0.5:
        raise ValueError(
            f"no double well for alpha = {params.alpha} (need alpha <= -0.5)"
        )
    u0 = float(np.arccos(min(1.0, 1.0 / (2.0 * a2))))
    barrier = -(2.0 * (1.0 + params.alpha) + 1.0 / (2.0 * params.alpha))
    curvature = abs(4.0 * params.alpha + 1.0 / a2)
    stiffness = params.gamma + 1.0 + 2.0 * a2
    omega = 2.0 * np.sqrt(params.ej_over_ec * curvature / stiffness)
    m_eff = stiffness / 4.0
    return SingleCellDerived(u0=u0, barrier=float(barrier), omega=float(omega), m_eff=float(m_eff))


def gamma_of_k(k, params: CircuitParams):
    """Non-local kinetic kernel Gamma(k), dimensionless.

    Vanishes at k = 0 for gamma > 0 and saturates at 1/(1 + 2|alpha|); for
    gamma = 0 it is k-independent away from k = 0.
    """
    k = np.asarray(k, dtype=float)
    s2 = np.sin(k / 2.0) ** 2
    denom = params.gamma / 2.0 + (1.0 + 2.0 * params.abs_alpha) * s2
    with np.errstate(invalid="ignore"):
        out = np.where(denom > 0.0, s2 / np.where(denom > 0.0, denom, 1.0), 0.0)
    if out.ndim == 0:
        return float(out)
    return out


def interaction_kernel(params: CircuitParams, verify: bool = True,
                       n_grid: int = 512, tol: float = 1e-6) -> InteractionKernel:
    """Diagonal/off-diagonal kinetic weights and the screening length.

    Closed forms:
        Gamma_d = 1/(2|a|+1) - g / ((2|a|+1) sqrt(g (4|a| + g + 2)))
        Gamma_o =              g / ((2|a|+1) sqrt(g (4|a| + g + 2)))
        ell0    = 1 / |ln((2|a|+1+g - sqrt(g (4|a|+g+2))) / (2|a|+1))|

    With `verify` the decomposition is checked against the inverse DFT of
    Gamma(k) on an `n_grid`-point grid (separations up to n_grid/2, where
    periodic wrap-around is negligible).
    """
    a2 = params.abs_alpha
    g = params.gamma
    base = 1.0 / (2.0 * a2 + 1.0)
    if g == 0.0:
        return InteractionKernel(gamma_d=base, gamma_o=0.0, ell0=None)
    root = np.sqrt(g * (4.0 * a2 + g + 2.0))
    gamma_o = g / ((2.0 * a2 + 1.0) * root)
    gamma_d = base - gamma_o
    ratio = (2.0 * a2 + 1.0 + g - root) / (2.0 * a2 + 1.0)
    ell0 = 1.0 / abs(np.log(ratio))
    kernel = InteractionKernel(gamma_d=float(gamma_d), gamma_o=float(gamma_o), ell0=float(ell0))
    if verify:
        dev = kernel_decomposition_deviation(params, kernel, n_grid)
        if dev > tol:
            raise ArithmeticError(
                f"kernel decomposition check failed: deviation {dev:.3e} > {tol:.1e}"
            )
    return kernel


def kernel_decomposition_deviation(params: CircuitParams,
                                   kernel: InteractionKernel | None = None,
                                   n_grid: int = 512) -> float:
    """Max |inverse-DFT of Gamma(k) - closed-form decomposition| for
    separations d = 0 .. n_grid/2."""
    if kernel is None:
        kernel = interaction_kernel(params, verify=False)
    if kernel.ell0 is None:
        raise ValueError("decomposition check needs gamma > 0")
    k = 2.0 * np.pi * np.arange(n_grid) / n_grid
    coeffs = np.fft.ifft(gamma_of_k(k, params)).real
    d = np.arange(n_grid // 2 + 1)
    closed = -kernel.gamma_o * np.exp(-d / kernel.ell0)
    closed[0] = kernel.gamma_d
    return float(np.max(np.abs(coeffs[: d.size] - closed)))


def capacitance_matrix(params: CircuitParams, n: int | None = None) -> np.ndarray:
    """Dense ground-capacitance matrix C_gamma (test-scale helper, n <= 64).

    Entry (i, j) is 2*gamma*(n - max(i, j)) with 0-based indices; its inverse
    is tridiagonal, which is what makes the k-space kernel local-plus-screened.
    """
    if n is None:
        n = params.n_cells
    if n > _DENSE_CAP:
        raise ValueError(f"dense capacitance matrix capped at n = {_DENSE_CAP}")
    i = np.arange(n)
    return 2.0 * params.gamma * (n - np.maximum.outer(i, i))
