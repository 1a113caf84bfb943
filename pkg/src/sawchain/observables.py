"""Ground-state diagnostics: gap, magnetization, correlators, correlation length.

Conventions:
  * pair correlators use the most centered pair of separation d,
    i = ceil((N - d)/2) in 1-based labels (open boundaries break
    translation invariance, so one representative pair is reported);
  * C_y(0) = 1; the connected C_x subtracts M_x^2 from the same ground state;
  * S(q) = sum_{j=0}^{N-1} |C_y(j)| cos(q j) on the grid q_m = 2 pi m / N,
    and the second-moment correlation length is
    xi = sqrt(S(0)/S(q_1) - 1) / q_1 with q_1 = 2 pi / N.

When the estimator leaves its validity domain (S(q_1) <= 0), xi is reported
as 0 with a flag rather than raising.  On chains this short the estimator
carries a visible finite-size bias for slowly decaying correlations; the
finite-size-scaling analysis only uses crossings of xi/N curves, which is
what Fig.-9-style plots need.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .spinchain import ChainSpec, EigenResult

__all__ = [
    "ObservableSet",
    "CrossingReport",
    "GRID_CSV_COLUMNS",
    "gap_of",
    "centered_pair",
    "pair_correlator_xx",
    "pair_correlator_yy",
    "magnetization_x",
    "correlator_y",
    "correlator_x",
    "structure_factor",
    "correlation_length",
    "observables_for",
    "fss_crossings",
]

GRID_CSV_COLUMNS = (
    "delta_tilde", "beta", "n_sites", "gap", "mx",
    "xi", "xi_over_n", "cy_half", "cx_half",
)


@dataclass(frozen=True)
class ObservableSet:
    """All scalar and table diagnostics for one parameter point."""

    delta_tilde: float
    beta: float | None
    n_sites: int
    gap: float
    mx: float
    cy: np.ndarray          # C_y(d), d = 0 .. N-1 (C_y(0) = 1)
    cx: np.ndarray          # C_x(d), d = 1 .. N-1
    s_of_q: np.ndarray      # S(q_m), m = 0 .. N-1
    xi: float
    xi_over_n: float
    xi_flagged: bool
    cy_half: float
    cx_half: float
    degenerate: bool = False
    parities: tuple[float, float] = (0.0, 0.0)
    residuals: tuple[float, float] = (0.0, 0.0)
    iterations: int = 0
    e0: float = field(default=float("nan"))
    e1: float = field(default=float("nan"))

    @property
    def mx_abs(self) -> float:
        return abs(self.mx)

    def to_dict(self) -> dict:
        return {
            "delta_tilde": self.delta_tilde,
            "beta": self.beta,
            "n_sites": self.n_sites,
            "gap": self.gap,
            "mx": self.mx,
            "mx_abs": self.mx_abs,
            "cy": [float(x) for x in self.cy],
            "cx": [float(x) for x in self.cx],
            "s_of_q": [float(x) for x in self.s_of_q],
            "xi": self.xi,
            "xi_over_n": self.xi_over_n,
            "xi_flagged": self.xi_flagged,
            "cy_half": self.cy_half,
            "cx_half": self.cx_half,
            "degenerate": self.degenerate,
            "parities": list(self.parities),
            "residuals": list(self.residuals),
            "iterations": self.iterations,
            "eigenvalues": [self.e0, self.e1],
        }

    def csv_row(self) -> str:
        vals = (self.delta_tilde, self.beta if self.beta is not None else float("nan"),
                self.n_sites, self.gap, self.mx, self.xi, self.xi_over_n,
                self.cy_half, self.cx_half)
        return ",".join(_fmt(v) for v in vals)


def _fmt(x) -> str:
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return repr(float(x))


def gap_of(eig: EigenResult) -> float:
    """Dimensionless gap e1 - e0, clamped to 0 inside the degeneracy tolerance."""
    return 0.0 if eig.degenerate else max(0.0, eig.e1 - eig.e0)


def centered_pair(n: int, d: int) -> tuple[int, int]:
    """0-based (i, j) of the most centered pair with separation d."""
    if not 1 <= d <= n - 1:
        raise ValueError(f"separation must lie in 1 .. {n - 1}, got {d}")
    i = math.ceil((n - d) / 2) - 1
    return i, i + d


def _pair_arrays(n: int, i: int, j: int):
    idx = np.arange(1 << n, dtype=np.int64)
    flipped = idx ^ ((1 << i) | (1 << j))
    anti = (((idx >> i) ^ (idx >> j)) & 1).astype(bool)
    return flipped, anti


def pair_correlator_xx(v: np.ndarray, n: int, i: int, j: int) -> float:
    """<sx_i sx_j> in state v (flips both bits, sign +1)."""
    flipped, _ = _pair_arrays(n, i, j)
    return float(v @ v[flipped])


def pair_correlator_yy(v: np.ndarray, n: int, i: int, j: int) -> float:
    """<sy_i sy_j> in state v (flips both bits, +1 anti-aligned, -1 aligned)."""
    flipped, anti = _pair_arrays(n, i, j)
    sign = np.where(anti, 1.0, -1.0)
    return float(v @ (sign * v[flipped]))


def magnetization_x(v: np.ndarray, n: int) -> float:
    """M_x = (1/N) <sum_i sx_i>."""
    idx = np.arange(1 << n, dtype=np.int64)
    total = 0.0
    for i in range(n):
        total += float(v @ v[idx ^ (1 << i)])
    return total / n


def correlator_y(eig: EigenResult, d: int) -> float:
    """C_y(d) on the centered pair of the ground state."""
    i, j = centered_pair(eig.n_sites, d)
    return pair_correlator_yy(eig.v0, eig.n_sites, i, j)


def correlator_x(eig: EigenResult, d: int, mx: float | None = None) -> float:
    """Connected C_x(d) = <sx_i sx_j> - M_x^2 on the centered pair."""
    i, j = centered_pair(eig.n_sites, d)
    if mx is None:
        mx = magnetization_x(eig.v0, eig.n_sites)
    return pair_correlator_xx(eig.v0, eig.n_sites, i, j) - mx * mx


def structure_factor(cy: np.ndarray, n: int, q) -> np.ndarray | float:
    """S(q) = sum_{j=0}^{N-1} |C(j)| cos(q j)."""
    cy = np.asarray(cy, dtype=float)
    if cy.shape != (n,):
        raise ValueError(f"need a correlation table of length {n}")
    q = np.asarray(q, dtype=float)
    j = np.arange(n)
    out = np.cos(np.multiply.outer(q, j)) @ np.abs(cy)
    return float(out) if out.ndim == 0 else out


def correlation_length(cy: np.ndarray, n: int) -> tuple[float, bool]:
    """Second-moment correlation length from the |C_y| structure factor.

    Returns (xi, flagged); flagged means S(q_1) <= 0 or S(0) < S(q_1), where
    the estimator is not applicable and xi is reported as 0.
    """
    q1 = 2.0 * np.pi / n
    s0 = structure_factor(cy, n, 0.0)
    s1 = structure_factor(cy, n, q1)
    if s1 <= 0.0 or s0 < s1:
        return 0.0, True
    return float(np.sqrt(s0 / s1 - 1.0) / q1), False


def observables_for(spec: ChainSpec, eig: EigenResult) -> ObservableSet:
    """Full diagnostic set from a converged eigenpair."""
    n = spec.n_sites
    v0 = eig.v0
    mx = magnetization_x(v0, n)
    cy = np.ones(n)
    cx = np.zeros(max(n - 1, 0))
    for d in range(1, n):
        i, j = centered_pair(n, d)
        cy[d] = pair_correlator_yy(v0, n, i, j)
        cx[d - 1] = pair_correlator_xx(v0, n, i, j) - mx * mx
    q_grid = 2.0 * np.pi * np.arange(n) / n
    s_of_q = structure_factor(cy, n, q_grid)
    xi, flagged = correlation_length(cy, n)
    d_half = max(1, n // 2 - 1) if n >= 2 else 0
    return ObservableSet(
        delta_tilde=spec.delta_tilde,
        beta=spec.beta,
        n_sites=n,
        gap=gap_of(eig),
        mx=mx,
        cy=cy,
        cx=cx,
        s_of_q=np.atleast_1d(s_of_q),
        xi=xi,
        xi_over_n=xi / n,
        xi_flagged=flagged,
        cy_half=float(cy[d_half]) if d_half >= 1 else float("nan"),
        cx_half=float(cx[d_half - 1]) if d_half >= 1 else float("nan"),
        degenerate=eig.degenerate,
        parities=(eig.parity0, eig.parity1),
        residuals=eig.residuals,
        iterations=eig.iterations,
        e0=eig.e0,
        e1=eig.e1,
    )


@dataclass(frozen=True)
class CrossingReport:
    """Pairwise crossings of xi/N curves and the single-point verdict.

    For each adjacent chain-length pair the rightmost sign change of the
    linearly interpolated difference is taken as the crossing.  A common
    point requires every pair to cross and the crossing spread (max - min)
    to stay below `threshold`.
    """

    pairs: tuple[tuple[int, int], ...]
    crossings: tuple[float | None, ...]
    all_crossings: tuple[tuple[float, ...], ...]
    dispersion: float | None
    center: float | None
    common_point: bool
    degenerate_input: bool
    threshold: float

    def to_dict(self) -> dict:
        return {
            "pairs": [list(p) for p in self.pairs],
            "crossings": list(self.crossings),
            "all_crossings": [list(c) for c in self.all_crossings],
            "dispersion": self.dispersion,
            "center": self.center,
            "common_point": self.common_point,
            "degenerate_input": self.degenerate_input,
            "threshold": self.threshold,
        }


def _pair_crossings(grid, ya, yb):
    diff = ya - yb
    out = []
    for i in range(grid.size - 1):
        a, b = diff[i], diff[i + 1]
        if a == 0.0:
            out.append(float(grid[i]))
        elif a * b < 0.0:
            t = a / (a - b)
            out.append(float(grid[i] + t * (grid[i + 1] - grid[i])))
    if diff[-1] == 0.0:
        out.append(float(grid[-1]))
    return out


def fss_crossings(curves: dict[int, tuple[np.ndarray, np.ndarray]],
                  threshold: float = 0.3) -> CrossingReport:
    """Finite-size-scaling crossing analysis of xi/N curves.

    `curves` maps chain length N to (delta_tilde grid, xi/N values); all
    grids must be identical and at least two lengths are required.
    """
    if len(curves) < 2:
        raise ValueError("need curves for at least two chain lengths")
    ns = sorted(curves)
    grid0 = np.asarray(curves[ns[0]][0], dtype=float)
    data = {}
    for n in ns:
        g, y = curves[n]
        g = np.asarray(g, dtype=float)
        y = np.asarray(y, dtype=float)
        if g.shape != grid0.shape or not np.array_equal(g, grid0):
            raise ValueError("all curves must share one delta_tilde grid")
        if y.shape != g.shape:
            raise ValueError("grid and values must have equal length")
        data[n] = y

    pairs, picked, all_cr = [], [], []
    degenerate = False
    for a, b in zip(ns, ns[1:]):
        pairs.append((a, b))
        if np.array_equal(data[a], data[b]):
            degenerate = True
            all_cr.append(tuple(float(g) for g in grid0))
            picked.append(float(grid0[-1]))
            continue
        cr = _pair_crossings(grid0, data[a], data[b])
        all_cr.append(tuple(cr))
        picked.append(cr[-1] if cr else None)

    have_all = all(c is not None for c in picked)
    dispersion = center = None
    if have_all and picked:
        vals = [c for c in picked if c is not None]
        dispersion = max(vals) - min(vals)
        center = sum(vals) / len(vals)
    common = bool(have_all and not degenerate and dispersion is not None
                  and dispersion <= threshold)
    return CrossingReport(
        pairs=tuple(pairs),
        crossings=tuple(picked),
        all_crossings=tuple(all_cr),
        dispersion=dispersion,
        center=center,
        common_point=common,
        degenerate_input=degenerate,
        threshold=threshold,
    )
