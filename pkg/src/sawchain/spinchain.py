"""Dimensionless long-range XX chain in the 2^N computational basis.

Hamiltonian (units of the nearest-neighbor exchange J(1)):

    H = sum_n dt * sx_n + (1/2) sum_{n != m} J(|n-m|)/J(1) [sx_n sx_m + sy_n sy_m]

Basis convention: site i maps to bit i of the state index, bit value 1 means
sigma_z = +1.  In this basis the field term flips one bit with amplitude dt,
and the exchange term swaps anti-aligned bit pairs with amplitude
2 J(d)/J(1) per unordered pair (the 1/2 and the double count cancel;
sx sx + sy sy annihilates aligned pairs).  All matrix elements are real.

The matvec is matrix-free (bit operations), the eigensolver is Lanczos with
full reorthogonalization and a seeded random start vector, and a dense
kron-product constructor doubles as an independent oracle for N <= 10.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import eigh_tridiagonal

__all__ = [
    "ChainSpec",
    "SpinBasis",
    "EigenResult",
    "ConvergenceError",
    "HamiltonianAction",
    "apply_hamiltonian",
    "lowest_two",
    "dense_matrix",
    "full_spectrum",
    "parity_apply",
    "reflect_state",
]

DEFAULT_MAX_SITES = 16
_DENSE_CAP = 10
_DEGENERACY_RTOL = 1e-9


class ConvergenceError(RuntimeError):
    """Eigensolver failed to converge; carries the best residuals reached."""

    def __init__(self, message, residuals=None, iterations=None):
        super().__init__(message)
        self.residuals = residuals
        self.iterations = iterations


@dataclass(frozen=True)
class ChainSpec:
    """Chain length, field strength and coupling law.

    Exactly one of `beta` (power-law exponent, J(d)/J(1) = d**-beta) or
    `j_over_j1` (explicit table for d = 1 .. N-1, first entry 1) is given.
    """

    n_sites: int
    delta_tilde: float
    beta: float | None = None
    j_over_j1: tuple[float, ...] | None = None
    max_sites: int = DEFAULT_MAX_SITES

    def __post_init__(self):
        if int(self.n_sites) != self.n_sites or self.n_sites < 1:
            raise ValueError(f"n_sites must be an integer >= 1, got {self.n_sites}")
        if self.n_sites > self.max_sites:
            raise ValueError(
                f"n_sites = {self.n_sites} exceeds the cap of {self.max_sites}"
            )
        if not math.isfinite(self.delta_tilde):
            raise ValueError("delta_tilde must be finite")
        if (self.beta is None) == (self.j_over_j1 is None):
            raise ValueError("give exactly one of beta or j_over_j1")
        if self.beta is not None and self.beta < 0:
            raise ValueError(f"beta must be >= 0, got {self.beta}")
        if self.j_over_j1 is not None:
            table = tuple(float(x) for x in self.j_over_j1)
            if len(table) != self.n_sites - 1:
                raise ValueError(
                    f"coupling table needs {self.n_sites - 1} entries, got {len(table)}"
                )
            if table and abs(table[0] - 1.0) > 1e-9:
                raise ValueError("coupling table must be normalized to J(1) = 1")
            if any(x <= 0 for x in table):
                raise ValueError("coupling table entries must be positive")
            object.__setattr__(self, "j_over_j1", table)

    @property
    def dimension(self) -> int:
        return 1 << self.n_sites

    def couplings(self) -> np.ndarray:
        """J(d)/J(1) for d = 1 .. N-1."""
        if self.j_over_j1 is not None:
            return np.asarray(self.j_over_j1, dtype=float)
        d = np.arange(1, self.n_sites, dtype=float)
        return d ** (-self.beta)


@dataclass(frozen=True)
class SpinBasis:
    """Computational z-basis of an N-site chain (bit i of the index is site i,
    bit value 1 means sigma_z = +1)."""

    n_sites: int

    @property
    def dimension(self) -> int:
        return 1 << self.n_sites

    def decode(self, index: int) -> np.ndarray:
        """sigma_z eigenvalues (+-1) of basis state `index`."""
        bits = (index >> np.arange(self.n_sites)) & 1
        return 2 * bits - 1

    def encode(self, spins) -> int:
        """Index of the basis state with the given sigma_z values."""
        spins = np.asarray(spins)
        if spins.size != self.n_sites:
            raise ValueError("spin configuration length mismatch")
        bits = (spins > 0).astype(int)
        return int(np.sum(bits << np.arange(self.n_sites)))


class HamiltonianAction:
    """Matrix-free H application with precomputed bit masks per pair."""

    def __init__(self, spec: ChainSpec):
        self.spec = spec
        n = spec.n_sites
        dim = spec.dimension
        idx = np.arange(dim, dtype=np.int64)
        self.flip_index = [idx ^ (1 << i) for i in range(n)]
        j_rel = spec.couplings()
        self.pairs = []
        for i in range(n):
            for j in range(i + 1, n):
                weight = 2.0 * float(j_rel[j - i - 1])
                anti = (((idx >> i) ^ (idx >> j)) & 1).astype(bool)
                self.pairs.append((idx ^ ((1 << i) | (1 << j)), anti, weight))

    def __call__(self, v: np.ndarray) -> np.ndarray:
        spec = self.spec
        v = np.asarray(v, dtype=float)
        if v.shape != (spec.dimension,):
            raise ValueError(
                f"state vector must have shape ({spec.dimension},), got {v.shape}"
            )
        out = np.zeros_like(v)
        dt = spec.delta_tilde
        if dt != 0.0:
            for flipped in self.flip_index:
                out += dt * v[flipped]
        for flipped, anti, weight in self.pairs:
            out += weight * (v[flipped] * anti)
        return out


def apply_hamiltonian(spec: ChainSpec, v: np.ndarray) -> np.ndarray:
    """One-shot H @ v; build a HamiltonianAction for repeated products."""
    return HamiltonianAction(spec)(v)


def parity_apply(v: np.ndarray) -> np.ndarray:
    """Apply the global spin-flip parity operator (product of all sigma_x).

    Flipping every bit maps index s to dim-1-s, so P v is the reversed vector.
    """
    return v[::-1].copy()


def reflect_state(v: np.ndarray, n_sites: int) -> np.ndarray:
    """Relabel sites i -> N-1-i (chain reflection) on a state vector."""
    dim = 1 << n_sites
    if v.shape != (dim,):
        raise ValueError("state dimension does not match n_sites")
    idx = np.arange(dim, dtype=np.int64)
    rev = np.zeros_like(idx)
    for i in range(n_sites):
        rev |= ((idx >> i) & 1) << (n_sites - 1 - i)
    out = np.empty_like(v)
    out[rev] = v
    return out


@dataclass
class EigenResult:
    """Two lowest eigenpairs with convergence diagnostics and parity labels."""

    e0: float
    e1: float
    v0: np.ndarray
    v1: np.ndarray
    parity0: float
    parity1: float
    residuals: tuple[float, float]
    iterations: int
    degenerate: bool = False
    n_sites: int = field(default=0)

    @property
    def gap(self) -> float:
        return 0.0 if self.degenerate else self.e1 - self.e0

    def to_dict(self, include_vectors: bool = False) -> dict:
        out = {
            "eigenvalues": [self.e0, self.e1],
            "residuals": list(self.residuals),
            "parities": [self.parity0, self.parity1],
            "iterations": self.iterations,
            "degenerate": self.degenerate,
            "n_sites": self.n_sites,
        }
        if include_vectors:
            out["v0"] = self.v0.tolist()
            out["v1"] = self.v1.tolist()
        return out

    def save_vectors(self, path_prefix: str) -> tuple[str, str]:
        """Dump both eigenvectors as little-endian float64 with a JSON sidecar.

        Writes <prefix>.bin (v0 then v1, contiguous) and <prefix>.json.
        """
        bin_path = f"{path_prefix}.bin"
        meta_path = f"{path_prefix}.json"
        stacked = np.vstack([self.v0, self.v1]).astype("<f8")
        stacked.tofile(bin_path)
        meta = {
            "dtype": "<f8",
            "byte_order": "little-endian",
            "shape": [2, int(self.v0.size)],
            "order": ["v0", "v1"],
            "n_sites": self.n_sites,
            "encoding": "bit i of the basis index is site i; bit 1 means sigma_z = +1",
            "eigenvalues": [self.e0, self.e1],
        }
        with open(meta_path, "w") as fh:
            json.dump(meta, fh, indent=2)
        return bin_path, meta_path


def _phase_fix(v: np.ndarray) -> np.ndarray:
    k = int(np.argmax(np.abs(v)))
    return -v if v[k] < 0 else v


def lowest_two(spec: ChainSpec, seed: int = 0, tol: float = 1e-11,
               max_iter: int | None = None) -> EigenResult:
    """Converged two lowest eigenpairs of the chain Hamiltonian.

    Lanczos with full reorthogonalization and a seeded random start vector;
    deterministic for fixed seed.  On an invariant-subspace breakdown a fresh
    random direction is injected so degenerate levels are still reached.
    Raises ConvergenceError when the residuals do not drop below `tol` times
    the spectral scale within `max_iter` steps.
    """
    action = HamiltonianAction(spec)
    dim = spec.dimension
    if max_iter is None:
        max_iter = min(dim, 600)
    max_iter = min(max_iter, dim)
    rng = np.random.default_rng(seed)

    vecs = np.empty((min(64, max_iter), dim))
    q = rng.standard_normal(dim)
    q /= np.linalg.norm(q)
    vecs[0] = q
    alphas: list[float] = []
    offs: list[float] = []
    m = 1
    scale = 1.0
    theta = np.zeros(2)
    ritz_bound = np.array([np.inf, np.inf])

    def _reorth(w, rows):
        w -= rows.T @ (rows @ w)
        w -= rows.T @ (rows @ w)
        return w

    while True:
        w = action(vecs[m - 1])
        a = float(vecs[m - 1] @ w)
        alphas.append(a)
        w -= a * vecs[m - 1]
        if m > 1:
            w -= offs[-1] * vecs[m - 2]
        w = _reorth(w, vecs[:m])
        b = float(np.linalg.norm(w))

        # Ritz values and residual bounds from the current tridiagonal block.
        if m >= 2:
            t_vals, t_vecs = eigh_tridiagonal(
                np.asarray(alphas), np.asarray(offs),
                select="i", select_range=(0, 1),
            )
            theta = t_vals
            scale = max(1.0, float(np.max(np.abs(alphas))) + (max(offs) if offs else 0.0))
            ritz_bound = np.abs(b * t_vecs[-1, :2])
            if ritz_bound.max() <= tol * scale:
                break
        if m >= max_iter:
            break

        if b <= 1e-13 * scale:
            # Invariant subspace: inject a fresh random direction.
            w = rng.standard_normal(dim)
            w = _reorth(w, vecs[:m])
            nrm = np.linalg.norm(w)
            if nrm < 1e-8:
                break
            w /= nrm
            b = 0.0
        else:
            w /= b
        offs.append(b)
        if m == vecs.shape[0]:
            grown = np.empty((min(max_iter, 2 * m), dim))
            grown[:m] = vecs
            vecs = grown
        vecs[m] = w
        m += 1

    if m < 2:
        # One-dimensional Krylov space (possible only for dim = 1).
        t_vals = np.array([alphas[0], alphas[0]])
        t_vecs = np.ones((1, 2))
        theta = t_vals
    else:
        t_vals, t_vecs = eigh_tridiagonal(
            np.asarray(alphas), np.asarray(offs), select="i",
            select_range=(0, min(1, m - 1)),
        )
        if t_vals.size == 1:
            t_vals = np.array([t_vals[0], t_vals[0]])
            t_vecs = np.column_stack([t_vecs[:, 0], t_vecs[:, 0]])
        theta = t_vals

    v0 = vecs[:m].T @ t_vecs[:, 0]
    v1 = vecs[:m].T @ t_vecs[:, 1]
    v0 /= np.linalg.norm(v0)
    # Ensure the pair is orthonormal even when the tridiagonal block was defective.
    v1 -= (v0 @ v1) * v0
    nrm1 = np.linalg.norm(v1)
    if nrm1 < 1e-8:
        v1 = rng.standard_normal(dim)
        v1 -= (v0 @ v1) * v0
        nrm1 = np.linalg.norm(v1)
    v1 /= nrm1

    e0, e1 = float(theta[0]), float(theta[1])
    res0 = float(np.linalg.norm(action(v0) - e0 * v0))
    res1 = float(np.linalg.norm(action(v1) - e1 * v1))
    if max(res0, res1) > 100.0 * tol * scale:
        raise ConvergenceError(
            f"Lanczos did not converge after {m} iterations "
            f"(residuals {res0:.2e}, {res1:.2e})",
            residuals=(res0, res1), iterations=m,
        )

    degenerate = abs(e1 - e0) <= _DEGENERACY_RTOL * max(1.0, abs(e0))
    if degenerate:
        # Rotate the degenerate pair to parity eigenvectors for determinism.
        p00 = float(v0 @ parity_apply(v0))
        p01 = float(v0 @ parity_apply(v1))
        p11 = float(v1 @ parity_apply(v1))
        pvals, pvecs = np.linalg.eigh(np.array([[p00, p01], [p01, p11]]))
        order = np.argsort(-pvals)  # parity +1 first
        rot = pvecs[:, order]
        v0, v1 = (v0 * rot[0, 0] + v1 * rot[1, 0],
                  v0 * rot[0, 1] + v1 * rot[1, 1])
        v0 /= np.linalg.norm(v0)
        v1 /= np.linalg.norm(v1)
        res0 = float(np.linalg.norm(action(v0) - e0 * v0))
        res1 = float(np.linalg.norm(action(v1) - e1 * v1))

    v0 = _phase_fix(v0)
    v1 = _phase_fix(v1)
    return EigenResult(
        e0=e0, e1=e1, v0=v0, v1=v1,
        parity0=float(v0 @ parity_apply(v0)),
        parity1=float(v1 @ parity_apply(v1)),
        residuals=(res0, res1),
        iterations=m,
        degenerate=degenerate,
        n_sites=spec.n_sites,
    )


def _embed(n: int, site_ops: dict[int, np.ndarray]) -> np.ndarray:
    """Kron-product embedding; the low kron factor carries the low bits,
    so the chain runs from site n-1 down to site 0."""
    eye2 = np.eye(2)
    out = np.array([[1.0]])
    for site in range(n - 1, -1, -1):
        out = np.kron(out, site_ops.get(site, eye2))
    return out


def dense_matrix(spec: ChainSpec) -> np.ndarray:
    """Dense Hamiltonian assembled from Pauli kron products (N <= 10).

    Independent of the bit-twiddling matvec; serves as the validation oracle.
    """
    n = spec.n_sites
    if n > _DENSE_CAP:
        raise ValueError(f"dense oracle capped at {_DENSE_CAP} sites, got {n}")
    sx = np.array([[0.0, 1.0], [1.0, 0.0]])
    # sigma_y = i * y_r in this basis ordering, so sy x sy = -(y_r x y_r).
    y_r = np.array([[0.0, 1.0], [-1.0, 0.0]])
    dim = spec.dimension
    h = np.zeros((dim, dim))
    for i in range(n):
        h += spec.delta_tilde * _embed(n, {i: sx})
    j_rel = spec.couplings()
    for i in range(n):
        for j in range(i + 1, n):
            w = float(j_rel[j - i - 1])
            h += w * (_embed(n, {i: sx, j: sx}) - _embed(n, {i: y_r, j: y_r}))
    return h


def full_spectrum(spec: ChainSpec) -> np.ndarray:
    """All eigenvalues of the dense oracle, ascending (N <= 10)."""
    return np.linalg.eigvalsh(dense_matrix(spec))
