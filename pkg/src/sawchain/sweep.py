"""Parameter-grid sweeps with checkpointing and deterministic output.

A sweep evaluates one diagonalization per (delta_tilde, beta, N) grid point,
writes every point as its own JSON file (write to temp, then rename, so a
killed run never leaves a truncated record), and keeps a manifest with
content hashes.  Re-running with resume=True skips points whose files match
the manifest.  Rows are sorted by (beta, delta_tilde, N) at write time, so
grid.csv is bit-identical for any worker count.

Two kernel modes:
  * "powerlaw": J(d)/J(1) = d**-beta with beta taken from the grid axis
    (the idealized model behind the phase-diagram figures);
  * "table": the exact exchange table derived from a circuit parameter
    point, with the fitted and analytic decay exponents kept as metadata.
"""

from __future__ import annotations

import hashlib
import json
import os
import zlib
from concurrent.futures import ProcessPoolExecutor, as_completed
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .circuit import CircuitParams
from .observables import GRID_CSV_COLUMNS, observables_for
from .spinchain import ChainSpec, ConvergenceError, lowest_two
from .variational import SpinModelParams, exchange_couplings, solve_variational

__all__ = [
    "SweepPlan",
    "run_sweep",
    "derive_chain_from_circuit",
    "default_delta_grid",
    "default_beta_grid",
    "WORKERS_ENV_VAR",
]

WORKERS_ENV_VAR = "SAWCHAIN_WORKERS"
DEFAULT_MAX_ABS_DELTA = 15.0


def default_delta_grid() -> np.ndarray:
    """121 points over delta_tilde in [-15, 15]."""
    return np.linspace(-15.0, 15.0, 121)


def default_beta_grid() -> np.ndarray:
    """50 points over beta in (0, 5]."""
    return np.round(np.arange(1, 51) * 0.1, 10)


@dataclass
class SweepPlan:
    """Grid axes, kernel mode and output location of one sweep."""

    delta_values: np.ndarray
    n_list: tuple[int, ...]
    beta_values: np.ndarray | None = None
    circuit: CircuitParams | None = None
    kernel: str = "powerlaw"
    out_dir: Path = Path("out/sweep")
    resume: bool = False
    workers: int | None = None
    seed: int = 7
    max_abs_delta: float = DEFAULT_MAX_ABS_DELTA
    max_sites: int = 16

    def __post_init__(self):
        self.delta_values = np.asarray(self.delta_values, dtype=float)
        self.out_dir = Path(self.out_dir)
        self.n_list = tuple(int(n) for n in self.n_list)
        if self.delta_values.size == 0:
            raise ValueError("delta grid is empty")
        if not self.n_list:
            raise ValueError("n_list is empty")
        if np.max(np.abs(self.delta_values)) > self.max_abs_delta:
            raise ValueError(
                f"|delta_tilde| exceeds the configured bound {self.max_abs_delta}"
            )
        if self.kernel not in ("powerlaw", "table"):
            raise ValueError(f"unknown kernel mode {self.kernel!r}")
        if self.kernel == "powerlaw":
            if self.beta_values is None:
                raise ValueError("powerlaw sweeps need a beta grid")
            self.beta_values = np.asarray(self.beta_values, dtype=float)
            if self.beta_values.size == 0:
                raise ValueError("beta grid is empty")
            if np.any(self.beta_values < 0):
                raise ValueError("beta values must be >= 0")
        else:
            if self.circuit is None:
                raise ValueError("table sweeps need circuit parameters")

    def effective_workers(self) -> int:
        if self.workers is not None:
            return max(1, int(self.workers))
        env = os.environ.get(WORKERS_ENV_VAR)
        if env:
            return max(1, int(env))
        return max(1, os.cpu_count() or 1)


def derive_chain_from_circuit(params: CircuitParams, delta0: float = 1.0,
                              j0: float = 1.0, n_sites: int | None = None,
                              max_sites: int = 16) -> tuple[ChainSpec, SpinModelParams]:
    """Map a circuit point onto a ChainSpec with the exact exchange table.

    delta_tilde and the J(d)/J(1) table come from the variational solution;
    the fitted and analytic decay exponents ride along in the returned
    SpinModelParams.  Raises for gamma = 0, where there is no inter-cell
    coupling and the chain reduces to independent cells.
    """
    model = exchange_couplings(solve_variational(params), delta0=delta0, j0=j0)
    if model.no_interaction:
        raise ValueError(
            "gamma = 0 gives no inter-cell interaction; the chain reduces "
            "to independent cells and has no exchange-coupled spin model"
        )
    n = params.n_cells if n_sites is None else int(n_sites)
    if n > params.n_cells:
        raise ValueError("n_sites cannot exceed the circuit cell count")
    table = tuple(float(x) for x in model.j_table[: n - 1])
    spec = ChainSpec(n_sites=n, delta_tilde=model.delta_tilde,
                     j_over_j1=table, max_sites=max_sites)
    return spec, model


def _point_key(delta: float, beta: float | None, n: int) -> str:
    b = "table" if beta is None else f"{beta:.10g}"
    return f"n{n}_b{b}_d{delta:.10g}"


def _point_seed(key: str, base_seed: int) -> int:
    return (zlib.crc32(key.encode()) ^ (base_seed * 0x9E3779B1)) & 0x7FFFFFFF


def _evaluate_point(args: dict) -> dict:
    """Worker body: diagonalize one grid point and package the results."""
    key = args["key"]
    spec = ChainSpec(
        n_sites=args["n"],
        delta_tilde=args["delta"],
        beta=args.get("beta"),
        j_over_j1=args.get("table"),
        max_sites=args.get("max_sites", 16),
    )
    try:
        eig = lowest_two(spec, seed=args["seed"])
    except ConvergenceError as exc:
        return {"key": key, "status": "failed", "error": str(exc),
                "delta_tilde": args["delta"], "beta": args.get("beta_label"),
                "n_sites": args["n"]}
    obs = observables_for(spec, eig)
    record = obs.to_dict()
    if args.get("beta_label") is not None:
        record["beta"] = args["beta_label"]
    record["key"] = key
    record["status"] = "completed"
    return record


def _atomic_write(path: Path, text: str):
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(text)
    os.replace(tmp, path)


def _record_bytes(record: dict) -> str:
    return json.dumps(record, sort_keys=True, indent=1)


def _load_resumable(manifest_path: Path, points_dir: Path) -> dict:
    """Keys of previously completed points whose files still match the manifest."""
    done = {}
    if not manifest_path.exists():
        return done
    try:
        manifest = json.loads(manifest_path.read_text())
    except (json.JSONDecodeError, OSError):
        return done
    for key, entry in manifest.get("points", {}).items():
        if entry.get("status") != "completed":
            continue
        path = points_dir / f"{key}.json"
        if not path.exists():
            continue
        text = path.read_text()
        if hashlib.sha256(text.encode()).hexdigest() == entry.get("sha256"):
            done[key] = json.loads(text)
    return done


def run_sweep(plan: SweepPlan, progress=None) -> dict:
    """Execute a sweep plan; returns the manifest dictionary.

    Completed points are skipped when `plan.resume` is set.  Individual
    point failures (non-convergence) are recorded in the manifest and do
    not abort the sweep.  `progress`, if given, is called with
    (done_count, total_count) after every finished point.
    """
    out_dir = plan.out_dir
    tables_dir = out_dir / "tables"
    points_dir = tables_dir / "points"
    points_dir.mkdir(parents=True, exist_ok=True)
    manifest_path = out_dir / "manifest.json"

    table = None
    table_meta = None
    if plan.kernel == "table":
        # One derived exchange table per chain length.
        table = {}
        table_meta = {}
        for n in plan.n_list:
            circ = CircuitParams(
                alpha=plan.circuit.alpha, gamma=plan.circuit.gamma,
                ej_over_ec=plan.circuit.ej_over_ec, n_cells=n,
            )
            spec, model = derive_chain_from_circuit(circ, max_sites=plan.max_sites)
            table[n] = spec.j_over_j1
            table_meta[n] = {
                "beta_fit": model.beta_fit,
                "beta_analytic": model.beta_analytic,
                "delta_tilde_derived": model.delta_tilde,
                "ell0": model.ell0,
            }

    jobs = []
    betas = [None] if plan.kernel == "table" else list(plan.beta_values)
    for n in plan.n_list:
        for beta in betas:
            for delta in plan.delta_values:
                if plan.kernel == "table":
                    beta_label = table_meta[n]["beta_fit"]
                    key = _point_key(float(delta), None, n)
                    job = {"key": key, "n": n, "delta": float(delta),
                           "table": table[n], "beta_label": beta_label,
                           "max_sites": plan.max_sites}
                else:
                    key = _point_key(float(delta), float(beta), n)
                    job = {"key": key, "n": n, "delta": float(delta),
                           "beta": float(beta), "beta_label": float(beta),
                           "max_sites": plan.max_sites}
                job["seed"] = _point_seed(key, plan.seed)
                jobs.append(job)

    done = _load_resumable(manifest_path, points_dir) if plan.resume else {}
    pending = [job for job in jobs if job["key"] not in done]
    results = dict(done)
    total = len(jobs)
    finished = len(done)
    executed = 0

    def _store(record: dict):
        nonlocal finished, executed
        key = record["key"]
        _atomic_write(points_dir / f"{key}.json", _record_bytes(record))
        results[key] = record
        finished += 1
        executed += 1
        if progress is not None:
            progress(finished, total)

    workers = plan.effective_workers()
    if workers == 1 or len(pending) <= 1:
        for job in pending:
            _store(_evaluate_point(job))
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(_evaluate_point, job) for job in pending]
            for fut in as_completed(futures):
                _store(fut.result())

    manifest = _write_outputs(plan, jobs, results, table_meta,
                              manifest_path, tables_dir, executed)
    return manifest


def _sort_key(record: dict):
    beta = record.get("beta")
    return (
        float("inf") if beta is None else float(beta),
        float(record.get("delta_tilde", 0.0)),
        int(record.get("n_sites", 0)),
    )


def _write_outputs(plan, jobs, results, table_meta, manifest_path, tables_dir,
                   executed) -> dict:
    ordered = sorted(results.values(), key=_sort_key)

    grid_lines = [",".join(GRID_CSV_COLUMNS)]
    corr_lines = ["delta_tilde,beta,n_sites,kind,index,value"]
    from .observables import _fmt  # shared float formatting

    for rec in ordered:
        if rec.get("status") != "completed":
            continue
        beta = rec.get("beta")
        beta_val = float("nan") if beta is None else float(beta)
        head = (_fmt(float(rec["delta_tilde"])), _fmt(beta_val), str(rec["n_sites"]))
        grid_lines.append(",".join(
            head[:3] + tuple(_fmt(float(rec[c])) for c in
                             ("gap", "mx", "xi", "xi_over_n", "cy_half", "cx_half"))
        ))
        for kind, series, start in (("cy", rec["cy"], 0),
                                    ("cx", rec["cx"], 1),
                                    ("sq", rec["s_of_q"], 0)):
            for offset, value in enumerate(series):
                corr_lines.append(",".join(
                    head + (kind, str(start + offset), _fmt(float(value)))
                ))

    _atomic_write(plan.out_dir / "grid.csv", "\n".join(grid_lines) + "\n")
    _atomic_write(tables_dir / "correlations.csv", "\n".join(corr_lines) + "\n")

    points_entry = {}
    for job in jobs:
        key = job["key"]
        rec = results.get(key)
        if rec is None:
            points_entry[key] = {"status": "missing"}
            continue
        entry = {
            "status": rec["status"],
            "delta_tilde": rec.get("delta_tilde"),
            "beta": rec.get("beta"),
            "n_sites": rec.get("n_sites"),
            "file": f"tables/points/{key}.json",
            "sha256": hashlib.sha256(_record_bytes(rec).encode()).hexdigest(),
        }
        if rec["status"] == "failed":
            entry["error"] = rec.get("error")
        points_entry[key] = entry

    manifest = {
        "schema": 1,
        "kernel": plan.kernel,
        "n_list": list(plan.n_list),
        "delta_values": [float(x) for x in plan.delta_values],
        "beta_values": (None if plan.beta_values is None
                        else [float(x) for x in plan.beta_values]),
        "seed": plan.seed,
        "total_points": len(jobs),
        "completed_points": sum(
            1 for e in points_entry.values() if e["status"] == "completed"),
        "failed_points": sum(
            1 for e in points_entry.values() if e["status"] == "failed"),
        "executed_this_run": executed,
        "table_metadata": table_meta,
        "points": dict(sorted(points_entry.items())),
    }
    _atomic_write(manifest_path, json.dumps(manifest, indent=2, sort_keys=True))
    return manifest
