"""Command-line interface.

Subcommands:
  single-cell   landscape, frequency and tunneling amplitudes of one cell
  map           circuit -> spin-model mapping (exchange table, Delta, beta)
  ed            diagonalize one (delta_tilde, beta, N) point
  sweep         grid sweep with checkpointing, CSV output and heat maps
  fss           finite-size-scaling crossing study of xi/N curves
  appendix      multi-cell flip amplitudes of orders 1..4

Exit codes: 0 success, 1 validation error, 2 numerical failure.  Figures are
rendered with matplotlib to SVG files next to the delimited output; pass
--no-plot to skip them.  Flags may also be supplied through a JSON config
file (--config); explicit flags win.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .circuit import CircuitParams, interaction_kernel, single_cell_derived
from .observables import GRID_CSV_COLUMNS, fss_crossings, observables_for
from .spinchain import ChainSpec, ConvergenceError, lowest_two
from .sweep import (SweepPlan, default_beta_grid, default_delta_grid,
                    derive_chain_from_circuit, run_sweep)
from .variational import (enumerate_cluster_amplitudes, exchange_couplings,
                          single_block_amplitudes, solve_variational)

PROG = "sawchain"


class _Parser(argparse.ArgumentParser):
    """argparse with validation-style exit code 1 on usage errors."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _parse_range(text: str) -> np.ndarray:
    """Parse 'start:stop:step' into an inclusive grid."""
    parts = text.split(":")
    if len(parts) != 3:
        raise ValueError(f"range must look like start:stop:step, got {text!r}")
    start, stop, step = (float(p) for p in parts)
    if step <= 0:
        raise ValueError("range step must be positive")
    count = int(round((stop - start) / step))
    grid = start + step * np.arange(count + 1)
    return grid[grid <= stop + 1e-12 * max(1.0, abs(stop))]


def _parse_int_list(text: str) -> tuple[int, ...]:
    items = [p for p in text.replace(" ", "").split(",") if p]
    if not items:
        raise ValueError("empty list")
    return tuple(int(p) for p in items)


def _apply_config(args: argparse.Namespace):
    """Fill in values from the JSON config file for flags left at default."""
    if not getattr(args, "config", None):
        return
    subparser = args._subparser
    with open(args.config) as fh:
        payload = json.load(fh)
    if not isinstance(payload, dict):
        raise ValueError("config file must hold a JSON object")
    for raw_key, value in payload.items():
        key = raw_key.replace("-", "_")
        if not hasattr(args, key) or key.startswith("_") or key in ("func", "command"):
            raise ValueError(f"unknown config key {raw_key!r}")
        if isinstance(value, list):
            value = tuple(value)
        if getattr(args, key) == subparser.get_default(key):
            setattr(args, key, value)


def _out_dir(args) -> Path:
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _emit(payload: dict, args, filename: str):
    text = json.dumps(payload, indent=2)
    print(text)
    if getattr(args, "out_dir", None):
        (_out_dir(args) / filename).write_text(text + "\n")


def _require(args, *names):
    for name in names:
        if getattr(args, name) is None:
            raise ValueError(f"--{name.replace('_', '-')} is required")


def _circuit_from(args, n=None) -> CircuitParams:
    return CircuitParams(alpha=args.alpha, gamma=args.gamma,
                         ej_over_ec=args.ej_ec,
                         n_cells=int(n if n is not None else args.n))


# ----------------------------------------------------------------- commands

def cmd_single_cell(args) -> int:
    _require(args, "alpha", "gamma", "ej_ec")
    params = _circuit_from(args, n=1)
    cell = single_cell_derived(params)
    amps = single_block_amplitudes(params)
    kernel = interaction_kernel(params, verify=False)
    _emit({
        "alpha": params.alpha,
        "gamma": params.gamma,
        "ej_over_ec": params.ej_over_ec,
        "frustrated": params.frustrated,
        "u0": cell.u0,
        "barrier_over_ej": cell.barrier,
        "hbar_omega": cell.omega,
        "m_eff": cell.m_eff,
        "gamma_d": kernel.gamma_d,
        "gamma_o": kernel.gamma_o,
        "ell0": kernel.ell0,
        "variational_exponent": amps.variational_exponent,
        "wkb_exponent": amps.wkb_exponent,
        "delta_variational": amps.delta_variational,
        "delta_wkb": amps.delta_wkb,
    }, args, "single_cell.json")
    return 0


def cmd_map(args) -> int:
    _require(args, "alpha", "gamma", "ej_ec", "n")
    params = _circuit_from(args)
    model = exchange_couplings(solve_variational(params),
                               delta0=args.delta0, j0=args.j0)
    _emit(model.to_dict(), args, "spin_model.json")
    if args.plot:
        from . import plotting
        out = _out_dir(args)
        plotting.plot_exchange_decay(model, out / "map_j_decay.svg")
        ns = np.unique(np.round(np.geomspace(4, params.n_cells,
                                             min(24, params.n_cells))).astype(int))
        ns = ns[ns >= 2]
        log_delta, log_j1 = [], []
        for n in ns:
            sub = CircuitParams(alpha=params.alpha, gamma=params.gamma,
                                ej_over_ec=params.ej_over_ec, n_cells=int(n))
            m = exchange_couplings(solve_variational(sub),
                                   delta0=args.delta0, j0=args.j0)
            log_delta.append(m.log_delta)
            log_j1.append(m.log_j1)
        plotting.plot_tunneling_vs_length(ns, log_delta, log_j1,
                                          out / "map_tunneling_vs_n.svg")
    return 0


def cmd_ed(args) -> int:
    _require(args, "n", "delta_tilde", "beta")
    spec = ChainSpec(n_sites=args.n, delta_tilde=args.delta_tilde,
                     beta=args.beta, max_sites=args.max_sites)
    eig = lowest_two(spec, seed=args.seed, max_iter=args.max_iter)
    obs = observables_for(spec, eig)
    if args.format == "csv":
        print(",".join(GRID_CSV_COLUMNS))
        print(obs.csv_row())
        if getattr(args, "out_dir", None):
            (_out_dir(args) / "point.csv").write_text(
                ",".join(GRID_CSV_COLUMNS) + "\n" + obs.csv_row() + "\n")
    else:
        _emit(obs.to_dict(), args, "point.json")
    if args.dump_vectors:
        prefix = str(_out_dir(args) / "eigenvectors")
        eig.save_vectors(prefix)
    return 0


def _load_grid_csv(path: Path):
    rows = []
    with open(path) as fh:
        header = fh.readline().strip().split(",")
        for line in fh:
            parts = line.strip().split(",")
            if parts and parts[0]:
                rows.append(dict(zip(header, parts)))
    return rows


def cmd_sweep(args) -> int:
    if args.kernel == "table":
        circuit = _circuit_from(args, n=max(args.n_list))
        beta_values = None
    else:
        circuit = None
        beta_values = (_parse_range(args.beta_range) if args.beta_range
                       else default_beta_grid())
        beta_values = beta_values[beta_values > 0]
    delta_values = (_parse_range(args.delta_range) if args.delta_range
                    else default_delta_grid())
    plan = SweepPlan(
        delta_values=delta_values,
        beta_values=beta_values,
        n_list=args.n_list,
        circuit=circuit,
        kernel=args.kernel,
        out_dir=Path(args.out_dir),
        resume=args.resume,
        workers=args.workers,
        seed=args.seed,
        max_sites=args.max_sites,
    )
    progress = None
    if args.verbose:
        def progress(done, total):
            print(f"\r{done}/{total} points", end="", file=sys.stderr)
    manifest = run_sweep(plan, progress=progress)
    if args.verbose:
        print(file=sys.stderr)
    print(json.dumps({
        "out_dir": str(plan.out_dir),
        "total_points": manifest["total_points"],
        "completed_points": manifest["completed_points"],
        "failed_points": manifest["failed_points"],
        "executed_this_run": manifest["executed_this_run"],
    }, indent=2))

    if args.plot and plan.kernel == "powerlaw" and beta_values.size >= 2 \
            and len(args.n_list) == 1:
        from . import plotting
        rows = _load_grid_csv(plan.out_dir / "grid.csv")
        betas = np.array(sorted({float(r["beta"]) for r in rows}))
        deltas = np.array(sorted({float(r["delta_tilde"]) for r in rows}))
        for column, name in (("gap", "heatmap_gap.svg"),
                             ("cy_half", "heatmap_cy.svg")):
            z = np.full((betas.size, deltas.size), np.nan)
            bi = {b: i for i, b in enumerate(betas)}
            di = {d: i for i, d in enumerate(deltas)}
            for r in rows:
                z[bi[float(r["beta"])], di[float(r["delta_tilde"])]] = float(r[column])
            plotting.plot_heatmap(deltas, betas, z, column,
                                  plan.out_dir / name)
    return 0


def cmd_fss(args) -> int:
    _require(args, "beta", "n_list", "delta_range")
    if len(args.n_list) < 2:
        raise ValueError("fss needs at least two chain lengths")
    delta_values = _parse_range(args.delta_range)
    plan = SweepPlan(
        delta_values=delta_values,
        beta_values=np.array([args.beta]),
        n_list=args.n_list,
        kernel="powerlaw",
        out_dir=Path(args.out_dir),
        resume=args.resume,
        workers=args.workers,
        seed=args.seed,
        max_sites=args.max_sites,
    )
    manifest = run_sweep(plan)
    rows = _load_grid_csv(plan.out_dir / "grid.csv")
    curves = {}
    for n in args.n_list:
        sub = sorted((float(r["delta_tilde"]), float(r["xi_over_n"]))
                     for r in rows if int(r["n_sites"]) == n)
        grid = np.array([d for d, _ in sub])
        vals = np.array([x for _, x in sub])
        curves[n] = (grid, vals)
    report = fss_crossings(curves, threshold=args.threshold)

    out = _out_dir(args)
    lines = ["delta_tilde,beta,n_sites,xi,xi_over_n"]
    for r in sorted(rows, key=lambda r: (int(r["n_sites"]), float(r["delta_tilde"]))):
        lines.append(",".join((r["delta_tilde"], r["beta"], r["n_sites"],
                               r["xi"], r["xi_over_n"])))
    (out / "fss.csv").write_text("\n".join(lines) + "\n")
    payload = report.to_dict()
    payload["status"] = ("common crossing" if report.common_point
                         else "no common crossing")
    _emit(payload, args, "fss_report.json")
    if args.plot:
        from . import plotting
        plotting.plot_fss_curves(curves, report, out / "fss.svg")
    if manifest["failed_points"]:
        return 2
    return 0


def cmd_appendix(args) -> int:
    _require(args, "alpha", "gamma", "ej_ec")
    records_by_n = {}
    for n in args.n_list:
        params = _circuit_from(args, n=n)
        sol = solve_variational(params)
        records_by_n[n] = enumerate_cluster_amplitudes(sol, max_order=4)
    n_ref = args.n_ref if args.n_ref in records_by_n else max(records_by_n)
    ordered = sorted(records_by_n[n_ref], key=lambda r: -r["log_amplitude"])
    _emit({
        "alpha": args.alpha,
        "gamma": args.gamma,
        "ej_over_ec": args.ej_ec,
        "n_ref": n_ref,
        "amplitudes_sorted": ordered,
    }, args, "appendix_amplitudes.json")

    out = _out_dir(args)
    lines = ["n,order,label,n_odd,log_amplitude"]
    for n in args.n_list:
        for rec in records_by_n[n]:
            lines.append(f"{n},{rec['order']},{rec['label']},{rec['n_odd']},"
                         f"{rec['log_amplitude']!r}")
    (out / "appendix_amplitudes.csv").write_text("\n".join(lines) + "\n")
    if args.plot and len(args.n_list) >= 2:
        from . import plotting
        plotting.plot_amplitude_orders(sorted(records_by_n), records_by_n,
                                       out / "appendix_orders.svg")
    return 0


# ------------------------------------------------------------------- parser

def _add_common(p, out_default):
    p.add_argument("--out-dir", default=out_default,
                   help="output directory (default %(default)s)")
    p.add_argument("--config", default=None,
                   help="JSON config file; explicit flags win")
    p.add_argument("--no-plot", dest="plot", action="store_false",
                   help="skip SVG figure output")
    p.add_argument("--verbose", "-v", action="store_true")


def _add_circuit_flags(p, with_n=True):
    p.add_argument("--alpha", type=float, default=None,
                   help="pi-junction energy ratio, frustrated for alpha < -0.5")
    p.add_argument("--gamma", type=float, default=None,
                   help="transmission-line capacitance ratio C0/C")
    p.add_argument("--ej-ec", type=float, default=None,
                   help="Josephson to charging energy ratio EJ/EC")
    if with_n:
        p.add_argument("--n", type=int, default=None, help="cell count")


def build_parser() -> _Parser:
    parser = _Parser(prog=PROG, description=__doc__,
                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("single-cell", help="one-cell landscape and amplitudes")
    _add_circuit_flags(p, with_n=False)
    _add_common(p, "out/single_cell")
    p.set_defaults(func=cmd_single_cell, _subparser=p)

    p = sub.add_parser("map", help="circuit to spin-model mapping")
    _add_circuit_flags(p)
    p.add_argument("--delta0", type=float, default=1.0,
                   help="tunneling pre-exponential factor in hbar*Omega units")
    p.add_argument("--j0", type=float, default=1.0,
                   help="exchange pre-exponential factor in hbar*Omega units")
    _add_common(p, "out/map")
    p.set_defaults(func=cmd_map, _subparser=p)

    p = sub.add_parser("ed", help="diagonalize one chain parameter point")
    p.add_argument("--n", type=int, default=None, help="chain length")
    p.add_argument("--delta-tilde", type=float, default=None)
    p.add_argument("--beta", type=float, default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max-sites", type=int, default=16)
    p.add_argument("--max-iter", type=int, default=None,
                   help="Lanczos iteration cap")
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--dump-vectors", action="store_true",
                   help="write eigenvectors as little-endian float64 + sidecar")
    _add_common(p, "out/ed")
    p.set_defaults(func=cmd_ed, _subparser=p)

    p = sub.add_parser("sweep", help="(delta_tilde, beta) grid sweep")
    p.add_argument("--delta-range", default=None, metavar="A:B:STEP",
                   help="delta_tilde grid (default -15:15:0.25)")
    p.add_argument("--beta-range", default=None, metavar="A:B:STEP",
                   help="beta grid (default 0.1:5:0.1)")
    p.add_argument("--n-list", type=_parse_int_list, default=(12,),
                   help="comma separated chain lengths (default 12)")
    p.add_argument("--kernel", choices=("powerlaw", "table"), default="powerlaw")
    p.add_argument("--alpha", type=float, default=None)
    p.add_argument("--gamma", type=float, default=None)
    p.add_argument("--ej-ec", type=float, default=None)
    p.add_argument("--resume", action="store_true")
    p.add_argument("--workers", type=int, default=None,
                   help="worker processes (default SAWCHAIN_WORKERS or cpu count)")
    p.add_argument("--seed", type=int, default=7)
    p.add_argument("--max-sites", type=int, default=16)
    _add_common(p, "out/sweep")
    p.set_defaults(func=cmd_sweep, _subparser=p)

    p = sub.add_parser("fss", help="finite-size-scaling crossing study")
    p.add_argument("--beta", type=float, default=None)
    p.add_argument("--n-list", type=_parse_int_list, default=None,
                   help="comma separated chain lengths")
    p.add_argument("--delta-range", default=None, metavar="A:B:STEP")
    p.add_argument("--threshold", type=float, default=0.3,
                   help="crossing dispersion bound for a common point")
    p.add_argument("--resume", action="store_true")
    p.add_argument("--workers", type=int, default=None)
    p.add_argument("--seed", type=int, default=7)
    p.add_argument("--max-sites", type=int, default=16)
    _add_common(p, "out/fss")
    p.set_defaults(func=cmd_fss, _subparser=p)

    p = sub.add_parser("appendix", help="multi-cell flip amplitude orders")
    _add_circuit_flags(p, with_n=False)
    p.add_argument("--n-list", type=_parse_int_list,
                   default=(8, 16, 32, 64, 128, 256, 512),
                   help="chain lengths for the amplitude curves")
    p.add_argument("--n-ref", type=int, default=64,
                   help="length at which the sorted table is printed")
    _add_common(p, "out/appendix")
    p.set_defaults(func=cmd_appendix, _subparser=p)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        _apply_config(args)
        if args.command == "sweep" and args.kernel == "table":
            for flag in ("alpha", "gamma", "ej_ec"):
                if getattr(args, flag) is None:
                    raise ValueError(f"--{flag.replace('_', '-')} is required "
                                     f"for kernel=table")
        return args.func(args)
    except ValueError as exc:
        print(f"{PROG}: error: {exc}", file=sys.stderr)
        return 1
    except (ConvergenceError, ArithmeticError) as exc:
        print(f"{PROG}: numerical failure: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
