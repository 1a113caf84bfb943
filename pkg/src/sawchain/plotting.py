"""Figure rendering for the CLI report paths.

All functions draw with the Agg backend and write straight to a file; the
format follows the file extension (the CLI emits .svg next to the CSV/JSON
output).
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

__all__ = [
    "plot_exchange_decay",
    "plot_tunneling_vs_length",
    "plot_heatmap",
    "plot_fss_curves",
    "plot_amplitude_orders",
]

_ORDER_COLORS = {1: "tab:green", 2: "tab:blue", 3: "tab:red", 4: "black"}
_STYLES = ["-", "--", ":", "-."]


def plot_exchange_decay(model, path):
    """log-log J(d)/J(1) with the fitted power law and screening length."""
    d = np.arange(1, model.n_cells)
    fig, ax = plt.subplots(figsize=(5.2, 3.9))
    ax.loglog(d, model.j_table, lw=1.4, label="exchange table")
    if model.beta_fit is not None:
        ax.loglog(d, d ** (-model.beta_fit), "--", lw=1.1,
                  label=f"power law, exponent {model.beta_fit:.3f}")
    if model.ell0 is not None:
        ax.axvline(model.ell0, color="gray", lw=0.8, ls=":",
                   label=f"screening length {model.ell0:.2f}")
    ax.set_xlabel("separation d")
    ax.set_ylabel("J(d) / J(1)")
    ax.set_title(f"alpha={model.alpha}, gamma={model.gamma}, "
                 f"EJ/EC={model.ej_over_ec}, N={model.n_cells}")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)


def plot_tunneling_vs_length(ns, log_delta, log_j1, path):
    """ln(Delta/Delta0) and ln(J(1)/J0) against ln N."""
    fig, ax = plt.subplots(figsize=(5.2, 3.9))
    ax.plot(np.log(ns), log_delta, "o-", color="tab:green", ms=3,
            label="ln Delta/Delta0")
    ax.plot(np.log(ns), log_j1, "s-", color="tab:red", ms=3,
            label="ln J(1)/J0")
    ax.set_xlabel("ln N")
    ax.set_ylabel("log amplitude")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)


def plot_heatmap(delta_grid, beta_grid, values, label, path):
    """Color map of a scalar diagnostic over the (delta_tilde, beta) plane."""
    fig, ax = plt.subplots(figsize=(5.6, 4.2))
    extent = (delta_grid[0], delta_grid[-1], beta_grid[0], beta_grid[-1])
    im = ax.imshow(values, origin="lower", aspect="auto", extent=extent,
                   interpolation="nearest")
    fig.colorbar(im, ax=ax, label=label)
    ax.set_xlabel("delta_tilde")
    ax.set_ylabel("beta")
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)


def plot_fss_curves(curves, report, path):
    """xi/N against delta_tilde for every chain length, crossings marked."""
    fig, ax = plt.subplots(figsize=(5.6, 4.2))
    for n in sorted(curves):
        grid, vals = curves[n]
        ax.plot(grid, vals, lw=1.2, label=f"N={n}")
    for c in report.crossings:
        if c is not None:
            ax.axvline(c, color="gray", lw=0.6, ls=":")
    if report.center is not None:
        ax.axvline(report.center, color="black", lw=0.9, ls="--",
                   label=f"crossing center {report.center:.2f}")
    ax.set_xlabel("delta_tilde")
    ax.set_ylabel("xi / N")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)


def plot_amplitude_orders(ns, records_by_n, path):
    """Flip amplitudes of orders 1..4 against chain length (log scale)."""
    fig, ax = plt.subplots(figsize=(5.8, 4.4))
    first = records_by_n[ns[0]]
    for idx, rec in enumerate(first):
        order = rec["order"]
        style = _STYLES[(order - 1 - rec["n_odd"]) % len(_STYLES)]
        ys = [records_by_n[n][idx]["log_amplitude"] for n in ns]
        ax.plot(np.log(ns), ys, style, color=_ORDER_COLORS[order], lw=1.2,
                label=f"order {order} ({rec['label']})")
    ax.set_xlabel("ln N")
    ax.set_ylabel("log amplitude")
    ax.legend(fontsize=7, ncol=2)
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)
