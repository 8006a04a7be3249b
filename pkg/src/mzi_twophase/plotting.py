"""
Figure rendering for result tables.

Figures are built on :class:`matplotlib.figure.Figure` directly, so no
pyplot state or display server is involved. Vector formats are written with
fixed metadata and hash salt so reruns produce identical files.
"""

import os

import matplotlib
import numpy as np
from matplotlib.figure import Figure

STYLE = {
    "font.size": 8,
    "axes.labelsize": 9,
    "legend.fontsize": 7,
    "xtick.labelsize": 8,
    "ytick.labelsize": 8,
    "lines.linewidth": 1.0,
    "lines.markersize": 3.5,
    "axes.grid": True,
    "grid.linestyle": ":",
    "grid.alpha": 0.6,
    "svg.hashsalt": "mzi-twophase",
    "svg.fonttype": "none",
}

COLORS = {"s": "#1f5fa8", "d": "#c0392b", "crb": "0.25"}

AXIS_LABELS = {"nu": r"number of measurements $\nu$", "N": r"mean photon number $N$", "beta": r"$\beta$"}

_SAVE_METADATA = {
    "svg": {"Date": None},
    "pdf": {"CreationDate": None, "ModDate": None},
    "png": {},
}


def _stderr(table, key):
    return np.array([d.get(key, np.nan) for d in table.diagnostics], dtype=float)


def _axis(table):
    for name in ("N", "beta"):
        if name in table.columns:
            return name
    return "nu"


def build_figure(table):
    """Two panels: bias with standard errors, and rmse against the bound."""
    if not table.rows:
        raise ValueError("cannot plot an empty result table")
    axis = _axis(table)
    x = table.column(axis)
    with matplotlib.rc_context(STYLE):
        fig = Figure(figsize=(6.8, 2.8))
        ax_bias, ax_rmse = fig.subplots(1, 2)
        for p, name in (("s", r"$\phi_s$"), ("d", r"$\phi_d$")):
            ax_bias.errorbar(
                x, table.column(f"bias_{p}"), yerr=_stderr(table, f"stderr_bias_{p}"),
                fmt="o-", color=COLORS[p], capsize=2, label=name,
            )
            ax_rmse.plot(x, table.column(f"rmse_{p}"), "o", color=COLORS[p], label=rf"$\Delta${name}")
        ax_bias.axhline(0.0, color=COLORS["crb"], lw=0.6)
        crb_s, crb_d = table.column("crb_s"), table.column("crb_d")
        if np.allclose(crb_s, crb_d, rtol=1e-9, equal_nan=True):
            ax_rmse.plot(x, crb_s, "-", color=COLORS["crb"], label="CRB")
        else:
            ax_rmse.plot(x, crb_s, "-", color=COLORS["s"], alpha=0.6, label=r"CRB $\phi_s$")
            ax_rmse.plot(x, crb_d, "--", color=COLORS["d"], alpha=0.6, label=r"CRB $\phi_d$")
        if axis != "beta":
            ax_bias.set_xscale("log")
            ax_rmse.set_xscale("log")
        ax_rmse.set_yscale("log")
        for ax in (ax_bias, ax_rmse):
            ax.set_xlabel(AXIS_LABELS[axis])
            ax.legend(frameon=False)
        ax_bias.set_ylabel("bias")
        ax_rmse.set_ylabel("uncertainty")
        ax_bias.set_title("(a)", loc="left")
        ax_rmse.set_title("(b)", loc="left")
        fig.tight_layout()
    return fig


def emit_plots(table, directory, formats=("svg",)):
    """Render ``table`` to ``<directory>/<command>.<fmt>`` for every format.

    Returns the list of written paths. ``OSError`` propagates when the
    directory cannot be written.
    """
    fig = build_figure(table)
    os.makedirs(directory, exist_ok=True)
    paths = []
    with matplotlib.rc_context(STYLE):
        for fmt in formats:
            path = os.path.join(directory, f"{table.command}.{fmt}")
            fig.savefig(path, format=fmt, metadata=_SAVE_METADATA.get(fmt, {}))
            paths.append(path)
    return paths
