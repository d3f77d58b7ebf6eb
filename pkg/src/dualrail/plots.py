"""PNG figures for CLI tables. matplotlib is imported only here, on demand."""
from __future__ import annotations

from pathlib import Path

import numpy as np

from .errors import ConfigError


def _pyplot():
    try:
        import matplotlib
    except ImportError:
        raise ConfigError("plotting needs matplotlib (pip install 'artifact[plots]')") from None
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
    return plt


TIER_COLORS = {"erasure": "#e0a800", "pauli": "#1f5fa8", "leakage": "#7a0019"}


def _save(fig, path):
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    fig.tight_layout()
    fig.savefig(path, dpi=120, metadata={"Software": None})


def plot_budget_idle(table, path):
    plt = _pyplot()
    names, probs = table.column("process"), table.column("probability")
    fig, ax = plt.subplots(figsize=(7, 3.5))
    y = np.arange(len(names))
    ax.barh(y, [p if p else np.nan for p in probs], color="#1f5fa8")
    ax.set_yticks(y, names)
    ax.invert_yaxis()
    ax.set_xscale("log")
    ax.set_xlabel(f"probability in {table.meta.get('t_us', 1.0)} us")
    _save(fig, path)
    plt.close(fig)


def plot_budget_gate(table, path):
    plt = _pyplot()
    names = table.column("process")
    er = [v if v else np.nan for v in table.column("erasure")]
    pa = [v if v else np.nan for v in table.column("pauli")]
    fig, ax = plt.subplots(figsize=(7, 4))
    y = np.arange(len(names))
    ax.barh(y - 0.2, er, height=0.4, color=TIER_COLORS["erasure"], label="erasure")
    ax.barh(y + 0.2, pa, height=0.4, color=TIER_COLORS["pauli"], label="Pauli")
    ax.set_yticks(y, names)
    ax.invert_yaxis()
    ax.set_xscale("log")
    ax.set_xlabel("probability per gate")
    ax.legend()
    _save(fig, path)
    plt.close(fig)


def plot_hierarchy(table, path):
    plt = _pyplot()
    rows = [r for r in table.rows if r[0] not in ("total", "threshold")]
    thresholds = {r[1]: r[2] for r in table.rows if r[0] == "threshold"}
    totals = {r[1]: r[2] for r in table.rows if r[0] == "total"}
    fig, ax = plt.subplots(figsize=(7, 4.5))
    y = np.arange(len(rows))
    ax.barh(y, [r[2] if r[2] else np.nan for r in rows], color=[TIER_COLORS[r[1]] for r in rows])
    ax.set_yticks(y, [f"{r[0]} ({r[1]})" for r in rows])
    ax.invert_yaxis()
    ax.set_xscale("log")
    for tier, x in thresholds.items():
        ax.axvline(x, ls="--", color=TIER_COLORS[tier], label=f"{tier} threshold")
    for tier, x in totals.items():
        ax.axvline(x, ls=":", color=TIER_COLORS[tier], label=f"{tier} total")
    ax.set_xlabel("probability per gate")
    ax.legend(fontsize=7, loc="lower right")
    _save(fig, path)
    plt.close(fig)


def plot_readout(table, path):
    plt = _pyplot()
    rows = [r for r in table.rows if r[1] == "aggregate"]
    names = [r[0] for r in rows]
    cols = table.names
    mis = [r[cols.index("misassignment")] for r in rows]
    add = [r[cols.index("added_erasure")] for r in rows]
    fig, ax = plt.subplots(figsize=(5, 3.5))
    x = np.arange(len(names))
    ax.bar(x - 0.2, [m if m else np.nan for m in mis], width=0.4, color=TIER_COLORS["pauli"], label="misassignment")
    ax.bar(x + 0.2, [a if a else np.nan for a in add], width=0.4, color=TIER_COLORS["erasure"], label="added erasure")
    ax.set_xticks(x, names)
    ax.set_yscale("log")
    ax.set_ylabel("probability")
    ax.legend()
    _save(fig, path)
    plt.close(fig)


PLOTTERS = {"budget_idle": plot_budget_idle, "budget_gate": plot_budget_gate,
            "budget_hierarchy": plot_hierarchy, "readout": plot_readout}


def plot_table(table, path):
    try:
        fn = PLOTTERS[table.experiment]
    except KeyError:
        raise ConfigError(f"no figure available for {table.experiment!r}") from None
    fn(table, path)
