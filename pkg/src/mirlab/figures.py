"""Figure rendering for sweep reports (written next to the delimited output)."""

from __future__ import annotations

import os

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt


def render_sweep_figures(rows: list[dict], fig_dir: str, stem: str = "sweep") -> list[str]:
    """Render ratio and error/bound trend figures for a sweep table.

    rows are dicts with the sweep CSV columns; returns the written paths.
    """
    os.makedirs(fig_dir, exist_ok=True)
    x = [r["param_value"] for r in rows]
    paths = []

    fig, ax = plt.subplots(figsize=(5.0, 3.4))
    ax.plot(x, [r["ratio"] for r in rows], "o-", color="tab:blue")
    ax.set_xlabel("parameter value")
    ax.set_ylabel("sup error / (E||q||_1 * TV sum)")
    ax.set_title("bound ratio across the sweep")
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    path = os.path.join(fig_dir, f"{stem}_ratio.png")
    fig.savefig(path, dpi=150)
    plt.close(fig)
    paths.append(path)

    fig, ax = plt.subplots(figsize=(5.0, 3.4))
    ax.errorbar(x, [r["sup_err"] for r in rows],
                yerr=[3 * r["sup_err_se"] for r in rows],
                fmt="o-", capsize=3, label="measured sup error (3 SE)")
    if any(r["bound"] == r["bound"] for r in rows):   # not NaN
        ax.plot(x, [r["bound"] for r in rows], "s--", color="tab:red",
                label="parametric bound")
    ax.set_xlabel("parameter value")
    ax.set_ylabel("value")
    ax.set_title("sup error and parametric bound")
    ax.grid(True, alpha=0.3)
    ax.legend()
    fig.tight_layout()
    path = os.path.join(fig_dir, f"{stem}_error.png")
    fig.savefig(path, dpi=150)
    plt.close(fig)
    paths.append(path)
    return paths
