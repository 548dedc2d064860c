"""Static SVG figures (needs matplotlib)."""

from __future__ import annotations

import numpy as np


def _pyplot():
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    return plt


def plot_cifs(curves: dict, cause: int, path) -> None:
    """Step plot of one cumulative incidence curve per group."""
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(6, 4))
    for group, f in sorted(curves.items()):
        end = f.jump_times[-1] * 1.05 if f.jump_times.size else 1.0
        x = np.concatenate(([0.0], f.jump_times, [end]))
        y = np.concatenate(([f.initial_value], f.values_after, [f.final_value]))
        ax.step(x, y, where="post", label=f"group {group}")
    ax.set_xlabel("time")
    ax.set_ylabel(f"cumulative incidence, cause {cause}")
    ax.set_ylim(0, 1)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, format="svg")
    plt.close(fig)


def plot_rejection_rates(tables, path, alpha: float | None = None) -> None:
    """Grouped bars of rejection rate per scenario cell and test."""
    plt = _pyplot()
    tests = list(dict.fromkeys(r.test for t in tables for r in t.rows))
    cells = [t.config.label for t in tables]
    fig, ax = plt.subplots(figsize=(max(6, 0.8 * len(cells) * len(tests) / 2), 4))
    width = 0.8 / max(1, len(tests))
    for k, name in enumerate(tests):
        rates = [next((r.rate for r in t.rows if r.test == name), np.nan) for t in tables]
        ax.bar(np.arange(len(cells)) + k * width, rates, width, label=name)
    level = alpha if alpha is not None else (tables[0].config.alpha if tables else None)
    if level is not None:
        ax.axhline(level, color="k", lw=0.8, ls="--")
    ax.set_xticks(np.arange(len(cells)) + 0.4 - width / 2)
    ax.set_xticklabels(cells, rotation=30, ha="right", fontsize=7)
    ax.set_ylabel("rejection rate")
    ax.set_ylim(0, 1)
    ax.legend(fontsize=7)
    fig.tight_layout()
    fig.savefig(path, format="svg")
    plt.close(fig)
