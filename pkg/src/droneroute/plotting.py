"""Figures written next to the CSV reports."""

from __future__ import annotations

from pathlib import Path
from typing import Dict, Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402


def convergence_plot(traces: Dict[str, Sequence[dict]], path, title: str = "") -> Path:
    """Incumbent cost and penalty weights per iteration, one line per run."""
    fig, (ax1, ax2) = plt.subplots(2, 1, figsize=(7, 5.5), sharex=True)
    for label, tr in traces.items():
        its = [r["iteration"] for r in tr]
        ax1.plot(its, [r["best"] for r in tr], lw=1.2, label=label)
        ax2.plot(its, [r["w1"] for r in tr], lw=0.8, label=f"{label} w1")
        ax2.plot(its, [r["w2"] for r in tr], lw=0.8, ls="--", label=f"{label} w2")
    ax1.set_ylabel("best feasible cost")
    ax2.set_ylabel("penalty weight")
    ax2.set_xlabel("iteration")
    if len(traces) <= 6:
        ax1.legend(fontsize=7)
    if title:
        ax1.set_title(title)
    fig.tight_layout()
    out = Path(path)
    fig.savefig(out, dpi=110)
    plt.close(fig)
    return out


def ablation_plot(names: Sequence[str], with_l: Sequence[float], without_l: Sequence[float], path) -> Path:
    fig, ax = plt.subplots(figsize=(max(5, 0.6 * len(names) + 2), 4))
    x = range(len(names))
    ax.bar([i - 0.2 for i in x], with_l, width=0.4, label="with L1-L7")
    ax.bar([i + 0.2 for i in x], without_l, width=0.4, label="without L1-L7")
    ax.set_xticks(list(x))
    ax.set_xticklabels(names, rotation=60, ha="right", fontsize=7)
    ax.set_ylabel("mean best cost")
    ax.legend()
    fig.tight_layout()
    out = Path(path)
    fig.savefig(out, dpi=110)
    plt.close(fig)
    return out
