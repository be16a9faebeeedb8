"""Render tunneling traces to figure files next to their CSVs."""

from __future__ import annotations

from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .trace import TunnelingTrace

__all__ = ["save_trace_figure", "save_overlay_figure"]


def _panel_pair(title: str):
    fig, (ax_r, ax_2) = plt.subplots(2, 1, sharex=True, figsize=(7.0, 5.2))
    ax_r.set_ylabel(r"$p_R$")
    ax_2.set_ylabel(r"$p_2$")
    ax_2.set_xlabel("z (mm)")
    for ax in (ax_r, ax_2):
        ax.set_ylim(-0.02, 1.05)
        ax.grid(alpha=0.3)
    if title:
        ax_r.set_title(title)
    return fig, ax_r, ax_2


def save_trace_figure(trace: TunnelingTrace, path, title: str = "") -> Path:
    """Two stacked panels: p_R(z) and p_2(z)."""
    fig, ax_r, ax_2 = _panel_pair(title)
    ax_r.plot(trace.z_mm, trace.p_r, lw=1.0)
    ax_2.plot(trace.z_mm, trace.p_2, lw=1.0, color="C1")
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, dpi=150, bbox_inches="tight")
    plt.close(fig)
    return path


def save_overlay_figure(traces: Sequence[TunnelingTrace], labels: Sequence[str],
                        path, title: str = "") -> Path:
    """Overlay several runs, one color per label (sweep summary figure)."""
    fig, ax_r, ax_2 = _panel_pair(title)
    for trace, label in zip(traces, labels):
        ax_r.plot(trace.z_mm, trace.p_r, lw=1.0, label=label)
        ax_2.plot(trace.z_mm, trace.p_2, lw=1.0, label=label)
    ax_r.legend(fontsize=8, loc="upper right")
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, dpi=150, bbox_inches="tight")
    plt.close(fig)
    return path
