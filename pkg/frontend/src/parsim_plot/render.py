"""Queue/pool chart: raw traces, smoothed curves, and the target line."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .core import Samples, moving_average


def build_figure(samples: Samples, window: int, target: float | None):
    """Two smoothed series over their faint raw traces, plus the setpoint."""
    w_ma = moving_average(samples.w, window)
    p_ma = moving_average(samples.p, window)

    fig, ax = plt.subplots(figsize=(10, 5))
    ax.plot(samples.time_s, samples.w, color="tab:blue", alpha=0.25, linewidth=0.6,
            label="W raw")
    ax.plot(samples.time_s, samples.p, color="tab:orange", alpha=0.25, linewidth=0.6,
            label="P raw")
    ax.plot(samples.time_s, w_ma, color="tab:blue", linewidth=1.5,
            label=f"W (moving avg, {window})")
    ax.plot(samples.time_s, p_ma, color="tab:orange", linewidth=1.5,
            label=f"P (moving avg, {window})")
    if target is not None:
        ax.axhline(target, color="black", linestyle="--", linewidth=1.0,
                   label=f"target T={target:g}")
    ax.set_xlabel("time (s)")
    ax.set_ylabel("requests in queue / workers")
    ax.set_title("Queue length and worker pool")
    ax.legend(loc="upper right", fontsize=9)
    ax.grid(alpha=0.3)
    fig.tight_layout()
    return fig


def render(samples: Samples, window: int, target: float | None, out_path) -> None:
    fig = build_figure(samples, window, target)
    fig.savefig(out_path, dpi=130)
    plt.close(fig)
