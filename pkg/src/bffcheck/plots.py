"""Matplotlib helpers for the scaling report."""
from __future__ import annotations

import math

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402


def loglog_slope(sizes, times) -> float:
    """Least-squares slope of log(time) against log(size)."""
    xs = [math.log(s) for s in sizes]
    ys = [math.log(max(t, 1e-9)) for t in times]
    mx, my = sum(xs) / len(xs), sum(ys) / len(ys)
    num = sum((x - mx) * (y - my) for x, y in zip(xs, ys))
    den = sum((x - mx) ** 2 for x in xs)
    return num / den if den else 0.0


def get_scaling_plot(sizes, times, title="check runtime"):
    """Runtime against program size on log-log axes, with a cubic reference."""
    fig, ax = plt.subplots(figsize=(5, 4))
    ax.loglog(sizes, times, "o-", label="measured")
    ref = [times[0] * (s / sizes[0]) ** 3 for s in sizes]
    ax.loglog(sizes, ref, "--", color="grey", label="cubic from first point")
    ax.set_xlabel("AST nodes")
    ax.set_ylabel("seconds")
    ax.set_title(f"{title} (slope {loglog_slope(sizes, times):.2f})")
    ax.legend()
    fig.tight_layout()
    return fig


def save_scaling_plot(path, sizes, times, title="check runtime"):
    fig = get_scaling_plot(sizes, times, title)
    fig.savefig(path, dpi=100)
    plt.close(fig)
    return path
