"""Offline figures rendered from sweep rows and the closed-form bound."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .analysis import B1_HIGH, B1_LOW, B1_STAR, LB_LIMIT, lb_ratio  # noqa: E402

_SAVE = {"dpi": 120, "metadata": {"Software": None}}


def _finite(value: str) -> float | None:
    try:
        x = float(value)
    except ValueError:
        return None
    return x if x == x and x != float("inf") else None


def plot_sweep(rows: list[dict[str, str]], path, x_key: str) -> Path:
    """Ratio column against one parameter, one line per (family, algo)."""
    path = Path(path)
    fig, ax = plt.subplots(figsize=(6, 4))
    groups: dict[tuple[str, str], list[tuple[float, float]]] = {}
    for r in rows:
        params = dict(p.split("=", 1) for p in r["params"].split(";") if p)
        y = _finite(r["ratio"])
        if x_key not in params or y is None:
            continue
        groups.setdefault((r["family"], r["algo"]), []).append((float(params[x_key]), y))
    for (family, algo), pts in sorted(groups.items()):
        pts.sort()
        ax.plot([p[0] for p in pts], [p[1] for p in pts], marker="o", label=f"{family} / {algo}")
    if any(f == "tightness" for f, _ in groups):
        ax.axhline(3, color="grey", ls="--", lw=0.8)
    ax.set_xlabel(x_key)
    ax.set_ylabel("OPT / ALG")
    if groups:
        ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, **_SAVE)
    plt.close(fig)
    return path


def plot_lb_curve(path, series=None, points: int = 400) -> Path:
    """lb_ratio over b1 with the optimum marked, plus finite-scale values."""
    path = Path(path)
    lo, hi = float(B1_LOW), float(B1_HIGH)
    xs = [lo + (hi - lo) * (i + 0.5) / points for i in range(points)]
    ys = [lb_ratio(x, guard=False) for x in xs]
    fig, axes = plt.subplots(1, 2 if series else 1, figsize=(10 if series else 5, 4))
    ax = axes[0] if series else axes
    ax.plot(xs, ys)
    ax.plot([B1_STAR], [LB_LIMIT], "o", color="C3")
    ax.set_xlabel("b1 = d1 / B")
    ax.set_ylabel("limiting ratio")
    if series:
        ax2 = axes[1]
        ax2.plot([i for i, _ in series], [float(v) for _, v in series], marker="o")
        ax2.axhline(LB_LIMIT, color="grey", ls="--", lw=0.8)
        ax2.set_xlabel("i  (l = 2^i, B = 4^i)")
        ax2.set_ylabel("finite ratio, min over t")
    fig.tight_layout()
    fig.savefig(path, **_SAVE)
    plt.close(fig)
    return path
