"""
Matplotlib figures written next to the CSV outputs (Agg backend, no display).
"""

from __future__ import annotations

from pathlib import Path
from typing import Optional, Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

# no timestamps or software tags, so identical data give identical files
_PNG_META = {"Software": None}


def _save(fig, path) -> Path:
    path = Path(path)
    fig.savefig(path, dpi=110, metadata=_PNG_META)
    plt.close(fig)
    return path


def _snapshot_axes(ax, snaps, title: str, ylim=None):
    cmap = plt.get_cmap("viridis")
    count = max(len(snaps) - 1, 1)
    for i, (t, sol) in enumerate(snaps):
        x = sol.grid.centers()
        ax.step(x, sol.u, where="mid", color=cmap(i / count), lw=1.2, label=f"t = {t:g}")
    ax.set_xlabel("x")
    ax.set_ylabel("u")
    ax.set_title(title)
    if ylim is not None:
        ax.set_ylim(*ylim)
    ax.grid(alpha=0.3)
    ax.legend(fontsize=7)


def plot_snapshots(path, snaps: Sequence, title: str, companion: Optional[Sequence] = None):
    """Profiles u(t, .) at the snapshot times; a Cauchy companion goes in a left panel."""
    lo = min(float(s.u.min()) for _, s in snaps)
    hi = max(float(s.u.max()) for _, s in snaps)
    if companion is not None:
        lo = min(lo, min(float(s.u.min()) for _, s in companion))
        hi = max(hi, max(float(s.u.max()) for _, s in companion))
    pad = 0.05 * max(hi - lo, 1e-12)
    ylim = (lo - pad, hi + pad)
    if companion is None:
        fig, ax = plt.subplots(figsize=(6, 4))
        _snapshot_axes(ax, snaps, title, ylim)
    else:
        fig, (a0, a1) = plt.subplots(1, 2, figsize=(11, 4), sharey=True)
        _snapshot_axes(a0, companion, f"{title}: Cauchy problem", ylim)
        _snapshot_axes(a1, snaps, f"{title}: boundary problem", ylim)
    fig.tight_layout()
    return _save(fig, path)


def plot_compare(path, x: np.ndarray, solutions: dict, title: str):
    fig, ax = plt.subplots(figsize=(6, 4))
    styles = {"tc": "-", "godunov": "--", "exact": ":"}
    for name, u in solutions.items():
        ax.plot(x, u, styles.get(name, "-"), lw=1.4, label=name)
    ax.set_xlabel("x")
    ax.set_ylabel("u")
    ax.set_title(title)
    ax.grid(alpha=0.3)
    ax.legend()
    fig.tight_layout()
    return _save(fig, path)


def plot_convergence(path, rows: Sequence[dict], title: str):
    dx = np.array([r["dx"] for r in rows])
    err = np.array([r["l1_error"] for r in rows])
    fig, ax = plt.subplots(figsize=(5, 4))
    ax.loglog(dx, err, "o-", label="L1 error")
    if len(rows) > 0 and err[0] > 0:
        ax.loglog(dx, err[0] * dx / dx[0], "k:", label="first order")
        ax.loglog(dx, err[0] * np.sqrt(dx / dx[0]), "k--", lw=0.8, label="order 1/2")
    ax.set_xlabel("dx")
    ax.set_ylabel("L1 error")
    ax.set_title(title)
    ax.grid(alpha=0.3, which="both")
    ax.legend()
    fig.tight_layout()
    return _save(fig, path)


def plot_checks(path, checks: Sequence, title: str):
    """Horizontal bars of value / tolerance for every numeric check (1 is the limit)."""
    names, ratios, colors = [], [], []
    for c in checks:
        if isinstance(c.tol, (int, float)) and c.tol > 0 and np.isfinite(c.value):
            names.append(c.name)
            ratios.append(max(c.value / c.tol, 1e-6))
            colors.append("tab:green" if c.passed else "tab:red")
    if not names:
        return None
    fig, ax = plt.subplots(figsize=(7, 0.3 * len(names) + 1.2))
    ax.barh(range(len(names)), ratios, color=colors)
    ax.axvline(1.0, color="k", lw=0.8)
    ax.set_yticks(range(len(names)))
    ax.set_yticklabels(names, fontsize=7)
    ax.set_xscale("log")
    ax.set_xlabel("value / tolerance")
    ax.set_title(title)
    fig.tight_layout()
    return _save(fig, path)
