"""Figures written alongside CLI reports."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402


def plot_margins(report, path: str | Path) -> Path:
    """Histogram of ζ'(Z^n) - ζ'(L) over the lattices of a verification report."""
    margins = np.array([r.margin for r in report.per_lattice if r.margin is not None])
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.hist(margins, bins=max(10, len(margins) // 5), color="tab:blue", edgecolor="white")
    ax.axvline(0.0, color="tab:red", lw=1)
    ax.set_xlabel("margin  ζ'(Zⁿ) − ζ'(L)")
    ax.set_ylabel("lattices")
    ax.set_title(f"n={report.n}, s={report.s:g}, q={report.q:g}, violations={report.violations}")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return Path(path)


def plot_bessel(alpha: float, x: np.ndarray, K: np.ndarray, Kbar: np.ndarray, path: str | Path) -> Path:
    """K_alpha and its normalised form on a log scale."""
    fig, ax = plt.subplots(figsize=(6, 4))
    pos = x > 0
    ax.semilogy(x[pos], K[pos], label=f"K_{alpha:g}(x)")
    ax.semilogy(x, Kbar, label=f"K̄_{alpha:g}(x)")
    ax.set_xlabel("x")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return Path(path)
