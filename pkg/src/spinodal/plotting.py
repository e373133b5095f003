"""Deterministic SVG figures for CLI reports."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

# fixed element ids and no timestamp, so repeated runs give identical bytes
matplotlib.rcParams["svg.hashsalt"] = "spinodal"
matplotlib.rcParams["svg.fonttype"] = "none"


def _save(fig, path, stamp: str | None) -> str:
    meta = {"Date": None}
    if stamp:
        meta["Description"] = stamp
    fig.savefig(path, format="svg", metadata=meta)
    plt.close(fig)
    return str(path)


def plot_profile(profile, path, adjusted=None, title: str | None = None, stamp: str | None = None) -> str:
    """N(r) and, when given, the adjusted frequency against log r."""
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.semilogx(profile.radii, profile.N, "o-", label="N(r)")
    if adjusted is not None:
        ax.semilogx(profile.radii, adjusted, "s--", label="adjusted N")
    est = profile.order_estimate
    if est is not None:
        ax.axhline(est.value, color="grey", lw=0.8, ls=":", label=f"limit {est.value:.4g}")
    ax.set_xlabel("r")
    ax.set_ylabel("frequency")
    ax.legend()
    if title:
        ax.set_title(title)
    fig.tight_layout()
    return _save(fig, path, stamp)


def plot_nodal(points, path, labels=None, title: str | None = None, stamp: str | None = None) -> str:
    """Pairwise coordinate projections of a nodal sample set."""
    pts = np.asarray(points, dtype=float)
    n = pts.shape[1] if pts.ndim == 2 and len(pts) else 2
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)][:3]
    fig, axes = plt.subplots(1, len(pairs), figsize=(4 * len(pairs), 4), squeeze=False)
    colors = None
    if labels:
        strata = sorted({lab.stratum for lab in labels})
        colors = [strata.index(lab.stratum) for lab in labels]
    for ax, (i, j) in zip(axes[0], pairs):
        if len(pts):
            ax.scatter(pts[:, i], pts[:, j], s=4, c=colors, cmap="viridis" if colors else None)
        ax.set_xlabel(f"x{i + 1}")
        ax.set_ylabel(f"x{j + 1}")
        ax.set_aspect("equal", adjustable="datalim")
    if title:
        fig.suptitle(title)
    fig.tight_layout()
    return _save(fig, path, stamp)


def plot_box_counting(box, path, stamp: str | None = None) -> str:
    fig, ax = plt.subplots(figsize=(5, 4))
    x = np.log(1.0 / box.scales)
    y = np.log(box.counts)
    ax.plot(x, y, "o", label="occupied boxes")
    fit = np.polyfit(x, y, 1)
    ax.plot(x, np.polyval(fit, x), "-", label=f"slope {box.dimension:.3f}")
    ax.set_xlabel("log(1/scale)")
    ax.set_ylabel("log(count)")
    ax.legend()
    fig.tight_layout()
    return _save(fig, path, stamp)


def plot_covering(runs: dict, path, stamp: str | None = None) -> str:
    """log2 premeasure against step for each labelled run."""
    fig, ax = plt.subplots(figsize=(6, 4))
    for label, steps in runs.items():
        ax.plot([s.k for s in steps], [s.log2_premeasure for s in steps], label=label)
    ax.set_xlabel("step k")
    ax.set_ylabel("log2 premeasure")
    ax.legend()
    fig.tight_layout()
    return _save(fig, path, stamp)


def plot_verify(results, path, stamp: str | None = None) -> str:
    """One bar per criterion, coloured by pass/fail."""
    fig, ax = plt.subplots(figsize=(7, 2.5))
    nums = [r.number for r in results]
    ax.bar(nums, [1] * len(nums), color=["tab:green" if r.passed else "tab:red" for r in results])
    ax.set_xticks(nums)
    ax.set_yticks([])
    ax.set_xlabel("criterion")
    fig.tight_layout()
    return _save(fig, path, stamp)
