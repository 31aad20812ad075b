"""Figure rendering for experiment reports.

Every experiment writes its delimited data first; these helpers render the
companion PNGs.  Rendering failures must never sink an experiment, so
callers wrap these in the stage machinery.
"""

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

DPI = 150


def _save(fig, path):
    fig.savefig(path, dpi=DPI, bbox_inches="tight")
    plt.close(fig)
    return path


def gram_heatmap(gram, path, title=""):
    fig, ax = plt.subplots(figsize=(4.2, 3.6))
    n = gram.shape[0]
    im = ax.imshow(gram, cmap="viridis", origin="upper")
    ax.set_xlabel("basis index q")
    ax.set_ylabel("basis index p")
    if title:
        ax.set_title(title)
    fig.colorbar(im, ax=ax, shrink=0.85)
    ax.set_xticks(range(0, n, max(1, n // 6)))
    ax.set_yticks(range(0, n, max(1, n // 6)))
    return _save(fig, path)


def point_scatter(series, path, title="", xlim=(-1.05, 1.05), ylim=(-1.05, 1.05)):
    """series: list of (label, points, marker) with points of shape (m, 2)."""
    fig, ax = plt.subplots(figsize=(4.2, 4.0))
    for label, pts, marker in series:
        pts = np.atleast_2d(pts)
        ax.plot(pts[:, 0], pts[:, 1], marker, label=label, fillstyle="none",
                linestyle="none", markersize=6)
    ax.set_xlim(*xlim)
    ax.set_ylim(*ylim)
    ax.set_xlabel(r"$\zeta_1$")
    ax.set_ylabel(r"$\zeta_2$")
    if title:
        ax.set_title(title)
    ax.legend(loc="upper right", fontsize=8)
    return _save(fig, path)


def nodes_1d(series, path, title=""):
    """series: list of (label, nodes); rows are offset vertically."""
    fig, ax = plt.subplots(figsize=(5.0, 2.4))
    for level, (label, nodes) in enumerate(series):
        ax.plot(np.sort(nodes), np.full(len(nodes), level), "o",
                fillstyle="none", label=label, linestyle="none")
    ax.set_yticks(range(len(series)))
    ax.set_yticklabels([label for label, _ in series], fontsize=8)
    ax.set_xlabel(r"$\zeta$")
    ax.set_xlim(-1.05, 1.05)
    if title:
        ax.set_title(title)
    return _save(fig, path)


def coefficient_decay(indices, coeffs, path, title="", floor=1e-16):
    """Heatmap of log10 |coefficients| over a 2-d multi-index layout."""
    indices = np.asarray(indices)
    coeffs = np.asarray(coeffs)
    n1 = indices[:, 0].max() + 1
    n2 = indices[:, 1].max() + 1
    grid = np.full((n1, n2), np.nan)
    for (p1, p2), c in zip(indices, coeffs):
        grid[p1, p2] = np.log10(max(abs(c), floor))
    fig, ax = plt.subplots(figsize=(4.4, 3.6))
    im = ax.imshow(grid.T, origin="lower", cmap="magma", vmin=-16, vmax=1)
    ax.set_xlabel("order in dimension 1")
    ax.set_ylabel("order in dimension 2")
    if title:
        ax.set_title(title)
    fig.colorbar(im, ax=ax, shrink=0.85, label=r"$\log_{10}|x|$")
    return _save(fig, path)


def condition_curves(orders, series, path, title="", ylabel="condition number"):
    """series: mapping label -> list of values over orders."""
    fig, ax = plt.subplots(figsize=(4.6, 3.4))
    for label, values in series.items():
        ax.semilogy(orders, values, "o-", label=label, markersize=4)
    ax.set_xlabel("total order")
    ax.set_ylabel(ylabel)
    if title:
        ax.set_title(title)
    ax.legend(fontsize=8)
    ax.grid(True, which="both", alpha=0.3)
    return _save(fig, path)


def timing_curves(sizes, series, path, title=""):
    fig, ax = plt.subplots(figsize=(4.6, 3.4))
    for label, values in series.items():
        ax.semilogy(sizes, values, "o-", label=label, markersize=4)
    ax.set_xlabel("basis cardinality n")
    ax.set_ylabel("seconds")
    if title:
        ax.set_title(title)
    ax.legend(fontsize=8)
    ax.grid(True, which="both", alpha=0.3)
    return _save(fig, path)
