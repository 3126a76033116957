"""Figure rendering for the CLI report paths.

Every plotting function writes a PNG next to the delimited output and
returns the path; nothing is shown interactively.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

__all__ = [
    "spectrum_figure",
    "mp_figure",
    "density_figure",
    "esd_figure",
]


def spectrum_figure(pooled_eigenvalues, grid, averaged, target, path, title: str):
    """Pooled-eigenvalue histogram with the averaged smoothed density and
    the theoretical limit overlaid."""
    fig, ax = plt.subplots(figsize=(7, 4.5))
    ax.hist(
        np.asarray(pooled_eigenvalues).ravel(),
        bins=60,
        density=True,
        color="#9ecae1",
        edgecolor="white",
        label="pooled eigenvalues",
    )
    ax.plot(grid, averaged, color="#08519c", lw=1.5, label="averaged kernel density")
    ax.plot(grid, target, color="#d62728", lw=1.5, ls="--", label="limit density")
    ax.set_xlabel("eigenvalue")
    ax.set_ylabel("density")
    ax.set_title(title)
    ax.legend(frameon=False)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def mp_figure(x, density, cdf, path, title: str):
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(9, 3.8))
    ax1.plot(x, density, color="#08519c", lw=1.5)
    ax1.set_xlabel("x")
    ax1.set_ylabel("density")
    ax2.plot(x, cdf, color="#d62728", lw=1.5)
    ax2.set_xlabel("x")
    ax2.set_ylabel("CDF")
    fig.suptitle(title)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def density_figure(x, values, path, title: str):
    fig, ax = plt.subplots(figsize=(7, 4.5))
    ax.plot(x, values, color="#08519c", lw=1.5)
    ax.set_xlabel("x")
    ax.set_ylabel("density")
    ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def esd_figure(eigenvalues, path, title: str):
    eigenvalues = np.asarray(eigenvalues).ravel()
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(9, 3.8))
    ax1.hist(eigenvalues, bins="auto", density=True, color="#9ecae1", edgecolor="white")
    ax1.set_xlabel("eigenvalue")
    ax1.set_ylabel("density")
    steps = np.arange(1, eigenvalues.size + 1) / eigenvalues.size
    ax2.step(np.sort(eigenvalues), steps, where="post", color="#08519c")
    ax2.set_xlabel("x")
    ax2.set_ylabel("ESD")
    fig.suptitle(title)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path
