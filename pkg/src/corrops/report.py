"""Figure writers used by the command line report paths.

Everything renders through the Agg backend and writes straight to a file,
so these helpers are safe in headless runs and inside tests.  Each function
returns the path it wrote.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .coeffs import MultiSequence, eval_symbol
from .errors import InputError


def _finish(fig, path) -> str:
    fig.tight_layout()
    fig.savefig(path, dpi=144)
    plt.close(fig)
    return str(path)


def plot_ratio_histogram(ratios, path, bound: float | None = None) -> str:
    """Histogram of certified-bound-to-section-norm ratios from a sweep."""
    ratios = np.asarray(ratios, dtype=float)
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    if ratios.size:
        bins = min(40, max(8, ratios.size // 4))
        ax.hist(ratios, bins=bins, color="tab:blue", alpha=0.85)
    ax.axvline(1.0, color="black", lw=1.0, label="section norm")
    if bound is not None:
        ax.axvline(bound, color="tab:red", lw=1.0, ls="--",
                   label=f"bound {bound:g}")
    ax.set_xlabel("certified bound / section norm")
    ax.set_ylabel("trials")
    ax.legend(loc="best", fontsize=8)
    ax.set_title(f"{ratios.size} converged trials")
    return _finish(fig, path)


def plot_section_growth(sizes, norms, path, bound: float | None = None) -> str:
    """Section norms against section size, log-scaled size axis."""
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    ax.semilogx(list(sizes), list(norms), "o-", color="tab:blue")
    if bound is not None:
        ax.axhline(bound, color="tab:red", lw=1.0, ls="--",
                   label=f"limit {bound:.8g}")
        ax.legend(loc="lower right", fontsize=8)
    ax.set_xlabel("section size")
    ax.set_ylabel("operator norm")
    return _finish(fig, path)


def plot_certificate_curve(eps_values, values, path,
                           reference: float | None = None) -> str:
    """Certificate lower bounds against the decay parameter, log-x axis."""
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    ax.semilogx(list(eps_values), list(values), "o-", color="tab:blue",
                label="certificate")
    if reference is not None:
        ax.axhline(reference, color="tab:red", lw=1.0, ls="--",
                   label=f"reference {reference:.6g}")
    ax.set_xlabel("decay parameter")
    ax.set_ylabel("lower bound")
    ax.legend(loc="best", fontsize=8)
    ax.invert_xaxis()
    return _finish(fig, path)


def plot_symbol_modulus(a: MultiSequence, grid, path,
                        level: float | None = None) -> str:
    """Modulus of the trigonometric symbol of ``a`` on a uniform grid.

    One dimension gives a line plot over one period, two dimensions an
    image; anything higher is refused because there is nothing sensible
    to draw.
    """
    d = a.window.d
    if d > 2:
        raise InputError(f"symbol plots support d <= 2, got d={d}")
    sizes = tuple(int(g) for g in grid)
    vals = np.abs(eval_symbol(a, sizes).values)
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    if d == 1:
        t = np.arange(sizes[0]) / sizes[0]
        ax.plot(t, vals, color="tab:blue", lw=1.0)
        if level is not None:
            ax.axhline(level, color="tab:red", lw=1.0, ls="--",
                       label=f"certified {level:.6g}")
            ax.legend(loc="best", fontsize=8)
        ax.set_xlabel("t")
        ax.set_ylabel("|symbol|")
    else:
        im = ax.imshow(vals.T, origin="lower", extent=(0, 1, 0, 1),
                       cmap="viridis", aspect="auto")
        fig.colorbar(im, ax=ax, label="|symbol|")
        ax.set_xlabel("t1")
        ax.set_ylabel("t2")
        if level is not None:
            ax.set_title(f"certified sup bound {level:.6g}")
    return _finish(fig, path)


def plot_term_magnitudes(term_array: np.ndarray, path) -> str:
    """Factor coefficient magnitudes, sorted, on a log scale."""
    mags = np.sort(np.abs(np.asarray(term_array)).ravel())[::-1]
    mags = mags[mags > 0]
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    if mags.size:
        ax.semilogy(np.arange(1, mags.size + 1), mags, "o-",
                    color="tab:blue", ms=3)
    ax.set_xlabel("term rank")
    ax.set_ylabel("|coefficient|")
    return _finish(fig, path)
