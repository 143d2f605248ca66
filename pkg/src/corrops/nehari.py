"""Minimal sup-norm extension of coefficient windows, with certified bounds.

Given coefficients ``a`` on the window with radii ``N_i``, the solver seeks an
extension ``c`` supported on the larger window ``M_i >= N_i`` that agrees with
``a`` on the inner window and minimizes the maximum symbol modulus over the
evaluation grid ``theta_j = j / G_i``:

    t_grid = min_{c|_W = a} max_j |sum_n c_n exp(-2 pi i n . theta_j)|.

The reference algorithm bisects on the level ``t`` inside the bracket
``[max_n |a_n|, sum_n |a_n|]`` (both ends are exact bounds for the optimum)
and tests feasibility of each level with alternating projections between the
affine set ``{c : c|_W = a}`` (overwrite the window entries) and the sup-ball
``{c : |(U c)_j| <= t}``, where ``U`` is the scaled zero-padded transform
isometry.  Since ``U* U = I``, the sup-ball step reduces to clipping the grid
values at modulus ``t`` and transforming back.

The grid maximum is inflated to a rigorous sup bound over all of ``theta``
with the derivative estimate for trigonometric polynomials of degree
``M_i - 1`` sampled at ``G_i`` points:

    t_cert = t_grid / (1 - pi * sum_i (M_i - 1) / G_i),

valid whenever the denominator is positive (enforced at configuration time;
the default oversampling ``G_i = 8 M_i`` keeps it well away from zero).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .coeffs import MultiSequence, SymbolGrid, Window, eval_symbol
from .errors import InputError
from .norms import norm_dense, norm_iterative
from .operators import DENSE_CAP, toeplitz_matrix

DEFAULT_EXT_MULT = 4
DEFAULT_GRID_MULT = 8

ENSEMBLES = ("complex-gaussian", "real-symmetric", "pm1", "delta")


def grid_inflation(ext_radii, grid) -> float:
    """Factor turning a grid maximum into a certified sup bound.

    ``1 / (1 - pi * sum_i (M_i - 1) / G_i)``; raises when the denominator is
    not positive (grid too coarse for the window degree).
    """
    denom = 1.0 - math.pi * sum((m - 1) / g for m, g in zip(ext_radii, grid))
    if denom <= 0:
        raise InputError(
            f"grid {tuple(grid)} too coarse for extension radii "
            f"{tuple(ext_radii)}: certification denominator {denom:.3g} <= 0; "
            "raise the grid sizes"
        )
    return 1.0 / denom


def certified_sup_bound(a: MultiSequence, grid=None) -> float:
    """Certified bound on ``sup_theta |symbol of a|`` from one grid pass."""
    radii = a.window.radii
    if grid is None:
        grid = tuple(DEFAULT_GRID_MULT * r for r in radii)
    infl = grid_inflation(radii, grid)
    gmax = float(np.max(np.abs(eval_symbol(a, grid).values)))
    return gmax * infl


@dataclass(frozen=True)
class ExtensionProblem:
    """Solver configuration for one minimal sup-norm extension."""

    a: MultiSequence
    ext_radii: tuple[int, ...]
    grid: tuple[int, ...]
    tol: float = 1e-6
    max_iter: int = 1500

    def __post_init__(self):
        radii = self.a.window.radii
        ext = tuple(int(m) for m in self.ext_radii)
        grid = tuple(int(g) for g in self.grid)
        if len(ext) != self.a.d or len(grid) != self.a.d:
            raise InputError("ext_radii and grid must have one entry per axis")
        if any(m < n for m, n in zip(ext, radii)):
            raise InputError(
                f"extension radii {ext} must dominate the window radii {radii}"
            )
        if any(g < DEFAULT_GRID_MULT * m for m, g in zip(ext, grid)):
            raise InputError(
                f"grid sizes {grid} must be at least {DEFAULT_GRID_MULT}x the "
                f"extension radii {ext}"
            )
        if self.tol <= 0 or self.max_iter < 1:
            raise InputError("need tol > 0 and max_iter >= 1")
        grid_inflation(ext, grid)
        object.__setattr__(self, "ext_radii", ext)
        object.__setattr__(self, "grid", grid)

    @classmethod
    def with_defaults(
        cls,
        a: MultiSequence,
        tol: float = 1e-6,
        max_iter: int = 1500,
        ext_mult: int = DEFAULT_EXT_MULT,
        grid_mult: int = DEFAULT_GRID_MULT,
    ) -> "ExtensionProblem":
        ext = tuple(ext_mult * r for r in a.window.radii)
        grid = tuple(grid_mult * m for m in ext)
        return cls(a, ext, grid, tol, max_iter)


@dataclass(frozen=True)
class ExtensionResult:
    """Solved extension: coefficients on the large window plus certificates."""

    coeffs: MultiSequence
    t_grid: float
    t_cert: float
    window_residual: float
    iterations: int
    converged: bool

    def to_dict(self) -> dict:
        from .coeffs import multisequence_to_dict

        return {
            "t_grid": self.t_grid,
            "t_cert": self.t_cert,
            "window_residual": self.window_residual,
            "iterations": self.iterations,
            "converged": self.converged,
            "coeffs": multisequence_to_dict(self.coeffs),
        }


class _GridTransform:
    """Zero-padded transform between an extension window and its grid."""

    def __init__(self, ext_radii, grid):
        self.grid = tuple(grid)
        pos = [np.arange(-m + 1, m) % g for m, g in zip(ext_radii, grid)]
        self.ix = np.ix_(*pos)

    def eval(self, c: np.ndarray) -> np.ndarray:
        arr = np.zeros(self.grid, dtype=np.complex128)
        arr[self.ix] = c
        return np.fft.fftn(arr)

    def restrict(self, v: np.ndarray) -> np.ndarray:
        return np.fft.ifftn(v)[self.ix]


def _window_slices(ext_radii, radii) -> tuple[slice, ...]:
    return tuple(
        slice(m - n, m - n + 2 * n - 1) for m, n in zip(ext_radii, radii)
    )


def _probe(transform, c0, a, wsl, t, tol, max_iter):
    """Alternating projections at level ``t``.

    Returns ``(feasible, c, iters, window_residual)``.  Feasible means the
    per-cycle movement dropped below ``tol * t``.  A stall cutoff declares
    infeasibility early when the movement stops shrinking well above the
    threshold.
    """
    c = c0.copy()
    resid = 0.0
    history: list[float] = []
    for it in range(1, max_iter + 1):
        v = transform.eval(c)
        m = np.abs(v)
        over = m > t
        if not over.any():
            return True, c, it, resid
        np.divide(t, m, where=over, out=m)
        v[over] *= m[over]
        c2 = transform.restrict(v)
        resid = float(np.max(np.abs(c2[wsl] - a)))
        c2[wsl] = a
        dist = float(np.linalg.norm(c2 - c))
        c = c2
        if dist < tol * t:
            return True, c, it, resid
        history.append(dist)
        if len(history) > 30 and dist > (1.0 - 0.02) * history[-26]:
            return False, c, it, resid
    return False, c, max_iter, resid


def min_linf_extension(problem: ExtensionProblem) -> ExtensionResult:
    """Solve the minimal sup-norm extension problem by bisection.

    The returned coefficients agree with the inner window exactly (final
    affine projection); ``t_grid`` is recomputed from them, and ``t_cert``
    applies the grid inflation factor.
    """
    a = problem.a.coeffs
    ext = problem.ext_radii
    wsl = _window_slices(ext, problem.a.window.radii)
    transform = _GridTransform(ext, problem.grid)
    absa = np.abs(a)
    t_lo = float(absa.max())
    t_hi = float(absa.sum())
    shape = tuple(2 * m - 1 for m in ext)
    c = np.zeros(shape, dtype=np.complex128)
    c[wsl] = a
    total_iters = 0
    residual = 0.0
    converged = True
    if t_hi == 0.0:
        t_grid = 0.0
    else:
        while t_hi - t_lo > problem.tol:
            mid = 0.5 * (t_lo + t_hi)
            ok, cand, iters, resid = _probe(
                transform, c, a, wsl, mid, problem.tol, problem.max_iter
            )
            total_iters += iters
            if ok:
                t_hi = mid
                c = cand
                residual = resid
            else:
                t_lo = mid
        # Re-verify the final level from the current iterate so the reported
        # coefficients witness t_grid <= t_hi up to tolerance.
        ok, cand, iters, resid = _probe(
            transform, c, a, wsl, t_hi, problem.tol, problem.max_iter
        )
        total_iters += iters
        if ok:
            c = cand
            residual = resid
        else:
            converged = False
        c[wsl] = a
        t_grid = float(np.max(np.abs(transform.eval(c))))
    infl = grid_inflation(ext, problem.grid)
    coeffs = MultiSequence(Window(ext), c)
    return ExtensionResult(
        coeffs=coeffs,
        t_grid=t_grid,
        t_cert=t_grid * infl,
        window_residual=residual,
        iterations=total_iters,
        converged=converged,
    )


def _section_norm(a: MultiSequence, size, tol: float = 1e-9, seed: int = 7) -> float:
    op = toeplitz_matrix(a, size)
    rows, cols = op.shape
    if rows * cols <= DENSE_CAP:
        return norm_dense(op)
    return norm_iterative(op, tol=tol, seed=seed).value


@dataclass(frozen=True)
class CertifiedExtension:
    """Extension result paired with the finite-section norm it must dominate."""

    extension: ExtensionResult
    section_norm: float
    ratio: float
    checked_sections: tuple[tuple[int, float], ...]


def extend_and_certify(
    a: MultiSequence,
    tol: float = 1e-6,
    max_iter: int = 1500,
    ext_mult: int = DEFAULT_EXT_MULT,
    grid_mult: int = DEFAULT_GRID_MULT,
) -> CertifiedExtension:
    """Solve the extension and compare ``t_cert`` with the section norm.

    The section size is the window radius vector of ``a``; sections of the
    extension up to four times that size are checked against ``t_cert`` (they
    are compressions of the symbol, so the certified sup bound dominates
    them).
    """
    problem = ExtensionProblem.with_defaults(
        a, tol=tol, max_iter=max_iter, ext_mult=ext_mult, grid_mult=grid_mult
    )
    result = min_linf_extension(problem)
    n = a.window.radii
    section = _section_norm(a, n)
    ratio = result.t_cert / section if section > 0 else math.inf
    checked = []
    for mult in range(1, 5):
        size = tuple(mult * k for k in n)
        checked.append((mult, _section_norm(result.coeffs, size)))
    return CertifiedExtension(
        extension=result,
        section_norm=section,
        ratio=ratio,
        checked_sections=tuple(checked),
    )


def _draw_coeffs(rng: np.random.Generator, radii, ensemble: str) -> MultiSequence:
    w = Window(tuple(radii))
    shape = w.shape
    if ensemble == "complex-gaussian":
        arr = (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2)
    elif ensemble == "real-symmetric":
        arr = rng.standard_normal(shape).astype(np.complex128)
        arr = 0.5 * (arr + arr[(slice(None, None, -1),) * w.d])
    elif ensemble == "pm1":
        arr = rng.choice([-1.0, 1.0], size=shape).astype(np.complex128)
    elif ensemble == "delta":
        arr = np.zeros(shape, dtype=np.complex128)
        arr[tuple(r - 1 for r in w.radii)] = 1.0
    else:
        raise InputError(f"unknown ensemble {ensemble!r}; expected one of {ENSEMBLES}")
    return MultiSequence(w, arr)


@dataclass(frozen=True)
class SweepReport:
    """Aggregated ratios ``t_cert / section_norm`` over random trials."""

    d: int
    radii: tuple[int, ...]
    trials: int
    seed: int
    ensemble: str
    rows: tuple[dict, ...]
    excluded: int

    @property
    def ratios(self) -> np.ndarray:
        return np.array([r["ratio"] for r in self.rows])

    @property
    def max_ratio(self) -> float:
        return float(self.ratios.max()) if self.rows else math.nan

    @property
    def median_ratio(self) -> float:
        return float(np.median(self.ratios)) if self.rows else math.nan

    def to_dict(self) -> dict:
        return {
            "d": self.d,
            "radii": list(self.radii),
            "trials": self.trials,
            "seed": self.seed,
            "ensemble": self.ensemble,
            "excluded": self.excluded,
            "max_ratio": self.max_ratio,
            "median_ratio": self.median_ratio,
        }


def _sweep_trial(args):
    trial, seed, radii, ensemble, tol, max_iter, ext_mult, grid_mult = args
    trial_seed = seed ^ trial
    rng = np.random.default_rng(trial_seed)
    a = _draw_coeffs(rng, radii, ensemble)
    cert = extend_and_certify(
        a, tol=tol, max_iter=max_iter, ext_mult=ext_mult, grid_mult=grid_mult
    )
    return {
        "trial": trial,
        "seed": trial_seed,
        "section_norm": cert.section_norm,
        "t_cert": cert.extension.t_cert,
        "ratio": cert.ratio,
        "converged": cert.extension.converged,
    }


def sweep_constant(
    d: int,
    n: int,
    trials: int,
    seed: int = 0,
    ensemble: str = "complex-gaussian",
    tol: float = 1e-6,
    max_iter: int = 1500,
    ext_mult: int = DEFAULT_EXT_MULT,
    grid_mult: int = DEFAULT_GRID_MULT,
    workers: int = 1,
) -> SweepReport:
    """Ratio sweep over random coefficient draws.

    Trials use the derived seeds ``seed ^ trial`` so results do not depend on
    scheduling; non-convergent trials are recorded in ``excluded`` and left
    out of the aggregates.
    """
    if ensemble not in ENSEMBLES:
        raise InputError(f"unknown ensemble {ensemble!r}; expected one of {ENSEMBLES}")
    radii = (int(n),) * int(d)
    jobs = [
        (t, seed, radii, ensemble, tol, max_iter, ext_mult, grid_mult)
        for t in range(trials)
    ]
    if workers > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_sweep_trial, jobs))
    else:
        results = [_sweep_trial(j) for j in jobs]
    results.sort(key=lambda r: r["trial"])
    kept = tuple(r for r in results if r["converged"])
    return SweepReport(
        d=int(d),
        radii=radii,
        trials=trials,
        seed=seed,
        ensemble=ensemble,
        rows=kept,
        excluded=trials - len(kept),
    )


def section_norm_growth(a: MultiSequence, sizes, tol: float = 1e-9, seed: int = 7):
    """Norms of the Toeplitz sections of ``a`` at the given cube sizes.

    Sections are nested compressions of one symbol, so the sequence is
    nondecreasing up to numerical tolerance and every value stays below a
    certified sup bound of the symbol.
    """
    return [float(_section_norm(a, s, tol=tol, seed=seed)) for s in sizes]
