"""Weak factorization of functions on the unit cube against the tent weight.

With ``lambda(t) = 1/2 - |t - 1/2|`` and ``Lambda(x) = prod_i lambda(x_i)``,
a function ``g`` sampled at ``x_j = j / G`` on ``[0, 1)^d`` is written as

    g(x) ~ sum_{|k_i| <= K} a_k exp(2 pi i k . x) Lambda(x),

where ``a_k`` are the discrete Fourier coefficients of the quotient
``q = g / Lambda``.  Each term is the closed form of the convolution
``(a_k h_k) * h_k`` with ``h_k(x) = exp(2 pi i k . x)`` on the open half cube
``(0, 1/2)^d``, which is what makes the sum a weak factorization: the nuclear
mass of the expansion is ``2^{-d} * sum_k |a_k|``.

The quotient is formed pointwise where ``Lambda > 0``.  On the boundary
planes, where ``Lambda = 0``, the samples are free (they multiply zero in
every reconstruction); they start at 0 and are then settled by
band-limited interpolation so that exactly representable quotients come out
exact.  Inputs with support margin >= 2 never exercise this: their quotient
vanishes near the boundary anyway.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InputError

_FILL_ROUNDS = 200
_FILL_TOL = 1e-14


def tent_values(d: int, g: int) -> np.ndarray:
    """``Lambda`` sampled at ``x_j = j / G`` as a ``(G,) * d`` array."""
    if d < 1 or g < 2:
        raise InputError("need d >= 1 and G >= 2")
    t = np.arange(g) / g
    lam = 0.5 - np.abs(t - 0.5)
    out = lam
    for _ in range(d - 1):
        out = np.multiply.outer(out, lam)
    return out


@dataclass(frozen=True)
class CubeFunction:
    """Samples of a function at ``x_j = j / G`` on the unit cube.

    ``margin`` declares how many cells next to the cube boundary carry only
    zeros (checked); factorization requires margin >= 2 so the tent quotient
    stays well defined.
    """

    d: int
    g: int
    margin: int
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        vals = np.ascontiguousarray(self.values, dtype=np.complex128)
        if self.d < 1 or self.g < 2:
            raise InputError("need d >= 1 and G >= 2")
        if vals.shape != (self.g,) * self.d:
            raise InputError(
                f"value array shape {vals.shape} does not match (G,)*d "
                f"= {(self.g,) * self.d}"
            )
        if not np.all(np.isfinite(vals.view(np.float64))):
            raise InputError("cube function values must be finite")
        if self.margin < 0:
            raise InputError("margin must be >= 0")
        if self.margin > 0:
            m = self.margin
            for axis in range(self.d):
                sl = [slice(None)] * self.d
                sl[axis] = np.r_[0:m, self.g - m:self.g]
                if np.any(vals[tuple(sl)] != 0):
                    raise InputError(
                        f"values within {m} cells of the boundary must vanish "
                        f"(axis {axis})"
                    )
        vals.flags.writeable = False
        object.__setattr__(self, "values", vals)

    @classmethod
    def from_callable(cls, d: int, g: int, margin: int, func) -> "CubeFunction":
        axes = [np.arange(g) / g] * d
        grids = np.meshgrid(*axes, indexing="ij")
        pts = np.stack(grids, axis=-1)
        return cls(d, g, margin, np.asarray(func(pts), dtype=np.complex128))


@dataclass(frozen=True)
class FactorTerm:
    k: tuple[int, ...]
    a: complex


@dataclass(frozen=True)
class FactorizationResult:
    """Terms of the tent expansion plus its error and mass summaries.

    ``nuclear_norm`` is ``2^{-d} * partial_l1`` exactly, the nuclear mass of
    the half-cube factorization behind the terms.
    """

    d: int
    g: int
    kmax: int
    terms: tuple[FactorTerm, ...]
    residual_sup: float
    partial_l1: float
    nuclear_norm: float

    def term_array(self) -> np.ndarray:
        side = 2 * self.kmax + 1
        arr = np.zeros((side,) * self.d, dtype=np.complex128)
        for t in self.terms:
            arr[tuple(k + self.kmax for k in t.k)] = t.a
        return arr

    def to_dict(self) -> dict:
        return {
            "d": self.d,
            "G": self.g,
            "kmax": self.kmax,
            "terms": [
                {"k": list(t.k), "re": float(t.a.real), "im": float(t.a.imag)}
                for t in self.terms
            ],
            "residual_sup": self.residual_sup,
            "partial_l1": self.partial_l1,
            "nuclear_norm": self.nuclear_norm,
        }


def _coeff_ix(kmax: int, g: int, d: int):
    pos = [np.arange(-kmax, kmax + 1) % g] * d
    return np.ix_(*pos)


def _truncated_coeffs(q: np.ndarray, kmax: int) -> np.ndarray:
    g = q.shape[0]
    full = np.fft.fftn(q) / q.size
    return full[_coeff_ix(kmax, g, q.ndim)]


def _series_values(coeffs: np.ndarray, g: int) -> np.ndarray:
    d = coeffs.ndim
    kmax = (coeffs.shape[0] - 1) // 2
    arr = np.zeros((g,) * d, dtype=np.complex128)
    arr[_coeff_ix(kmax, g, d)] = coeffs
    return np.fft.ifftn(arr) * arr.size


def weak_factorize(g: CubeFunction, kmax: int, min_margin: int = 2) -> FactorizationResult:
    """Expand ``g`` into tent-weighted exponentials with ``|k_i| <= kmax``.

    ``min_margin`` guards the boundary division; lowering it below 2 is only
    safe for inputs whose tent quotient extends smoothly across the boundary
    (the expansion then reproduces it exactly when it is band limited).
    """
    if g.margin < min_margin:
        raise InputError(
            f"support margin {g.margin} < {min_margin}: tent division is not "
            "safe near the boundary"
        )
    if 2 * kmax >= g.g:
        raise InputError(
            f"kmax {kmax} aliases on a grid of {g.g} samples; need 2*kmax < G"
        )
    if kmax < 0:
        raise InputError("kmax must be >= 0")
    lam = tent_values(g.d, g.g)
    positive = lam > 0
    if np.any((~positive) & (g.values != 0)):
        raise InputError("g does not vanish on the tent zero set; cannot divide")
    q = np.zeros_like(g.values)
    np.divide(g.values, lam, where=positive, out=q)
    free = ~positive
    if free.any():
        scale = max(1.0, float(np.abs(q).max()))
        for _ in range(_FILL_ROUNDS):
            series = _series_values(_truncated_coeffs(q, kmax), g.g)
            delta = float(np.abs(series[free] - q[free]).max())
            q[free] = series[free]
            if delta < _FILL_TOL * scale:
                break
    coeffs = _truncated_coeffs(q, kmax)
    recon = _series_values(coeffs, g.g) * lam
    residual = float(np.abs(g.values - recon).max())
    terms = []
    for pos in np.ndindex(*coeffs.shape):
        k = tuple(int(p - kmax) for p in pos)
        terms.append(FactorTerm(k, complex(coeffs[pos])))
    partial = float(np.abs(coeffs).sum())
    return FactorizationResult(
        d=g.d,
        g=g.g,
        kmax=kmax,
        terms=tuple(terms),
        residual_sup=residual,
        partial_l1=partial,
        nuclear_norm=partial / (2 ** g.d),
    )


def reconstruct(result: FactorizationResult, g: int | None = None) -> CubeFunction:
    """Evaluate ``sum_k a_k exp(2 pi i k . x) Lambda(x)`` on a sample grid.

    Closed form per term; no numerical convolution is involved.
    """
    g = result.g if g is None else int(g)
    if 2 * result.kmax >= g:
        raise InputError(f"grid of {g} samples cannot resolve kmax {result.kmax}")
    vals = _series_values(result.term_array(), g) * tent_values(result.d, g)
    return CubeFunction(result.d, g, 0, vals)


def half_cube_samples(k, g: int) -> np.ndarray:
    """``h_k`` sampled at ``j / G``: the modulated open half-cube indicator."""
    k = np.atleast_1d(np.asarray(k, dtype=np.int64))
    d = k.size
    j = np.arange(g)
    inside = (j > 0) & (2 * j < g)
    out = None
    for i in range(d):
        axis = np.exp(2j * np.pi * k[i] * j / g) * inside
        out = axis if out is None else np.multiply.outer(out, axis)
    return out


def verify_convolution_identity(k, g: int) -> float:
    """Sup error of the Riemann-sum self-convolution of ``h_k`` against the
    closed form ``exp(2 pi i k . x) Lambda(x)``.

    The Riemann sum uses spacing ``1/G``; the error is pure cell-counting at
    the indicator jumps and decays like ``d / G`` uniformly in ``k``.
    """
    from scipy.signal import fftconvolve

    k = np.atleast_1d(np.asarray(k, dtype=np.int64))
    d = k.size
    h = half_cube_samples(k, g)
    conv = fftconvolve(h, h) / (g ** d)
    m = conv.shape[0]
    x = np.arange(m) / g
    lam1 = np.where(x <= 1.0, 0.5 - np.abs(np.minimum(x, 1.0) - 0.5), 0.0)
    exact = None
    for i in range(d):
        axis = np.exp(2j * np.pi * k[i] * x) * lam1
        exact = axis if exact is None else np.multiply.outer(exact, axis)
    return float(np.abs(conv - exact).max())


def cubefunction_to_dict(g: CubeFunction) -> dict:
    flat = g.values.reshape(-1)
    return {
        "d": g.d,
        "G": g.g,
        "margin": g.margin,
        "values": [[float(v.real), float(v.imag)] for v in flat],
    }


def cubefunction_from_dict(doc: dict) -> CubeFunction:
    for key in ("d", "G", "margin", "values"):
        if key not in doc:
            raise InputError(f"cube function document missing field '{key}'")
    d = int(doc["d"])
    g = int(doc["G"])
    raw = doc["values"]
    if len(raw) != g ** d:
        raise InputError(
            f"'values' must hold G^d = {g ** d} re/im pairs, got {len(raw)}"
        )
    flat = np.empty(g ** d, dtype=np.complex128)
    for pos, pair in enumerate(raw):
        if not (isinstance(pair, (list, tuple)) and len(pair) == 2):
            raise InputError(f"values entry {pos}: expected a [re, im] pair")
        re, im = pair
        if not (math.isfinite(re) and math.isfinite(im)):
            raise InputError(f"values entry {pos}: non-finite value")
        flat[pos] = complex(re, im)
    return CubeFunction(d, g, int(doc["margin"]), flat.reshape((g,) * d))


def save_cubefunction(g: CubeFunction, path) -> None:
    with open(path, "w") as fh:
        json.dump(cubefunction_to_dict(g), fh)
        fh.write("\n")


def load_cubefunction(path) -> CubeFunction:
    with open(path) as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise InputError(f"invalid JSON in {path}: {exc}") from exc
    return cubefunction_from_dict(doc)
