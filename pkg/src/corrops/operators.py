"""Truncated correlation operators on lattice masks.

Given a kernel ``f`` on an integer box and masks ``upsilon`` (input) and
``xi`` (output), the two flavors are

    psi:    (A g)(x) = sum_{y in upsilon} f(x + y) g(y)
    theta:  (A g)(x) = sum_{y in upsilon} f(x - y) g(y)

The Hankel case is psi with equal masks; theta gives Toeplitz sections on
cubes.  ``apply`` runs one zero-padded FFT convolution for both flavors (psi
convolves against the index-reversed input), and ``materialize_dense`` is the
direct oracle used to cross-check it.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy import fft as sfft

from .coeffs import MultiSequence, _entry_value
from .errors import InputError, ResourceError
from .geometry import GridMask

# Cap on dense materializations, in matrix entries.
DENSE_CAP = 4_000_000

FLAVORS = ("psi", "theta")


@dataclass(frozen=True)
class Kernel:
    """Complex values on the integer box ``lo .. lo + shape - 1``.

    Lookups outside the box are zero.
    """

    lo: np.ndarray = field(repr=False)
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        lo = np.ascontiguousarray(self.lo, dtype=np.int64)
        vals = np.ascontiguousarray(self.values, dtype=np.complex128)
        if lo.ndim != 1 or vals.ndim != lo.size:
            raise InputError("kernel box rank does not match value array rank")
        if not np.all(np.isfinite(vals.view(np.float64))):
            raise InputError("kernel values must be finite")
        lo.flags.writeable = False
        vals.flags.writeable = False
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "values", vals)

    @property
    def d(self) -> int:
        return self.lo.size

    @property
    def hi(self) -> np.ndarray:
        return self.lo + np.array(self.values.shape, dtype=np.int64) - 1

    @classmethod
    def delta(cls, index, d: int | None = None, value: complex = 1.0) -> "Kernel":
        idx = np.atleast_1d(np.asarray(index, dtype=np.int64))
        if d is not None and idx.size != d:
            raise InputError(f"delta index must have {d} components")
        return cls(idx, np.full((1,) * idx.size, value, dtype=np.complex128))

    def value_at(self, index) -> complex:
        pos = np.asarray(index, dtype=np.int64) - self.lo
        if np.any(pos < 0) or np.any(pos >= np.array(self.values.shape)):
            return 0.0 + 0.0j
        return complex(self.values[tuple(pos)])

    def shift(self, offset) -> "Kernel":
        """Kernel ``x -> f(x + offset)``."""
        off = np.asarray(offset, dtype=np.int64)
        return Kernel(self.lo - off, self.values)

    def conj_reflect(self) -> "Kernel":
        """Kernel ``x -> conj(f(-x))``."""
        rev = np.conj(self.values[(slice(None, None, -1),) * self.d])
        return Kernel(-self.hi, rev)


class _ConvPlan:
    """Cached zero-padded FFT of a fixed kernel against a fixed input box."""

    def __init__(self, kernel_values: np.ndarray, in_shape: tuple[int, ...]):
        full = [a + b - 1 for a, b in zip(kernel_values.shape, in_shape)]
        self.fshape = tuple(sfft.next_fast_len(n) for n in full)
        self.out_shape = tuple(full)
        self.kernel_fft = sfft.fftn(kernel_values, self.fshape)
        self.slices = tuple(slice(0, n) for n in full)

    def convolve(self, dense_in: np.ndarray) -> np.ndarray:
        other = sfft.fftn(dense_in, self.fshape)
        out = sfft.ifftn(self.kernel_fft * other)
        return out[self.slices]


@dataclass(frozen=True)
class CorrelationOperator:
    """Truncated correlation operator ``g -> sum_y f(x +/- y) g(y)``.

    Input vectors are indexed by the row-major cell order of ``input_mask``;
    outputs follow ``output_mask`` the same way.
    """

    kernel: Kernel
    input_mask: GridMask
    output_mask: GridMask
    flavor: str = "psi"

    def __post_init__(self):
        if self.flavor not in FLAVORS:
            raise InputError(f"flavor must be one of {FLAVORS}, got {self.flavor!r}")
        if not (self.kernel.d == self.input_mask.d == self.output_mask.d):
            raise InputError("kernel and masks must share the dimension")
        if self.input_mask.spacing != self.output_mask.spacing:
            raise InputError("input and output masks must share the spacing")

    @property
    def d(self) -> int:
        return self.kernel.d

    @property
    def shape(self) -> tuple[int, int]:
        return (self.output_mask.n_cells, self.input_mask.n_cells)

    @cached_property
    def _plan(self):
        g_shape = self.input_mask.cells.shape
        plan = _ConvPlan(self.kernel.values, g_shape)
        # Box origin of the full convolution output, per flavor.
        if self.flavor == "theta":
            res_lo = self.kernel.lo + self.input_mask.lo
        else:
            in_hi = self.input_mask.lo + np.array(g_shape, dtype=np.int64) - 1
            res_lo = self.kernel.lo - in_hi
        out_idx = self.output_mask.indices()
        pos = out_idx - res_lo
        shape = np.array(plan.out_shape, dtype=np.int64)
        valid = np.all((pos >= 0) & (pos < shape), axis=1)
        flat = np.ravel_multi_index(tuple(pos[valid].T), plan.out_shape)
        return plan, valid, flat

    def apply(self, g: np.ndarray) -> np.ndarray:
        """Apply to a vector over the input mask cells (row-major order)."""
        g = np.asarray(g, dtype=np.complex128)
        if g.shape != (self.input_mask.n_cells,):
            raise InputError(
                f"input vector must have shape ({self.input_mask.n_cells},)"
            )
        dense = np.zeros(self.input_mask.cells.shape, dtype=np.complex128)
        dense[self.input_mask.cells] = g
        if self.flavor == "psi":
            dense = dense[(slice(None, None, -1),) * self.d]
        plan, valid, flat = self._plan
        full = plan.convolve(dense)
        out = np.zeros(self.output_mask.n_cells, dtype=np.complex128)
        out[valid] = full.reshape(-1)[flat]
        return out

    def adjoint(self) -> "CorrelationOperator":
        """Operator whose dense matrix is the conjugate transpose."""
        if self.flavor == "psi":
            kern = Kernel(self.kernel.lo, np.conj(self.kernel.values))
        else:
            kern = self.kernel.conj_reflect()
        return CorrelationOperator(kern, self.output_mask, self.input_mask, self.flavor)

    def materialize_dense(self, cap: int = DENSE_CAP) -> np.ndarray:
        """Dense matrix ``M[x, y] = f(x +/- y)``; the apply oracle."""
        rows, cols = self.shape
        if rows * cols > cap:
            raise ResourceError(
                f"dense materialization of {rows * cols} entries exceeds cap {cap}"
            )
        x = self.output_mask.indices()
        y = self.input_mask.indices()
        s = x[:, None, :] + y[None, :, :] if self.flavor == "psi" else x[:, None, :] - y[None, :, :]
        pos = s - self.kernel.lo
        shape = np.array(self.kernel.values.shape, dtype=np.int64)
        valid = np.all((pos >= 0) & (pos < shape), axis=2)
        flat = np.ravel_multi_index(tuple(pos[valid].T), self.kernel.values.shape)
        out = np.zeros((rows, cols), dtype=np.complex128)
        out[valid] = self.kernel.values.reshape(-1)[flat]
        return out


def kernel_from_sequence(a: MultiSequence) -> Kernel:
    """Kernel on the symmetric window box of ``a``."""
    lo = np.array([-(r - 1) for r in a.window.radii], dtype=np.int64)
    return Kernel(lo, a.coeffs)


def toeplitz_matrix(a: MultiSequence, n) -> CorrelationOperator:
    """Multi-level Toeplitz section ``v(m) -> sum_n a_{m-n} v(n)`` on the cube
    ``{0..N_i-1}^d``.

    When the window radii fall short of ``N_i`` the missing coefficients
    default to zero and a warning is issued.
    """
    if np.isscalar(n):
        n = (int(n),) * a.d
    n = tuple(int(k) for k in n)
    if len(n) != a.d or any(k < 1 for k in n):
        raise InputError(f"cube sizes must be {a.d} integers >= 1, got {n}")
    if any(r < k for r, k in zip(a.window.radii, n)):
        warnings.warn(
            "window radii are smaller than the section size; missing "
            "coefficients default to 0",
            stacklevel=2,
        )
    lo = np.array([-(k - 1) for k in n], dtype=np.int64)
    vals = np.zeros(tuple(2 * k - 1 for k in n), dtype=np.complex128)
    src = [np.arange(max(-(r - 1), -(k - 1)), min(r, k)) for r, k in zip(a.window.radii, n)]
    dst = [s + k - 1 for s, k in zip(src, n)]
    win = [s + r - 1 for s, r in zip(src, a.window.radii)]
    vals[np.ix_(*dst)] = a.coeffs[np.ix_(*win)]
    mask = GridMask.box(np.zeros(a.d, dtype=np.int64), np.array(n) - 1)
    return CorrelationOperator(Kernel(lo, vals), mask, mask, "theta")


def hankel_toeplitz_flip(f: Kernel, xi: GridMask, two_z):
    """Rewrite the theta operator on ``xi`` as a psi operator.

    Requires the mask to satisfy ``xi + z = -xi - z`` where ``two_z = 2 z`` is
    integral (half-integer centers are handled by doubling the lattice, hence
    the ``two_z`` parameter).  Returns ``(f_tilde, perm)`` with
    ``f_tilde(x) = f(x + 2 z)`` and ``perm`` the input reflection
    ``(R g)[i] = g[perm[i]]`` realizing ``theta_f g = psi_{f_tilde} (R g)``
    entry for entry.
    """
    two_z = np.asarray(two_z, dtype=np.int64)
    if two_z.shape != (f.d,):
        raise InputError(f"two_z must have {f.d} components")
    idx = xi.indices()
    reflected = -idx - two_z
    order = np.lexsort(idx.T[::-1])
    rorder = np.lexsort(reflected.T[::-1])
    if not np.array_equal(idx[order], reflected[rorder]):
        raise InputError("mask is not symmetric about -two_z / 2")
    # Position of each reflected cell in the row-major cell order.
    lookup = {tuple(k): i for i, k in enumerate(idx)}
    perm = np.array([lookup[tuple(k)] for k in reflected], dtype=np.int64)
    return f.shift(two_z), perm


@dataclass(frozen=True)
class MollifierSpec:
    """Smoothing data: a base stencil ``psi``, window bump, and cutoff.

    ``psi`` is a 1-d odd-length nonnegative array summing to one; the
    ``d``-dimensional stencil is its separable product.  At scale ``n`` the
    stencil is coarsened by mass-preserving binning (entry ``j`` lands in bin
    ``rint(j / n)``), so its radius shrinks roughly like ``r / n`` and large
    ``n`` yields the delta stencil.  ``omega`` is evaluated at ``x / n`` and
    must satisfy ``omega(0) = 1``; ``rho`` is a boolean cutoff predicate.
    Both take an ``(..., d)`` point array; ``None`` means identically 1/True.
    """

    n: int
    psi: np.ndarray = field(repr=False)
    omega: object = None
    rho: object = None

    def __post_init__(self):
        if self.n < 1:
            raise InputError("mollifier scale n must be >= 1")
        psi = np.ascontiguousarray(self.psi, dtype=float)
        if psi.ndim != 1 or psi.size % 2 == 0:
            raise InputError("psi must be a 1-d odd-length stencil")
        if np.any(psi < 0) or abs(psi.sum() - 1.0) > 1e-12:
            raise InputError("psi must be nonnegative and sum to 1")
        psi.flags.writeable = False
        object.__setattr__(self, "psi", psi)
        if self.omega is not None:
            probe = np.asarray(self.omega(np.zeros((1, 1))), dtype=complex)
            if abs(complex(probe.ravel()[0]) - 1.0) > 1e-12:
                raise InputError("omega(0) must equal 1")

    def stencil_1d(self) -> np.ndarray:
        """The scale-``n`` stencil: base entries binned at stride ``n``."""
        r = (self.psi.size - 1) // 2
        src = np.arange(-r, r + 1)
        dst = np.rint(src / self.n).astype(np.int64)
        rn = int(np.abs(dst).max()) if self.psi.size > 1 else 0
        out = np.zeros(2 * rn + 1)
        np.add.at(out, dst + rn, self.psi)
        return out

    @classmethod
    def uniform(cls, n: int = 1, radius: int = 1, **kw) -> "MollifierSpec":
        width = 2 * radius + 1
        return cls(n, np.full(width, 1.0 / width), **kw)


def mollify(f: Kernel, spec: MollifierSpec) -> Kernel:
    """Smooth, cut off, and window a kernel: ``omega_n * rho * (f * psi_n)``."""
    st1 = spec.stencil_1d()
    rn = (st1.size - 1) // 2
    if rn == 0:
        vals = f.values.copy()
    else:
        stencil = st1
        for _ in range(f.d - 1):
            stencil = np.multiply.outer(stencil, st1)
        from scipy.signal import fftconvolve

        vals = fftconvolve(f.values, stencil.astype(np.complex128))
    lo = f.lo - rn
    if spec.rho is not None or spec.omega is not None:
        axes = [np.arange(a, a + s) for a, s in zip(lo, vals.shape)]
        grids = np.meshgrid(*axes, indexing="ij")
        pts = np.stack(grids, axis=-1).astype(float)
        if spec.rho is not None:
            vals = vals * np.asarray(spec.rho(pts), dtype=bool)
        if spec.omega is not None:
            vals = vals * np.asarray(spec.omega(pts / spec.n), dtype=np.complex128)
    return Kernel(lo, vals)


def modulate(f: Kernel, mu: np.ndarray) -> Kernel:
    """Pointwise product ``mu * f``; shapes must match the kernel box."""
    mu = np.asarray(mu, dtype=np.complex128)
    if mu.shape != f.values.shape:
        raise InputError(
            f"modulation array shape {mu.shape} does not match kernel box "
            f"shape {f.values.shape}"
        )
    return Kernel(f.lo, f.values * mu)


def fourier_l1(mu: np.ndarray) -> float:
    """Sum of absolute discrete Fourier coefficients of ``mu`` over its
    periodized box.

    With ``mu[x] = sum_k muhat_k exp(2 pi i k . x / B)`` this returns
    ``sum_k |muhat_k|``, the modulation-bound constant.
    """
    mu = np.asarray(mu, dtype=np.complex128)
    return float(np.abs(np.fft.fftn(mu)).sum() / mu.size)


def kernel_to_dict(f: Kernel) -> dict:
    entries = []
    for pos in np.ndindex(*f.values.shape):
        idx = [int(p + l) for p, l in zip(pos, f.lo)]
        v = f.values[pos]
        entries.append({"index": idx, "re": float(v.real), "im": float(v.imag)})
    return {
        "d": f.d,
        "lo": f.lo.tolist(),
        "hi": f.hi.tolist(),
        "values": entries,
    }


def kernel_from_dict(doc: dict) -> Kernel:
    for key in ("d", "lo", "hi", "values"):
        if key not in doc:
            raise InputError(f"kernel document missing field '{key}'")
    d = int(doc["d"])
    lo = np.asarray(doc["lo"], dtype=np.int64)
    hi = np.asarray(doc["hi"], dtype=np.int64)
    if lo.shape != (d,) or hi.shape != (d,) or np.any(hi < lo):
        raise InputError("kernel box must satisfy lo <= hi with d entries each")
    vals = np.zeros(tuple((hi - lo + 1).tolist()), dtype=np.complex128)
    seen: set[tuple[int, ...]] = set()
    for pos, entry in enumerate(doc["values"]):
        if not isinstance(entry, dict) or "index" not in entry:
            raise InputError(f"kernel entry {pos}: expected object with 'index'")
        idx = tuple(int(k) for k in entry["index"])
        arr_pos = tuple(np.asarray(idx) - lo)
        if any(p < 0 or p >= s for p, s in zip(arr_pos, vals.shape)):
            raise InputError(f"kernel entry {pos}: index {idx} outside box")
        if idx in seen:
            raise InputError(f"kernel entry {pos}: duplicate index {idx}")
        seen.add(idx)
        vals[arr_pos] = _entry_value(entry, "kernel", pos)
    return Kernel(lo, vals)


def save_kernel(f: Kernel, path) -> None:
    with open(path, "w") as fh:
        json.dump(kernel_to_dict(f), fh, indent=1)
        fh.write("\n")


def load_kernel(path) -> Kernel:
    with open(path) as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise InputError(f"invalid JSON in {path}: {exc}") from exc
    return kernel_from_dict(doc)
