"""Multi-indexed coefficient windows and their symbols on uniform grids.

A coefficient family ``a`` lives on a symmetric window ``{-N_i+1, ..., N_i-1}``
per axis.  Its symbol is evaluated on the uniform grid ``theta_j = j / G``
(left-closed, ``j = 0..G_i-1``) with the project-wide sign convention

    values[j] = sum_n a_n * exp(-2*pi*i * n . theta_j).

Evaluation zero-pads (or folds, when the grid is shorter than the window) into
a length-``G`` array and runs an FFT, so it agrees with the direct double sum
to machine precision.  The inverse direction requires an alias-free grid,
``G_i >= 2*N_i - 1``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InputError, ResourceError

# Hard cap on the number of grid points a symbol evaluation may produce.
GRID_CAP = 1 << 26


@dataclass(frozen=True)
class Window:
    """Symmetric index window with per-axis radii ``N_i >= 1``.

    Axis ``i`` covers the integers ``-N_i+1 .. N_i-1``; the window holds
    ``prod(2*N_i - 1)`` indices in total.
    """

    radii: tuple[int, ...]

    def __post_init__(self):
        if len(self.radii) == 0:
            raise InputError("window needs at least one axis")
        if any((not isinstance(r, int)) or r < 1 for r in self.radii):
            raise InputError(f"window radii must be integers >= 1, got {self.radii}")

    @property
    def d(self) -> int:
        return len(self.radii)

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(2 * r - 1 for r in self.radii)

    @property
    def size(self) -> int:
        return math.prod(self.shape)

    def contains(self, index) -> bool:
        return len(index) == self.d and all(
            -r < k < r for k, r in zip(index, self.radii)
        )

    def index_arrays(self) -> list[np.ndarray]:
        """Per-axis integer index ranges, ``[-N_i+1, ..., N_i-1]``."""
        return [np.arange(-r + 1, r) for r in self.radii]


@dataclass(frozen=True)
class MultiSequence:
    """Coefficients on a :class:`Window`, stored row-major with index 0 at the
    array center."""

    window: Window
    coeffs: np.ndarray = field(repr=False)

    def __post_init__(self):
        arr = np.ascontiguousarray(self.coeffs, dtype=np.complex128)
        if arr.shape != self.window.shape:
            raise InputError(
                f"coefficient array shape {arr.shape} does not match window "
                f"shape {self.window.shape}"
            )
        if not np.all(np.isfinite(arr.view(np.float64))):
            raise InputError("coefficients must be finite (no NaN/Inf)")
        arr.flags.writeable = False
        object.__setattr__(self, "coeffs", arr)

    @classmethod
    def zeros(cls, radii) -> "MultiSequence":
        w = Window(tuple(int(r) for r in radii))
        return cls(w, np.zeros(w.shape, dtype=np.complex128))

    @classmethod
    def from_entries(cls, radii, entries) -> "MultiSequence":
        """Build from ``{index_tuple: value}``; omitted indices are 0."""
        w = Window(tuple(int(r) for r in radii))
        arr = np.zeros(w.shape, dtype=np.complex128)
        for idx, val in entries.items():
            if not w.contains(idx):
                raise InputError(f"index {tuple(idx)} outside window radii {w.radii}")
            pos = tuple(k + r - 1 for k, r in zip(idx, w.radii))
            arr[pos] = val
        return cls(w, arr)

    def get(self, index) -> complex:
        if not self.window.contains(index):
            return 0.0 + 0.0j
        pos = tuple(k + r - 1 for k, r in zip(index, self.window.radii))
        return complex(self.coeffs[pos])

    @property
    def d(self) -> int:
        return self.window.d


@dataclass(frozen=True)
class SymbolGrid:
    """Symbol values on the uniform grid ``theta_j = j / G`` (row-major)."""

    sizes: tuple[int, ...]
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        arr = np.ascontiguousarray(self.values, dtype=np.complex128)
        if arr.shape != tuple(self.sizes):
            raise InputError(
                f"value array shape {arr.shape} does not match grid sizes {self.sizes}"
            )
        arr.flags.writeable = False
        object.__setattr__(self, "values", arr)

    @property
    def d(self) -> int:
        return len(self.sizes)


def _check_sizes(sizes, d) -> tuple[int, ...]:
    sizes = tuple(int(g) for g in sizes)
    if len(sizes) != d:
        raise InputError(f"expected {d} grid sizes, got {len(sizes)}")
    if any(g < 1 for g in sizes):
        raise InputError(f"grid sizes must be >= 1, got {sizes}")
    if math.prod(sizes) > GRID_CAP:
        raise ResourceError(
            f"grid with {math.prod(sizes)} points exceeds cap {GRID_CAP}"
        )
    return sizes


def eval_symbol(a: MultiSequence, sizes) -> SymbolGrid:
    """Evaluate the symbol of ``a`` on the grid ``theta_j = j / G``.

    The coefficients are accumulated into a ``G``-shaped array at positions
    ``n mod G`` and transformed with an FFT.  Folding makes the result exact
    for any ``G_i >= 1``, including grids shorter than the window.
    """
    sizes = _check_sizes(sizes, a.d)
    folded = np.zeros(sizes, dtype=np.complex128)
    pos = [idx % g for idx, g in zip(a.window.index_arrays(), sizes)]
    np.add.at(folded, np.ix_(*pos), a.coeffs)
    return SymbolGrid(sizes, np.fft.fftn(folded))


def coeffs_from_grid(values: SymbolGrid, window: Window) -> MultiSequence:
    """Inverse of :func:`eval_symbol` on an alias-free grid.

    Requires ``G_i >= 2*N_i - 1`` so that distinct window indices occupy
    distinct grid frequencies.
    """
    if values.d != window.d:
        raise InputError("grid dimension does not match window dimension")
    for g, r in zip(values.sizes, window.radii):
        if g < 2 * r - 1:
            raise InputError(
                f"grid size {g} is below the alias-free bound {2 * r - 1} for "
                f"window radius {r}"
            )
    full = np.fft.ifftn(values.values)
    pos = [idx % g for idx, g in zip(window.index_arrays(), values.sizes)]
    return MultiSequence(window, full[np.ix_(*pos)])


def _entry_value(entry, what: str, pos: int) -> complex:
    re = entry.get("re", 0.0)
    im = entry.get("im", 0.0)
    if not (isinstance(re, (int, float)) and isinstance(im, (int, float))):
        raise InputError(f"{what} entry {pos}: 're'/'im' must be numbers")
    if not (math.isfinite(re) and math.isfinite(im)):
        raise InputError(f"{what} entry {pos}: non-finite value")
    return complex(re, im)


def multisequence_to_dict(a: MultiSequence) -> dict:
    entries = []
    for idx in np.ndindex(*a.window.shape):
        n = tuple(int(k - r + 1) for k, r in zip(idx, a.window.radii))
        v = a.coeffs[idx]
        entries.append({"index": list(n), "re": float(v.real), "im": float(v.imag)})
    return {"d": a.d, "radii": list(a.window.radii), "coeffs": entries}


def multisequence_from_dict(doc: dict) -> MultiSequence:
    if not isinstance(doc, dict):
        raise InputError("multisequence document must be a JSON object")
    for key in ("d", "radii", "coeffs"):
        if key not in doc:
            raise InputError(f"multisequence document missing field '{key}'")
    d = doc["d"]
    radii = doc["radii"]
    if not (isinstance(radii, list) and len(radii) == d):
        raise InputError(f"'radii' must be a list of length d={d}")
    w = Window(tuple(int(r) for r in radii))
    arr = np.zeros(w.shape, dtype=np.complex128)
    seen: set[tuple[int, ...]] = set()
    for pos, entry in enumerate(doc["coeffs"]):
        if not isinstance(entry, dict) or "index" not in entry:
            raise InputError(f"coeffs entry {pos}: expected object with 'index'")
        idx = tuple(int(k) for k in entry["index"])
        if not w.contains(idx):
            raise InputError(
                f"coeffs entry {pos}: index {idx} outside window radii {w.radii}"
            )
        if idx in seen:
            raise InputError(f"coeffs entry {pos}: duplicate index {idx}")
        seen.add(idx)
        apos = tuple(k + r - 1 for k, r in zip(idx, w.radii))
        arr[apos] = _entry_value(entry, "coeffs", pos)
    return MultiSequence(w, arr)


def save_multisequence(a: MultiSequence, path) -> None:
    with open(path, "w") as fh:
        json.dump(multisequence_to_dict(a), fh, indent=1)
        fh.write("\n")


def load_multisequence(path) -> MultiSequence:
    with open(path) as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise InputError(f"invalid JSON in {path}: {exc}") from exc
    return multisequence_from_dict(doc)
