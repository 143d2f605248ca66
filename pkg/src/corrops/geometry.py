"""Convex polytopes, lattice masks, and the partitions of unity built on them.

Polytopes are given by both a vertex list and a facet list; each facet is a
halfspace ``x . normal >= offset`` that contains the polytope and must be
tight at ``d`` or more vertices.  Masks are boolean cell arrays on an integer
lattice with spacing ``h``: cell ``k`` sits at the point ``origin + k * h``.
Rasterization keeps the cells whose centers lie strictly inside the open
interior.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

from .errors import GeometryError, InputError, ResourceError

TOL = 1e-9

# Cap on rasterized cell counts.
MASK_CAP = 1 << 22

DOMAIN_KINDS = ("bounded-mask", "orthant-sandwiched")


@dataclass(frozen=True)
class Polytope:
    """Bounded convex polytope with explicit vertex and facet data.

    ``normals`` has one row per facet; facet ``j`` is the halfspace
    ``x . normals[j] >= offsets[j]``.  Validation checks that every vertex
    satisfies every halfspace within ``TOL``, that no facet normal is
    degenerate, that facets are tight at >= d vertices, and that vertices are
    distinct.  Boundedness is carried by the vertex list: the polytope is the
    convex hull of ``vertices``.
    """

    vertices: np.ndarray = field(repr=False)
    normals: np.ndarray = field(repr=False)
    offsets: np.ndarray = field(repr=False)

    def __post_init__(self):
        v = np.ascontiguousarray(self.vertices, dtype=float)
        n = np.ascontiguousarray(self.normals, dtype=float)
        r = np.ascontiguousarray(self.offsets, dtype=float)
        if v.ndim != 2 or v.shape[0] < 1:
            raise GeometryError("vertices must be a nonempty (J, d) array")
        d = v.shape[1]
        if n.ndim != 2 or n.shape[1] != d or r.shape != (n.shape[0],):
            raise GeometryError("facet arrays must be (F, d) normals and (F,) offsets")
        if not (np.all(np.isfinite(v)) and np.all(np.isfinite(n)) and np.all(np.isfinite(r))):
            raise GeometryError("polytope data must be finite")
        norms = np.linalg.norm(n, axis=1)
        if np.any(norms <= TOL):
            raise GeometryError("degenerate facet normal (norm ~ 0)")
        slack = v @ n.T - r[None, :]
        if slack.min() < -TOL:
            j, f = np.unravel_index(np.argmin(slack), slack.shape)
            raise GeometryError(
                f"vertex {j} violates facet {f} by {-slack[j, f]:.3e}"
            )
        tight = np.abs(slack) <= TOL
        weak = np.flatnonzero(tight.sum(axis=0) < d)
        if weak.size:
            raise GeometryError(
                f"facet {weak[0]} is tight at fewer than d={d} vertices"
            )
        diff = v[:, None, :] - v[None, :, :]
        dist = np.linalg.norm(diff, axis=2)
        np.fill_diagonal(dist, np.inf)
        if dist.min() <= TOL:
            raise GeometryError("duplicate vertices")
        for arr in (v, n, r):
            arr.flags.writeable = False
        object.__setattr__(self, "vertices", v)
        object.__setattr__(self, "normals", n)
        object.__setattr__(self, "offsets", r)

    @property
    def d(self) -> int:
        return self.vertices.shape[1]

    @classmethod
    def box(cls, lo, hi) -> "Polytope":
        lo = np.asarray(lo, dtype=float)
        hi = np.asarray(hi, dtype=float)
        d = lo.size
        if np.any(hi <= lo):
            raise GeometryError("box needs hi > lo per axis")
        corners = np.array(
            [[lo[i] if (k >> i) & 1 == 0 else hi[i] for i in range(d)]
             for k in range(1 << d)]
        )
        eye = np.eye(d)
        normals = np.vstack([eye, -eye])
        offsets = np.concatenate([lo, -hi])
        return cls(corners, normals, offsets)

    @classmethod
    def simplex(cls, points) -> "Polytope":
        """Simplex on ``d+1`` affinely independent points, facets derived."""
        pts = np.asarray(points, dtype=float)
        d = pts.shape[1]
        if pts.shape[0] != d + 1:
            raise GeometryError("simplex needs exactly d+1 points")
        normals = []
        offsets = []
        for skip in range(d + 1):
            face = np.delete(pts, skip, axis=0)
            base = face[0]
            span = face[1:] - base
            # Normal orthogonal to the face's span.
            _, _, vh = np.linalg.svd(span)
            nvec = vh[-1]
            if np.linalg.norm(span @ nvec) > 1e-8 * np.abs(span).max():
                raise GeometryError("degenerate simplex (affinely dependent points)")
            off = nvec @ base
            if nvec @ pts[skip] < off:
                nvec, off = -nvec, -off
            normals.append(nvec)
            offsets.append(off)
        return cls(pts, np.array(normals), np.array(offsets))


def incidence(p: Polytope, tol: float = TOL) -> np.ndarray:
    """Boolean (J, F) matrix: vertex j lies on facet f within ``tol``."""
    slack = p.vertices @ p.normals.T - p.offsets[None, :]
    return np.abs(slack) <= tol


def is_simple(p: Polytope, tol: float = TOL) -> bool:
    """True when every vertex is tight at exactly ``d`` facets."""
    counts = incidence(p, tol).sum(axis=1)
    return bool(np.all(counts == p.d))


def support_function(p: Polytope, theta) -> float:
    """``max_x theta . x`` over the polytope; attained at a vertex."""
    theta = np.asarray(theta, dtype=float)
    if theta.shape != (p.d,):
        raise GeometryError(f"direction must have shape ({p.d},)")
    return float(np.max(p.vertices @ theta))


def far_boundary(p: Polytope, vertex: int, tol: float = TOL) -> np.ndarray:
    """Indices of the facets that do not contain the given vertex."""
    if not 0 <= vertex < p.vertices.shape[0]:
        raise GeometryError(f"vertex index {vertex} out of range")
    return np.flatnonzero(~incidence(p, tol)[vertex])


@dataclass(frozen=True)
class GridMask:
    """Boolean cell set on an integer lattice box.

    ``cells[k - lo]`` is True when cell ``k`` belongs to the mask; the cell
    center is ``origin + k * spacing``.  A mask must be nonempty and connected
    under axis adjacency.
    """

    lo: np.ndarray = field(repr=False)
    cells: np.ndarray = field(repr=False)
    spacing: float = 1.0
    origin: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        lo = np.ascontiguousarray(self.lo, dtype=np.int64)
        cells = np.ascontiguousarray(self.cells, dtype=bool)
        if lo.ndim != 1 or cells.ndim != lo.size:
            raise GeometryError("mask box rank does not match cell array rank")
        if self.spacing <= 0:
            raise GeometryError("spacing must be positive")
        origin = self.origin
        origin = np.zeros(lo.size) if origin is None else np.ascontiguousarray(origin, dtype=float)
        if origin.shape != lo.shape:
            raise GeometryError("origin must have one entry per axis")
        if not cells.any():
            raise GeometryError("empty mask")
        labels, ncomp = ndimage.label(
            cells, structure=ndimage.generate_binary_structure(cells.ndim, 1)
        )
        if ncomp != 1:
            raise GeometryError(f"mask is disconnected ({ncomp} components)")
        cells.flags.writeable = False
        lo.flags.writeable = False
        origin.flags.writeable = False
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "cells", cells)
        object.__setattr__(self, "origin", origin)

    @property
    def d(self) -> int:
        return self.lo.size

    @property
    def n_cells(self) -> int:
        return int(self.cells.sum())

    def indices(self) -> np.ndarray:
        """Integer lattice indices of the true cells, row-major order."""
        return np.argwhere(self.cells) + self.lo

    def points(self) -> np.ndarray:
        return self.origin + self.spacing * self.indices()

    @classmethod
    def box(cls, lo, hi, spacing: float = 1.0, origin=None) -> "GridMask":
        """Full box of cells ``lo..hi`` inclusive."""
        lo = np.asarray(lo, dtype=np.int64)
        hi = np.asarray(hi, dtype=np.int64)
        if np.any(hi < lo):
            raise GeometryError("box needs hi >= lo per axis")
        shape = tuple((hi - lo + 1).tolist())
        return cls(lo, np.ones(shape, dtype=bool), spacing, origin)

    @classmethod
    def from_indices(cls, idx, spacing: float = 1.0, origin=None) -> "GridMask":
        idx = np.asarray(idx, dtype=np.int64)
        if idx.ndim != 2 or idx.shape[0] == 0:
            raise GeometryError("need a nonempty (n, d) index array")
        lo = idx.min(axis=0)
        hi = idx.max(axis=0)
        cells = np.zeros(tuple((hi - lo + 1).tolist()), dtype=bool)
        cells[tuple((idx - lo).T)] = True
        return cls(lo, cells, spacing, origin)

    def translate(self, shift) -> "GridMask":
        shift = np.asarray(shift, dtype=np.int64)
        return GridMask(self.lo + shift, self.cells.copy(), self.spacing, self.origin)

    def erode(self, k: int) -> "GridMask":
        """Cells whose full Chebyshev-``k`` neighborhood lies in the mask."""
        if k < 0:
            raise GeometryError("erosion radius must be >= 0")
        if k == 0:
            return self
        structure = np.ones((2 * k + 1,) * self.d, dtype=bool)
        inner = ndimage.binary_erosion(self.cells, structure=structure)
        if not inner.any():
            raise GeometryError(f"erosion by {k} empties the mask")
        return GridMask(self.lo.copy(), inner, self.spacing, self.origin)

    def same_cells(self, other: "GridMask") -> bool:
        a, b = self.indices(), other.indices()
        return a.shape == b.shape and bool(np.array_equal(a, b))


def _trimmed(lo, cells, spacing, origin) -> GridMask:
    if not cells.any():
        raise GeometryError("empty mask")
    idx = np.argwhere(cells)
    mn = idx.min(axis=0)
    mx = idx.max(axis=0)
    sub = cells[tuple(slice(a, b + 1) for a, b in zip(mn, mx))]
    return GridMask(np.asarray(lo) + mn, sub.copy(), spacing, origin)


def rasterize(p: Polytope, h: float, strict: float = TOL) -> GridMask:
    """Mask of lattice cells whose centers ``k * h`` are strictly interior."""
    if h <= 0:
        raise GeometryError("spacing must be positive")
    lo = np.floor(p.vertices.min(axis=0) / h).astype(np.int64) - 1
    hi = np.ceil(p.vertices.max(axis=0) / h).astype(np.int64) + 1
    shape = tuple((hi - lo + 1).tolist())
    if math.prod(shape) > MASK_CAP:
        raise ResourceError(
            f"rasterization box of {math.prod(shape)} cells exceeds cap {MASK_CAP}"
        )
    axes = [np.arange(a, b + 1) * h for a, b in zip(lo, hi)]
    grids = np.meshgrid(*axes, indexing="ij")
    pts = np.stack([g.ravel() for g in grids], axis=1)
    inside = np.all(pts @ p.normals.T > p.offsets[None, :] + strict, axis=1)
    cells = inside.reshape(shape)
    if not cells.any():
        raise GeometryError("rasterization produced an empty mask (polytope too thin?)")
    return _trimmed(lo, cells, h, None)


def rasterize_staircase(spec: dict, h: float) -> GridMask:
    """Mask for a union of open axis-aligned boxes clipped to ``(-inf, bound]``.

    ``spec`` follows ``{"d": int, "boxes": [{"lo": [...], "hi": [...]}, ...],
    "bound": float}``.  A cell center belongs to the mask when it lies strictly
    inside some box after clipping every upper limit at ``bound``.
    """
    if h <= 0:
        raise GeometryError("spacing must be positive")
    for key in ("d", "boxes", "bound"):
        if key not in spec:
            raise InputError(f"staircase spec missing field '{key}'")
    d = int(spec["d"])
    bound = float(spec["bound"])
    boxes = []
    for pos, box in enumerate(spec["boxes"]):
        lo = np.asarray(box.get("lo"), dtype=float)
        hi = np.asarray(box.get("hi"), dtype=float)
        if lo.shape != (d,) or hi.shape != (d,):
            raise InputError(f"staircase box {pos}: lo/hi must have length {d}")
        hi = np.minimum(hi, bound)
        if np.any(hi <= lo):
            raise InputError(f"staircase box {pos}: empty after clipping at bound")
        boxes.append((lo, hi))
    if not boxes:
        raise InputError("staircase spec has no boxes")
    lo_idx = np.floor(min(b[0].min() for b in boxes) / h) - 1
    hi_idx = np.ceil(bound / h) + 1
    lo_idx = np.full(d, int(lo_idx), dtype=np.int64)
    hi_idx = np.full(d, int(hi_idx), dtype=np.int64)
    shape = tuple((hi_idx - lo_idx + 1).tolist())
    if math.prod(shape) > MASK_CAP:
        raise ResourceError(
            f"staircase box of {math.prod(shape)} cells exceeds cap {MASK_CAP}"
        )
    axes = [np.arange(a, b + 1) * h for a, b in zip(lo_idx, hi_idx)]
    grids = np.meshgrid(*axes, indexing="ij")
    pts = np.stack([g.ravel() for g in grids], axis=1)
    inside = np.zeros(pts.shape[0], dtype=bool)
    for lo, hi in boxes:
        inside |= np.all((pts > lo) & (pts < hi), axis=1)
    cells = inside.reshape(shape)
    if not cells.any():
        raise GeometryError("staircase rasterization produced an empty mask")
    return _trimmed(lo_idx, cells, h, None)


def domain_sum(a: GridMask, b: GridMask) -> GridMask:
    """Minkowski sum of the two index sets, via boolean convolution support."""
    if a.d != b.d:
        raise GeometryError("dimension mismatch in domain_sum")
    if abs(a.spacing - b.spacing) > 0:
        raise GeometryError("spacing mismatch in domain_sum")
    from scipy.signal import fftconvolve

    conv = fftconvolve(a.cells.astype(float), b.cells.astype(float))
    cells = conv > 0.5
    return _trimmed(a.lo + b.lo, cells, a.spacing, a.origin + b.origin)


def _smoothstep(t: np.ndarray) -> np.ndarray:
    t = np.clip(t, 0.0, 1.0)
    return t * t * (3.0 - 2.0 * t)


def partition_of_unity(p: Polytope, h: float, margin: float):
    """Per-vertex partition of unity on the rasterized polytope.

    Vertex ``j`` receives the weight ``smoothstep((dist_j - margin) / margin)``
    where ``dist_j`` is the distance to the hyperplanes of the facets not
    containing vertex ``j`` (its far boundary).  Weights are normalized to sum
    to one on every mask cell.  Each member therefore vanishes within
    ``margin`` of its far boundary.

    Requires ``h < margin / 2`` and every vertex at distance ``> 2 * margin``
    from its own far boundary.  Raises :class:`GeometryError` with a hint to
    shrink ``margin`` when the bumps fail to cover the mask.

    Returns ``(mask, members)`` with ``members[j]`` a float array over the
    mask box (zero outside the mask).
    """
    if margin <= 0:
        raise GeometryError("margin must be positive")
    if not h < margin / 2:
        raise GeometryError(f"need h < margin/2, got h={h}, margin={margin}")
    mask = rasterize(p, h)
    unit = p.normals / np.linalg.norm(p.normals, axis=1, keepdims=True)
    scaled_off = p.offsets / np.linalg.norm(p.normals, axis=1)
    nverts = p.vertices.shape[0]
    # Precondition: each vertex clears its far boundary by more than 2*margin.
    for j in range(nverts):
        far = far_boundary(p, j)
        if far.size == 0:
            continue
        dv = np.min(p.vertices[j] @ unit[far].T - scaled_off[far])
        if not dv > 2 * margin:
            raise GeometryError(
                f"vertex {j} is within 2*margin of its far boundary "
                f"(distance {dv:.3g}); use a smaller margin"
            )
    pts = (mask.lo + np.argwhere(mask.cells)) * h
    weights = np.zeros((nverts, pts.shape[0]))
    for j in range(nverts):
        far = far_boundary(p, j)
        if far.size == 0:
            weights[j] = 1.0
            continue
        dist = np.min(pts @ unit[far].T - scaled_off[far][None, :], axis=1)
        weights[j] = _smoothstep((dist - margin) / margin)
    total = weights.sum(axis=0)
    if np.any(total <= 0):
        raise GeometryError(
            "partition of unity does not cover the mask; use a smaller margin"
        )
    members = []
    flat_pos = np.flatnonzero(mask.cells.ravel())
    for j in range(nverts):
        arr = np.zeros(mask.cells.size)
        arr[flat_pos] = weights[j] / total
        members.append(arr.reshape(mask.cells.shape))
    return mask, members


@dataclass(frozen=True)
class DirectionSpec:
    """A nonzero direction vector, validated against a domain kind."""

    nu: np.ndarray = field(repr=False)

    def __post_init__(self):
        nu = np.ascontiguousarray(self.nu, dtype=float)
        if nu.ndim != 1 or not np.all(np.isfinite(nu)) or np.linalg.norm(nu) == 0:
            raise GeometryError("direction must be a finite nonzero vector")
        nu.flags.writeable = False
        object.__setattr__(self, "nu", nu)


def validate_direction(nu, kind: str) -> bool:
    """Check a test-function direction against the domain kind.

    Bounded masks admit every nonzero direction.  Orthant-sandwiched domains
    (between the open orthant and a translate of it) require strictly negative
    components so that the exponential weight decays into the domain.
    """
    spec = DirectionSpec(np.asarray(nu, dtype=float))
    if kind not in DOMAIN_KINDS:
        raise InputError(f"unknown domain kind {kind!r}; expected one of {DOMAIN_KINDS}")
    if kind == "bounded-mask":
        return True
    return bool(np.all(spec.nu < 0))


def polytope_to_dict(p: Polytope) -> dict:
    return {
        "d": p.d,
        "vertices": p.vertices.tolist(),
        "facets": [
            {"normal": n.tolist(), "offset": float(r)}
            for n, r in zip(p.normals, p.offsets)
        ],
    }


def polytope_from_dict(doc: dict) -> Polytope:
    for key in ("d", "vertices", "facets"):
        if key not in doc:
            raise InputError(f"polytope document missing field '{key}'")
    verts = np.asarray(doc["vertices"], dtype=float)
    if verts.ndim != 2 or verts.shape[1] != doc["d"]:
        raise InputError("'vertices' must be a (J, d) array")
    normals = []
    offsets = []
    for pos, facet in enumerate(doc["facets"]):
        if "normal" not in facet or "offset" not in facet:
            raise InputError(f"facet {pos}: needs 'normal' and 'offset'")
        normals.append(facet["normal"])
        offsets.append(facet["offset"])
    return Polytope(verts, np.asarray(normals, dtype=float), np.asarray(offsets, dtype=float))


def load_polytope(path) -> Polytope:
    with open(path) as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise InputError(f"invalid JSON in {path}: {exc}") from exc
    return polytope_from_dict(doc)


def domain_from_dict(doc: dict) -> tuple[GridMask, str]:
    """Build a grid mask from a domain document.

    Three kinds are accepted.  ``box`` takes integer cell bounds ``lo`` and
    ``hi``.  ``polytope`` embeds a polytope document plus a spacing ``h`` and
    rasterizes it.  ``staircase`` embeds a staircase region (axis-aligned
    boxes between the orthant and its translate) plus a spacing ``h``.

    Returns the mask together with the domain kind string used for
    direction validation.
    """
    if not isinstance(doc, dict) or "kind" not in doc:
        raise InputError("domain document needs a 'kind' field")
    kind = doc["kind"]
    if kind == "box":
        for key in ("lo", "hi"):
            if key not in doc:
                raise InputError(f"box domain missing field '{key}'")
        return GridMask.box(doc["lo"], doc["hi"]), "bounded-mask"
    if kind == "polytope":
        if "polytope" not in doc or "h" not in doc:
            raise InputError("polytope domain needs 'polytope' and 'h' fields")
        mask = rasterize(polytope_from_dict(doc["polytope"]), float(doc["h"]))
        return mask, "bounded-mask"
    if kind == "staircase":
        if "spec" not in doc or "h" not in doc:
            raise InputError("staircase domain needs 'spec' and 'h' fields")
        mask = rasterize_staircase(doc["spec"], float(doc["h"]))
        return mask, "orthant-sandwiched"
    raise InputError(f"unknown domain kind {kind!r}")


def load_domain(path) -> tuple[GridMask, str]:
    with open(path) as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise InputError(f"invalid JSON in {path}: {exc}") from exc
    return domain_from_dict(doc)
