"""Randomized property suites exercising the cross-module identities.

Every suite draws reproducible cases from a seeded generator, measures one
deviation per check, and records it against the check's tolerance, so any
case can be replayed from its record alone.  ``run_suite`` is the entry
point; ``coverage_gaps`` backs the checklist test that keeps the registry
aligned with the invariants documented across the library.

Reports serialize to JSON (``report_to_dict``) and JUnit XML
(``write_junit_xml``) for CI consumption.
"""

from __future__ import annotations

import io
import json
import time
import warnings
import xml.etree.ElementTree as ET
from contextlib import redirect_stdout
from dataclasses import asdict, dataclass

import numpy as np

from . import factorization as fz
from . import nehari
from .coeffs import MultiSequence, Window, coeffs_from_grid, eval_symbol
from .errors import InputError
from .geometry import (
    GridMask,
    Polytope,
    domain_sum,
    far_boundary,
    incidence,
    is_simple,
    partition_of_unity,
    support_function,
)
from .norms import certificate_sweep, norm_dense, norm_iterative
from .operators import (
    CorrelationOperator,
    Kernel,
    MollifierSpec,
    fourier_l1,
    hankel_toeplitz_flip,
    modulate,
    mollify,
    toeplitz_matrix,
)

__all__ = [
    "COVERAGE_KEYS",
    "CaseResult",
    "PropertyCase",
    "SuiteReport",
    "coverage_gaps",
    "coverage_map",
    "list_suites",
    "report_to_dict",
    "run_all",
    "run_suite",
    "suite_summaries",
    "write_junit_xml",
]


# Checklist of library invariants the registry must exercise.  The coverage
# test fails when a key has no suite, or a suite claims an unknown key.
COVERAGE_KEYS = {
    "coeffs:eval-linearity": "symbol evaluation is linear in the coefficients",
    "coeffs:coeff-dominated-by-sup": "each coefficient modulus is at most the certified symbol sup bound",
    "coeffs:grid-roundtrip": "coeffs_from_grid inverts eval_symbol on window-supported sequences",
    "geometry:incidence-row-sums": "every polytope vertex lies on at least d facets",
    "geometry:support-homogeneity": "the support function is positively homogeneous",
    "geometry:domain-sum-algebra": "Minkowski sums of masks commute and associate as index sets",
    "geometry:pou-partition": "partition weights sum to one on the mask and vanish cell-exactly near the far boundary",
    "operators:oracle-equivalence": "FFT apply matches the dense matrix action",
    "operators:apply-linearity": "apply is linear in the kernel and in the input vector",
    "operators:flip-equality": "x-y operators on symmetric masks equal reflected x+y operators",
    "operators:translation-covariance": "cube-pair operator norms depend only on the sum of the cube corners",
    "operators:modulation-bound": "modulated kernel norm is at most the Fourier l1 mass times the plain norm",
    "operators:mollify-monotone": "mollified kernels on eroded input masks never gain norm",
    "norms:certificate-below-norm": "exponential test certificates never exceed the operator norm",
    "norms:dense-iterative-agreement": "power iteration agrees with the dense spectral norm",
    "norms:certificate-translation-invariance": "certificates are unchanged under common mask translation",
    "norms:certificate-reaches-symbol-sup": "certificate sweeps reach 95% of the symbol sup on long masks",
    "nehari:window-fidelity": "extensions agree with the prescribed window exactly",
    "nehari:bracket": "t_grid lies between the max and the sum of the coefficient moduli",
    "nehari:section-soundness": "every tested Toeplitz section norm is at most t_cert",
    "nehari:extension-monotonicity": "nested grid refinements of the extension symbol grow monotonically and stay below t_cert",
    "nehari:flip-consistency": "index-reflected coefficients solve to the same t_grid",
    "factorization:per-term-decay": "per-term convolution identity error scales like 1/G",
    "factorization:partial-l1-stabilizes": "coefficient l1 mass is nondecreasing in K and stabilizes for smooth inputs",
    "factorization:coefficient-linearity": "scaling the input scales every coefficient",
    "factorization:nuclear-norm-consistency": "nuclear norm equals 2^-d times the coefficient l1 mass",
    "cli:determinism": "same inputs and seed reproduce the report apart from wall time",
    "cli:exit-codes": "exit codes separate success, input errors, non-convergence, and resource caps",
    "strip:block-decomposition": "single-transverse-level strip operators have norm equal to the best longitudinal block",
}


@dataclass(frozen=True)
class PropertyCase:
    """Replayable record of one generated check."""

    suite: str
    name: str
    index: int
    seed: int
    dims: int
    sizes: str
    distribution: str
    tolerance: float
    anchor: str


@dataclass(frozen=True)
class CaseResult:
    case: PropertyCase
    passed: bool
    deviation: float
    detail: str
    wall_s: float


@dataclass(frozen=True)
class SuiteReport:
    suite: str
    seed: int
    count: int
    results: tuple
    wall_s: float

    @property
    def failures(self) -> list:
        return [r for r in self.results if not r.passed]

    @property
    def passed(self) -> bool:
        return not self.failures

    def worst(self) -> "CaseResult | None":
        if not self.results:
            return None
        return max(self.results, key=lambda r: r.deviation - r.case.tolerance)


@dataclass(frozen=True)
class SuiteSpec:
    name: str
    runner: object
    covers: tuple
    default_count: int
    summary: str


_REGISTRY: dict[str, SuiteSpec] = {}


def _suite(name, covers, default_count, summary):
    def deco(fn):
        _REGISTRY[name] = SuiteSpec(name, fn, tuple(covers), default_count, summary)
        return fn

    return deco


class _Recorder:
    """Collects case results; exceptions become failures, never crashes."""

    def __init__(self, suite: str, seed: int):
        self.suite = suite
        self.seed = seed
        self.results: list[CaseResult] = []

    def run(self, name, fn, *, tolerance, anchor, index=0, dims=0, sizes="",
            distribution="fixed"):
        t0 = time.perf_counter()
        try:
            deviation, detail = fn()
            deviation = float(deviation)
            passed = deviation <= tolerance
        except Exception as exc:
            deviation = float("inf")
            detail = f"{type(exc).__name__}: {exc}"
            passed = False
        wall = time.perf_counter() - t0
        case = PropertyCase(self.suite, name, int(index), int(self.seed),
                            int(dims), str(sizes), str(distribution),
                            float(tolerance), anchor)
        self.results.append(CaseResult(case, passed, deviation, str(detail), wall))


# ---------------------------------------------------------------------------
# shared generators


def _case_rng(seed: int, index: int) -> np.random.Generator:
    return np.random.default_rng([seed & 0xFFFFFFFF, index])


def _gauss(rng: np.random.Generator, shape) -> np.ndarray:
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2)


def _mask_hi(mask: GridMask) -> np.ndarray:
    return mask.lo + np.array(mask.cells.shape, dtype=np.int64) - 1


def _random_mask(rng: np.random.Generator, d: int, max_side: int) -> GridMask:
    """Union of two overlapping boxes: connected, irregular, small."""
    lo1 = rng.integers(-3, 4, size=d)
    sh1 = rng.integers(1, max_side + 1, size=d)
    sh2 = rng.integers(1, max_side + 1, size=d)
    lo2 = lo1 + np.array([int(rng.integers(0, s)) for s in sh1])
    lo = np.minimum(lo1, lo2)
    hi = np.maximum(lo1 + sh1, lo2 + sh2) - 1
    cells = np.zeros(tuple((hi - lo + 1).tolist()), dtype=bool)
    cells[tuple(slice(a - c, a - c + s) for a, c, s in zip(lo1, lo, sh1))] = True
    cells[tuple(slice(a - c, a - c + s) for a, c, s in zip(lo2, lo, sh2))] = True
    return GridMask(lo, cells)


def _index_range(flavor: str, out_mask: GridMask, in_mask: GridMask):
    """Index box swept by x+y (psi) or x-y (theta)."""
    if flavor == "psi":
        return out_mask.lo + in_mask.lo, _mask_hi(out_mask) + _mask_hi(in_mask)
    return out_mask.lo - _mask_hi(in_mask), _mask_hi(out_mask) - in_mask.lo


def _random_kernel(rng: np.random.Generator, lo, hi) -> Kernel:
    """Gaussian kernel on a random sub-box of ``lo..hi``."""
    lo = np.asarray(lo, dtype=np.int64)
    hi = np.asarray(hi, dtype=np.int64)
    a = np.array([int(rng.integers(l, h + 1)) for l, h in zip(lo, hi)])
    b = np.array([int(rng.integers(x, h + 1)) for x, h in zip(a, hi)])
    return Kernel(a, _gauss(rng, tuple((b - a + 1).tolist())))


def _random_operator(rng: np.random.Generator, d: int, flavor=None) -> CorrelationOperator:
    side = 7 if d == 1 else 5
    out_mask = _random_mask(rng, d, side)
    in_mask = _random_mask(rng, d, side)
    if flavor is None:
        flavor = "psi" if rng.random() < 0.5 else "theta"
    kern = _random_kernel(rng, *_index_range(flavor, out_mask, in_mask))
    return CorrelationOperator(kern, in_mask, out_mask, flavor)


def _rel(got: np.ndarray, want: np.ndarray) -> float:
    # Suite data is O(1) by construction, so flooring the denominator at 1
    # keeps the comparison meaningful when the reference is exactly zero
    # (e.g. a kernel supported in a hole of a non-convex index sumset).
    scale = max(float(np.max(np.abs(want))), 1.0)
    return float(np.max(np.abs(np.asarray(got) - np.asarray(want)))) / scale


def _window_view(a: MultiSequence, radii) -> np.ndarray:
    sl = tuple(slice(m - n, m + n - 1) for m, n in zip(a.window.radii, radii))
    return a.coeffs[sl]


def _delta_array(radii) -> np.ndarray:
    w = Window(tuple(radii))
    arr = np.zeros(w.shape, dtype=np.complex128)
    arr[tuple(r - 1 for r in w.radii)] = 1.0
    return arr


# ---------------------------------------------------------------------------
# suites


@_suite("trivial", covers=(), default_count=0,
        summary="hand-computable identities with exact expected values")
def _run_trivial(seed, count):
    rec = _Recorder("trivial", seed)
    rng = _case_rng(seed, 0)
    box5 = GridMask.box([0], [4])

    def identity_dense():
        op = CorrelationOperator(Kernel.delta([0]), box5, box5, "theta")
        return float(np.max(np.abs(op.materialize_dense() - np.eye(5)))), "dense vs eye(5)"

    rec.run("theta-delta-identity-dense", identity_dense, tolerance=0.0,
            anchor="delta kernel acts as the identity", dims=1, sizes="mask=5")

    def identity_apply():
        op = CorrelationOperator(Kernel.delta([0]), box5, box5, "theta")
        g = _gauss(rng, 5)
        return _rel(op.apply(g), g), "fft apply of the delta kernel"

    rec.run("theta-delta-identity-apply", identity_apply, tolerance=1e-12,
            anchor="delta kernel acts as the identity", dims=1, sizes="mask=5")

    def all_ones():
        op = CorrelationOperator(Kernel(np.array([0]), np.ones(9, dtype=complex)),
                                 box5, box5, "psi")
        g = _gauss(rng, 5)
        dev = _rel(op.apply(g), np.full(5, g.sum()))
        dev = max(dev, abs(norm_dense(op) - 5.0) / 5.0)
        return dev, "rank-one all-ones kernel: constant output, norm = cell count"

    rec.run("psi-allones-rank-one", all_ones, tolerance=1e-8,
            anchor="all-ones kernel has norm equal to the cell count",
            dims=1, sizes="mask=5")

    def delta_flip():
        op = CorrelationOperator(Kernel.delta([4]), box5, box5, "psi")
        g = _gauss(rng, 5)
        dev = _rel(op.apply(g), g[::-1])
        est = norm_iterative(op, tol=1e-10, seed=3)
        dev = max(dev, abs(est.value - 1.0), abs(norm_dense(op) - 1.0))
        return dev, "shifted delta kernel flips the vector; partial isometry"

    rec.run("psi-delta-flip-isometry", delta_flip, tolerance=1e-8,
            anchor="flip operators are partial isometries", dims=1, sizes="mask=5")

    def toeplitz_example():
        a = MultiSequence.from_entries((2,), {(-1,): 2.0, (0,): 1.0, (1,): 3.0})
        got = toeplitz_matrix(a, 2).materialize_dense()
        want = np.array([[1.0, 2.0], [3.0, 1.0]])
        return float(np.max(np.abs(got - want))), "2x2 section of (2, 1, 3)"

    rec.run("toeplitz-2x2-example", toeplitz_example, tolerance=0.0,
            anchor="Toeplitz sections instantiate a_{m-n}", dims=1, sizes="N=2")

    def toeplitz_delta():
        a = MultiSequence.from_entries((1,), {(0,): 1.0})
        dev = 0.0
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            for n in (1, 3, 4):
                got = toeplitz_matrix(a, n).materialize_dense()
                dev = max(dev, float(np.max(np.abs(got - np.eye(n)))))
        return dev, "delta sections at N = 1, 3, 4"

    rec.run("toeplitz-delta-identity", toeplitz_delta, tolerance=0.0,
            anchor="delta coefficients give identity sections", dims=1, sizes="N<=4")

    def tent_checks():
        t4 = fz.tent_values(1, 4)
        dev = float(np.max(np.abs(t4 - np.array([0.0, 0.25, 0.5, 0.25]))))
        t2d = fz.tent_values(2, 4)
        dev = max(dev, abs(t2d[1, 2] - 0.125))
        t8 = fz.tent_values(1, 8)
        dev = max(dev, float(np.max(np.abs(t8[1:] - t8[1:][::-1]))))
        return dev, "tent samples, product value, reflection symmetry"

    rec.run("tent-values", tent_checks, tolerance=0.0,
            anchor="tent function formula and symmetry", dims=2, sizes="G<=8")

    def extension_delta():
        a = MultiSequence.from_entries((1,), {(0,): 1.0})
        res = nehari.min_linf_extension(nehari.ExtensionProblem.with_defaults(a))
        dev = abs(res.t_grid - 1.0)
        dev = max(dev, float(np.max(np.abs(res.coeffs.coeffs - _delta_array((4,))))))
        return dev, "constant symbol: t_grid 1, extension stays the delta"

    rec.run("extension-delta", extension_delta, tolerance=1e-12,
            anchor="delta extends to itself with unit sup", dims=1, sizes="M=4")

    def extension_singleton():
        w = 0.7 - 0.4j
        a = MultiSequence.from_entries((2,), {(1,): w})
        res = nehari.min_linf_extension(nehari.ExtensionProblem.with_defaults(a))
        return abs(res.t_grid - abs(w)), "one Fourier mode: t_grid equals its modulus"

    rec.run("extension-singleton", extension_singleton, tolerance=1e-6,
            anchor="a single coefficient is its own minimal extension",
            dims=1, sizes="M=8")

    def conv_identity_k0():
        return fz.verify_convolution_identity((0,), 64), "plain half-cube autocorrelation"

    rec.run("half-cube-autocorrelation", conv_identity_k0, tolerance=2.0 / 64,
            anchor="half-cube indicators convolve to the tent", dims=1, sizes="G=64")

    def mollify_identity():
        f = Kernel(np.array([-2]), _gauss(rng, 5))
        out = mollify(f, MollifierSpec.uniform(n=10, radius=2))
        dev = float(np.max(np.abs(out.values - f.values)))
        dev = max(dev, float(np.max(np.abs(out.lo - f.lo))))
        return dev, "large scale collapses the stencil to a delta"

    rec.run("mollify-identity-limit", mollify_identity, tolerance=0.0,
            anchor="coarse mollifiers return the kernel unchanged", dims=1,
            sizes="support=5")

    def modulate_ones():
        f = Kernel(np.array([-1, 0]), _gauss(rng, (3, 4)))
        out = modulate(f, np.ones((3, 4)))
        dev = float(np.max(np.abs(out.values - f.values)))
        dev = max(dev, abs(fourier_l1(np.ones((3, 4))) - 1.0))
        return dev, "unit modulation is a no-op with unit Fourier mass"

    rec.run("modulate-by-one", modulate_ones, tolerance=1e-12,
            anchor="modulation by 1 changes nothing", dims=2, sizes="box=3x4")

    def eval_delta():
        a = MultiSequence.from_entries((1,), {(0,): 1.0})
        vals = eval_symbol(a, (7,)).values
        return float(np.max(np.abs(vals - 1.0))), "delta evaluates to the constant symbol"

    rec.run("eval-symbol-delta", eval_delta, tolerance=0.0,
            anchor="delta coefficients give the constant symbol", dims=1, sizes="G=7")

    return rec.results


@_suite("oracle",
        covers=("operators:oracle-equivalence", "operators:apply-linearity"),
        default_count=50,
        summary="FFT apply vs dense matvec, with linearity in kernel and vector")
def _run_oracle(seed, count):
    rec = _Recorder("oracle", seed)
    for i in range(count):
        rng = _case_rng(seed, i)
        d = 1 + (i % 2)
        op = _random_operator(rng, d)

        def check(op=op, rng=rng):
            dense = op.materialize_dense()
            g = _gauss(rng, op.shape[1])
            dev = _rel(op.apply(g), dense @ g)
            g2 = _gauss(rng, op.shape[1])
            al, be = complex(_gauss(rng, ())), complex(_gauss(rng, ()))
            dev = max(dev, _rel(op.apply(al * g + be * g2),
                                al * op.apply(g) + be * op.apply(g2)))
            other = Kernel(op.kernel.lo, _gauss(rng, op.kernel.values.shape))
            summed = Kernel(op.kernel.lo, op.kernel.values + other.values)
            op2 = CorrelationOperator(other, op.input_mask, op.output_mask, op.flavor)
            op3 = CorrelationOperator(summed, op.input_mask, op.output_mask, op.flavor)
            dev = max(dev, _rel(op3.apply(g), op.apply(g) + op2.apply(g)))
            return dev, f"flavor={op.flavor} shape={op.shape}"

        rec.run(f"oracle-{i:03d}", check, tolerance=1e-12,
                anchor=COVERAGE_KEYS["operators:oracle-equivalence"],
                index=i, dims=d, sizes=f"{op.shape[0]}x{op.shape[1]}",
                distribution="complex-gaussian")
    return rec.results


@_suite("coeffs",
        covers=("coeffs:eval-linearity", "coeffs:grid-roundtrip",
                "coeffs:coeff-dominated-by-sup"),
        default_count=25,
        summary="symbol evaluation linearity, inversion, and sup domination")
def _run_coeffs(seed, count):
    rec = _Recorder("coeffs", seed)
    for i in range(count):
        rng = _case_rng(seed, i)
        d = 1 + (i % 2)
        radii = tuple(int(r) for r in rng.integers(1, 4, size=d))
        w = Window(radii)
        sizes = tuple(int(rng.integers(2 * r - 1, 8 * r)) for r in radii)

        def check(w=w, sizes=sizes, rng=rng):
            a = MultiSequence(w, _gauss(rng, w.shape))
            b = MultiSequence(w, _gauss(rng, w.shape))
            al, be = complex(_gauss(rng, ())), complex(_gauss(rng, ()))
            ga = eval_symbol(a, sizes).values
            gb = eval_symbol(b, sizes).values
            comb = MultiSequence(w, al * a.coeffs + be * b.coeffs)
            dev = _rel(eval_symbol(comb, sizes).values, al * ga + be * gb)
            back = coeffs_from_grid(eval_symbol(a, sizes), w)
            dev = max(dev, _rel(back.coeffs, a.coeffs))
            bound = nehari.certified_sup_bound(a)
            dev = max(dev, max(0.0, float(np.max(np.abs(a.coeffs))) - bound) / bound)
            return dev, f"radii={w.radii} grid={sizes}"

        rec.run(f"coeffs-{i:03d}", check, tolerance=1e-12,
                anchor=COVERAGE_KEYS["coeffs:eval-linearity"],
                index=i, dims=d, sizes=f"radii={radii}",
                distribution="complex-gaussian")
    return rec.results


def _random_simplex(rng: np.random.Generator, d: int) -> Polytope:
    while True:
        pts = rng.standard_normal((d + 1, d)) * 2.0
        edges = pts[1:] - pts[0]
        if abs(np.linalg.det(edges)) > 0.5:
            return Polytope.simplex(pts)


def _pyramid() -> Polytope:
    verts = np.array([[1.0, 1, 0], [1, -1, 0], [-1, 1, 0], [-1, -1, 0], [0, 0, 1]])
    normals = np.array([[0.0, 0, 1], [-1, 0, -1], [1, 0, -1], [0, -1, -1], [0, 1, -1]])
    offsets = np.array([0.0, -1, -1, -1, -1])
    return Polytope(verts, normals, offsets)


@_suite("geometry",
        covers=("geometry:incidence-row-sums", "geometry:support-homogeneity",
                "geometry:domain-sum-algebra", "geometry:pou-partition"),
        default_count=20,
        summary="incidence counts, support function scaling, mask algebra, partitions")
def _run_geometry(seed, count):
    rec = _Recorder("geometry", seed)
    for i in range(count):
        rng = _case_rng(seed, i)
        d = 2 + (i % 2)

        def shape_check(rng=rng, d=d, i=i):
            if i % 4 == 3:
                p = _pyramid()
                inc = incidence(p)
                dev = 0.0 if inc[4].sum() == 4 and not is_simple(p) else 1.0
            else:
                p = _random_simplex(rng, d) if i % 2 else Polytope.box(
                    rng.uniform(-3, 0, size=d), rng.uniform(1, 4, size=d))
                inc = incidence(p)
                dev = 0.0
            rows = inc.sum(axis=1)
            dev = max(dev, 0.0 if np.all(rows >= p.d) else 1.0)
            # Power-of-two scalings commute with the vertex dot products
            # bitwise, so homogeneity holds with zero tolerance here.
            for _ in range(3):
                theta = rng.standard_normal(p.d)
                for alpha in (2.0, 0.5, 4.0):
                    dev = max(dev, abs(support_function(p, alpha * theta)
                                       - alpha * support_function(p, theta)))
            return dev, f"vertices={p.vertices.shape[0]} facets={p.normals.shape[0]}"

        rec.run(f"shape-{i:03d}", shape_check, tolerance=0.0,
                anchor=COVERAGE_KEYS["geometry:incidence-row-sums"],
                index=i, dims=d, sizes="polytope", distribution="gaussian-vertices")

        def homog_check(rng=rng, d=d):
            p = _random_simplex(rng, d)
            dev = 0.0
            for alpha in (3.25, 0.3, 7.5):
                theta = rng.standard_normal(p.d)
                h = support_function(p, theta)
                dev = max(dev, abs(support_function(p, alpha * theta) - alpha * h)
                          / max(abs(alpha * h), 1e-30))
            return dev, "general positive scalings, relative comparison"

        rec.run(f"homog-{i:03d}", homog_check, tolerance=1e-12,
                anchor=COVERAGE_KEYS["geometry:support-homogeneity"],
                index=i, dims=d, sizes="simplex", distribution="gaussian-vertices")

        def sum_check(rng=rng, d=d):
            a = _random_mask(rng, d, 3)
            b = _random_mask(rng, d, 3)
            c = _random_mask(rng, d, 3)
            dev = 0.0 if domain_sum(a, b).same_cells(domain_sum(b, a)) else 1.0
            lhs = domain_sum(domain_sum(a, b), c)
            rhs = domain_sum(a, domain_sum(b, c))
            dev = max(dev, 0.0 if lhs.same_cells(rhs) else 1.0)
            return dev, f"cells={a.n_cells},{b.n_cells},{c.n_cells}"

        rec.run(f"minkowski-{i:03d}", sum_check, tolerance=0.0,
                anchor=COVERAGE_KEYS["geometry:domain-sum-algebra"],
                index=i, dims=d, sizes="masks<=3 cells/side",
                distribution="overlapping-boxes")

        def pou_check(rng=rng, d=d, i=i):
            side = 5.0 + 3.0 * rng.random()
            if i % 2:
                pts = np.zeros((d + 1, d))
                pts[1:] = np.eye(d) * (side + 2.0)
                p = Polytope.simplex(pts)
            else:
                p = Polytope.box(np.zeros(d), np.full(d, side))
            margin = 0.6 + 0.3 * rng.random()
            h = margin * (0.2 + 0.25 * rng.random())
            mask, members = partition_of_unity(p, h, margin)
            total = np.zeros(mask.n_cells)
            for m in members:
                total += m[mask.cells]
            dev = float(np.max(np.abs(total - 1.0)))
            unit = p.normals / np.linalg.norm(p.normals, axis=1, keepdims=True)
            off = p.offsets / np.linalg.norm(p.normals, axis=1)
            pts = mask.points()
            for j, m in enumerate(members):
                far = far_boundary(p, j)
                if far.size == 0:
                    continue
                dist = np.min(pts @ unit[far].T - off[far][None, :], axis=1)
                near = dist <= margin
                if near.any():
                    dev = max(dev, float(np.max(np.abs(m[mask.cells][near]))))
            return dev, f"cells={mask.n_cells} members={len(members)}"

        rec.run(f"partition-{i:03d}", pou_check, tolerance=1e-12,
                anchor=COVERAGE_KEYS["geometry:pou-partition"],
                index=i, dims=d, sizes="h<margin/2", distribution="uniform-shapes")
    return rec.results


@_suite("translation", covers=("operators:translation-covariance",),
        default_count=50,
        summary="cube-pair norms depend only on the corner sum (odd sums via kernel shift)")
def _run_translation(seed, count):
    rec = _Recorder("translation", seed)
    for i in range(count):
        rng = _case_rng(seed, i)
        d = 1 + (i % 2)
        s = int(rng.integers(2, 5))
        m = rng.integers(-6, 7, size=d)
        n = rng.integers(-6, 7, size=d)
        n = n + (m + n) % 2  # start from an even corner sum

        def check(rng=rng, d=d, s=s, m=m, n=n):
            lo = m + n
            hi = lo + 2 * (s - 1)
            f = Kernel(lo.copy(), _gauss(rng, tuple((hi - lo + 1).tolist())))
            dev = 0.0
            parities = []
            for shift in (np.zeros(d, dtype=np.int64),
                          np.eye(1, d, 0, dtype=np.int64)[0]):
                nn = n + shift
                total = m + nn
                r = total % 2
                q = (total - r) // 2
                op_pair = CorrelationOperator(
                    f, GridMask.box(nn, nn + s - 1), GridMask.box(m, m + s - 1), "psi")
                op_mid = CorrelationOperator(
                    f.shift(r), GridMask.box(q, q + s - 1), GridMask.box(q, q + s - 1),
                    "psi")
                n_pair = norm_dense(op_pair)
                dev = max(dev, abs(n_pair - norm_dense(op_mid)) / max(1.0, n_pair))
                g = _gauss(rng, op_pair.shape[1])
                dev = max(dev, _rel(op_pair.apply(g), op_mid.apply(g)))
                parities.append("odd" if r.any() else "even")
            return dev, f"side={s} parities={'/'.join(parities)}"

        rec.run(f"translation-{i:03d}", check, tolerance=1e-10,
                anchor=COVERAGE_KEYS["operators:translation-covariance"],
                index=i, dims=d, sizes=f"cube={s}^{d}",
                distribution="complex-gaussian")
    return rec.results


@_suite("flip", covers=("operators:flip-equality",), default_count=50,
        summary="x-y operators on symmetric masks match reflected x+y operators")
def _run_flip(seed, count):
    rec = _Recorder("flip", seed)
    for i in range(count):
        rng = _case_rng(seed, i)
        d = 1 + (i % 2)
        if i % 4 < 2:
            c = rng.integers(1, 4, size=d)
            mask = GridMask.box(-c, c)
            two_z = np.zeros(d, dtype=np.int64)
        else:
            n = rng.integers(2, 5, size=d)
            mask = GridMask.box(np.zeros(d, dtype=np.int64), n - 1)
            two_z = -(n - 1)

        def check(rng=rng, mask=mask, two_z=two_z):
            f = _random_kernel(rng, *_index_range("theta", mask, mask))
            ft, perm = hankel_toeplitz_flip(f, mask, two_z)
            op_t = CorrelationOperator(f, mask, mask, "theta")
            op_p = CorrelationOperator(ft, mask, mask, "psi")
            g = _gauss(rng, mask.n_cells)
            dev = _rel(op_t.apply(g), op_p.apply(g[perm]))
            mt = op_t.materialize_dense()
            mp = op_p.materialize_dense()
            dev = max(dev, _rel(mt[:, perm], mp))
            nt, np_ = norm_dense(op_t), norm_dense(op_p)
            dev = max(dev, abs(nt - np_) / max(1.0, nt))
            return dev, f"cells={mask.n_cells} two_z={two_z.tolist()}"

        rec.run(f"flip-{i:03d}", check, tolerance=1e-12,
                anchor=COVERAGE_KEYS["operators:flip-equality"],
                index=i, dims=d, sizes=f"cells={mask.n_cells}",
                distribution="complex-gaussian")
    return rec.results


@_suite("modulation", covers=("operators:modulation-bound",), default_count=50,
        summary="modulated norms bounded by the Fourier l1 mass of the modulation")
def _run_modulation(seed, count):
    rec = _Recorder("modulation", seed)
    kinds = ("complex-gaussian", "unimodular-wave", "smoothstep-profile")
    for i in range(count):
        rng = _case_rng(seed, i)
        d = 1 + (i % 2)
        kind = kinds[i % 3]

        def check(rng=rng, d=d, kind=kind):
            mask = _random_mask(rng, d, 6 if d == 1 else 4)
            lo, hi = _index_range("psi", mask, mask)
            f = Kernel(lo.copy(), _gauss(rng, tuple((hi - lo + 1).tolist())))
            axes = [np.arange(a, a + s) for a, s in zip(f.lo, f.values.shape)]
            grid = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).astype(float)
            if kind == "complex-gaussian":
                mu = _gauss(rng, f.values.shape)
            elif kind == "unimodular-wave":
                xi = rng.uniform(0, 1, size=d)
                mu = np.exp(2j * np.pi * (grid @ xi))
            else:
                proj = grid @ rng.standard_normal(d)
                t = np.clip((proj - proj.min()) / 10.0, 0.0, 1.0)
                mu = (t * t * (3 - 2 * t)).astype(complex)
            base = CorrelationOperator(f, mask, mask, "psi")
            modded = CorrelationOperator(modulate(f, mu), mask, mask, "psi")
            n0, n1 = norm_dense(base), norm_dense(modded)
            dev = max(0.0, n1 - fourier_l1(mu) * n0)
            if kind == "unimodular-wave":
                dev = max(dev, abs(n1 - n0))
            return dev, f"{kind}: plain={n0:.3g} modulated={n1:.3g} l1={fourier_l1(mu):.3g}"

        rec.run(f"modulation-{i:03d}", check, tolerance=1e-8,
                anchor=COVERAGE_KEYS["operators:modulation-bound"],
                index=i, dims=d, sizes="mask<=2 boxes", distribution=kind)
    return rec.results


@_suite("mollify", covers=("operators:mollify-monotone",), default_count=50,
        summary="mollified kernels on eroded input masks never gain norm")
def _run_mollify(seed, count):
    rec = _Recorder("mollify", seed)
    for i in range(count):
        rng = _case_rng(seed, i)
        d = 1 + (i % 2)

        def check(rng=rng, d=d, i=i):
            radius = int(rng.integers(1, 3))
            n = int(rng.integers(1, 4))
            psi = rng.random(2 * radius + 1) + 0.1
            psi /= psi.sum()
            rn = (MollifierSpec(n, psi).stencil_1d().size - 1) // 2
            side = 2 * rn + 1 + int(rng.integers(1, 4))
            lo_in = rng.integers(-3, 4, size=d)
            in_mask = GridMask.box(lo_in, lo_in + side - 1)
            out_mask = _random_mask(rng, d, 6 if d == 1 else 4)
            lo, hi = _index_range("psi", out_mask, in_mask)
            f = Kernel(lo.copy(), _gauss(rng, tuple((hi - lo + 1).tolist())))
            if i % 2:
                spec = MollifierSpec(n, psi)
            else:
                reach = float(max(np.max(np.abs(lo)), np.max(np.abs(hi)))) + 1.0

                def rho(pts, reach=reach):
                    return np.max(np.abs(pts), axis=-1) <= reach + 1.0

                def omega(pts, reach=reach, n=n):
                    t = np.max(np.abs(pts), axis=-1) - reach / n
                    return np.clip(1.0 - np.maximum(t, 0.0) / 2.0, 0.0, 1.0)

                spec = MollifierSpec(n, psi, omega=omega, rho=rho)
            inner = in_mask.erode(rn)
            full = CorrelationOperator(f, in_mask, out_mask, "psi")
            molled = CorrelationOperator(mollify(f, spec), inner, out_mask, "psi")
            n_full, n_moll = norm_dense(full), norm_dense(molled)
            return max(0.0, n_moll / max(n_full, 1e-30) - 1.0), (
                f"rn={rn} full={n_full:.3g} mollified={n_moll:.3g}")

        rec.run(f"mollify-{i:03d}", check, tolerance=1e-8,
                anchor=COVERAGE_KEYS["operators:mollify-monotone"],
                index=i, dims=d, sizes="box input mask",
                distribution="complex-gaussian")
    return rec.results


@_suite("norms",
        covers=("norms:dense-iterative-agreement", "norms:certificate-below-norm",
                "norms:certificate-translation-invariance",
                "norms:certificate-reaches-symbol-sup"),
        default_count=10,
        summary="norm estimators agree; certificates stay below and reach the sup")
def _run_norms(seed, count):
    rec = _Recorder("norms", seed)
    for i in range(count):
        rng = _case_rng(seed, i)
        d = 1 + (i % 2)

        def agreement(rng=rng, d=d):
            op = _random_operator(rng, d)
            nd = norm_dense(op)
            est = norm_iterative(op, tol=1e-10, max_iter=50000,
                                 seed=int(rng.integers(1 << 31)))
            dev = abs(est.value - nd) / max(nd, 1e-30)
            dev = max(dev, max(0.0, est.lower_certificate - nd * (1 + 1e-10))
                      / max(nd, 1e-30))
            return dev, f"dense={nd:.6g} iterative={est.value:.6g} iters={est.iterations}"

        rec.run(f"agreement-{i:03d}", agreement, tolerance=1e-6,
                anchor=COVERAGE_KEYS["norms:dense-iterative-agreement"],
                index=i, dims=d, sizes="<=200 cells", distribution="complex-gaussian")

        mask = _random_mask(rng, d, 6 if d == 1 else 4)
        f = _random_kernel(rng, *_index_range("theta", mask, mask))
        xi = rng.uniform(0, 1, size=d)
        nu = -np.abs(rng.standard_normal(d)) - 0.1
        shift = rng.integers(-5, 6, size=d)

        def below(f=f, mask=mask, xi=xi, nu=nu):
            op = CorrelationOperator(f, mask, mask, "theta")
            est = norm_iterative(op, tol=1e-10, max_iter=50000, seed=1)
            best, _ = certificate_sweep(f, mask, xi, nu, domain_kind="bounded-mask")
            return max(0.0, best - est.value - 1e-8), (
                f"best={best:.6g} norm={est.value:.6g}")

        rec.run(f"below-{i:03d}", below, tolerance=0.0,
                anchor=COVERAGE_KEYS["norms:certificate-below-norm"],
                index=i, dims=d, sizes="theta on mask", distribution="complex-gaussian")

        def translate(f=f, mask=mask, xi=xi, nu=nu, shift=shift):
            best, _ = certificate_sweep(f, mask, xi, nu, domain_kind="bounded-mask")
            best2, _ = certificate_sweep(f, mask.translate(shift), xi, nu,
                                         domain_kind="bounded-mask")
            # Floor at 1 so a kernel supported off the difference set (both
            # Rayleigh values pure roundoff) does not blow up the ratio.
            return abs(best - best2) / max(best, 1.0), (
                f"best={best:.8g} shifted={best2:.8g} shift={shift.tolist()}")

        rec.run(f"translate-{i:03d}", translate, tolerance=5e-12,
                anchor=COVERAGE_KEYS["norms:certificate-translation-invariance"],
                index=i, dims=d, sizes="theta on mask", distribution="complex-gaussian")

    def reach_1d(seed=seed):
        rng = _case_rng(seed, 10_001)
        c = rng.standard_normal(3) * np.array([1.0, 1.0, 0.5])
        f = Kernel(np.array([-2]),
                   np.array([c[2], c[1], c[0], c[1], c[2]], dtype=complex))
        theta = np.arange(4096) / 4096.0
        symbol = (c[0] + 2 * c[1] * np.cos(2 * np.pi * theta)
                  + 2 * c[2] * np.cos(4 * np.pi * theta))
        target = float(np.max(np.abs(symbol)))
        mask = GridMask.box([0], [2047])
        best = 0.0
        for xi in np.linspace(0.0, 1.0, 257):
            val, _ = certificate_sweep(f, mask, [xi], [-1.0],
                                       domain_kind="orthant-sandwiched")
            best = max(best, val)
        return max(0.0, 0.95 * target - best) / target, (
            f"best={best:.4f} target={target:.4f}")

    rec.run("reach-1d", reach_1d, tolerance=0.0,
            anchor=COVERAGE_KEYS["norms:certificate-reaches-symbol-sup"],
            index=0, dims=1, sizes="L=2048", distribution="real-even-kernel")

    def reach_2d():
        vals = np.zeros((3, 3), dtype=complex)
        vals[0, 1] = vals[2, 1] = vals[1, 0] = vals[1, 2] = 1.0
        f = Kernel(np.array([-1, -1]), vals)
        mask = GridMask.box([0, 0], [47, 47])
        best = 0.0
        for x1 in np.linspace(0.0, 0.5, 5):
            for x2 in np.linspace(0.0, 0.5, 5):
                val, _ = certificate_sweep(f, mask, [x1, x2], [-1.0, -1.0],
                                           domain_kind="orthant-sandwiched")
                best = max(best, val)
        return max(0.0, 0.95 * 4.0 - best) / 4.0, f"best={best:.4f} target=4"

    rec.run("reach-2d", reach_2d, tolerance=0.0,
            anchor=COVERAGE_KEYS["norms:certificate-reaches-symbol-sup"],
            index=0, dims=2, sizes="48x48", distribution="cross-kernel")
    return rec.results


@_suite("nehari",
        covers=("nehari:window-fidelity", "nehari:bracket",
                "nehari:section-soundness", "nehari:extension-monotonicity",
                "nehari:flip-consistency"),
        default_count=10,
        summary="extension solves: fidelity, bracket, sections, monotonicity, reflection")
def _run_nehari(seed, count):
    rec = _Recorder("nehari", seed)
    for i in range(count):
        rng = _case_rng(seed, i)
        d = 2 if i % 5 == 4 else 1
        n = 2 if d == 2 else int(rng.integers(2, 5))
        radii = (n,) * d
        w = Window(radii)
        a = MultiSequence(w, _gauss(rng, w.shape))
        ext = tuple(4 * r for r in radii)
        # One grid serving both the base and the enlarged-window solve.
        grid = tuple(8 * (m + 2) for m in ext)
        tol = 1e-6
        prob = nehari.ExtensionProblem(a, ext, grid, tol=tol, max_iter=3000)
        res = nehari.min_linf_extension(prob)
        scale = max(1.0, res.t_grid)
        label = f"d={d} N={n} t={res.t_grid:.6g}"

        rec.run(f"fidelity-{i:03d}",
                lambda res=res, a=a, radii=radii: (
                    float(np.max(np.abs(_window_view(res.coeffs, radii) - a.coeffs))),
                    "window entries restored exactly"),
                tolerance=0.0, anchor=COVERAGE_KEYS["nehari:window-fidelity"],
                index=i, dims=d, sizes=f"N={n}", distribution="complex-gaussian")

        def bracket(res=res, a=a, tol=tol):
            absa = np.abs(a.coeffs)
            low = float(absa.max()) - tol
            high = float(absa.sum()) + tol
            return max(0.0, low - res.t_grid, res.t_grid - high), (
                f"{low:.6g} <= {res.t_grid:.6g} <= {high:.6g}")

        rec.run(f"bracket-{i:03d}", bracket, tolerance=0.0,
                anchor=COVERAGE_KEYS["nehari:bracket"],
                index=i, dims=d, sizes=f"N={n}", distribution="complex-gaussian")

        def sections(res=res, n=n):
            sizes = (n, 2 * n, 4 * n)
            norms = nehari.section_norm_growth(res.coeffs, sizes)
            dev = max(max(0.0, s - res.t_cert) for s in norms)
            steps = [norms[j] - norms[j + 1] for j in range(len(norms) - 1)]
            dev = max(dev, max((max(0.0, s) for s in steps), default=0.0))
            return dev, f"norms={[f'{s:.6g}' for s in norms]} t_cert={res.t_cert:.6g}"

        rec.run(f"sections-{i:03d}", sections, tolerance=1e-9,
                anchor=COVERAGE_KEYS["nehari:section-soundness"],
                index=i, dims=d, sizes="sizes<=4N", distribution="complex-gaussian")

        def monotone(res=res, grid=grid):
            # Refining a nested evaluation grid can only reveal more of the
            # symbol, and the inflated certificate still dominates the
            # finest level.
            evals = [float(np.max(np.abs(
                eval_symbol(res.coeffs, tuple(f * g for g in grid)).values)))
                for f in (1, 2, 4)]
            dev = max(max(0.0, evals[j] - evals[j + 1]) for j in range(2))
            dev = max(dev, max(0.0, evals[-1] - res.t_cert))
            return dev, (
                f"grid maxima {[f'{v:.8g}' for v in evals]} "
                f"t_cert={res.t_cert:.8g}")

        rec.run(f"monotone-{i:03d}", monotone, tolerance=1e-9 * scale,
                anchor=COVERAGE_KEYS["nehari:extension-monotonicity"],
                index=i, dims=d, sizes=f"grid {grid[0]} x1,x2,x4",
                distribution="complex-gaussian")

        def flipped(a=a, w=w, ext=ext, grid=grid, tol=tol, res=res):
            rev = MultiSequence(
                w, a.coeffs[(slice(None, None, -1),) * a.coeffs.ndim].copy())
            prob2 = nehari.ExtensionProblem(rev, ext, grid, tol=tol, max_iter=3000)
            res2 = nehari.min_linf_extension(prob2)
            return abs(res2.t_grid - res.t_grid), (
                f"t={res.t_grid:.8g} reflected={res2.t_grid:.8g}")

        rec.run(f"reflect-{i:03d}", flipped, tolerance=4 * tol * scale,
                anchor=COVERAGE_KEYS["nehari:flip-consistency"],
                index=i, dims=d, sizes=label, distribution="complex-gaussian")
    return rec.results


def _smooth_bump(d: int, g: int, lo: float = 0.25, hi: float = 0.75):
    def func(pts):
        u = (pts - (lo + hi) / 2.0) / ((hi - lo) / 2.0)
        r2 = np.sum(u * u, axis=-1)
        out = np.zeros(r2.shape)
        inside = r2 < 1.0
        out[inside] = np.exp(-1.0 / (1.0 - r2[inside]))
        return out

    margin = int(np.floor(lo * g))
    return fz.CubeFunction.from_callable(d, g, margin, func)


@_suite("factorization",
        covers=("factorization:per-term-decay", "factorization:partial-l1-stabilizes",
                "factorization:coefficient-linearity",
                "factorization:nuclear-norm-consistency"),
        default_count=12,
        summary="tent expansion: per-term error decay, mass stabilization, linearity")
def _run_factorization(seed, count):
    rec = _Recorder("factorization", seed)
    for i in range(count):
        rng = _case_rng(seed, i)
        kind = i % 4

        if kind == 0:
            d = 1 + (i // 4) % 2
            k = tuple(int(x) for x in rng.integers(-4, 5, size=d))
            g_fine = 128 if d == 1 else 64

            def decay(k=k, d=d, g_fine=g_fine):
                e_fine = fz.verify_convolution_identity(k, g_fine)
                e_coarse = fz.verify_convolution_identity(k, g_fine // 2)
                ratio = e_coarse / e_fine
                dev = max(0.0, e_fine - 4.0 * d / g_fine)
                dev = max(dev, max(0.0, 1.5 - ratio), max(0.0, ratio - 3.0))
                return dev, f"k={k} err({g_fine})={e_fine:.2e} ratio={ratio:.2f}"

            rec.run(f"decay-{i:03d}", decay, tolerance=0.0,
                    anchor=COVERAGE_KEYS["factorization:per-term-decay"],
                    index=i, dims=d, sizes=f"G={g_fine} vs {g_fine // 2}",
                    distribution="uniform-k")
        elif kind == 1:
            g_grid = (128, 256, 512)[(i // 4) % 3]

            def stabilize(g_grid=g_grid):
                bump = _smooth_bump(1, g_grid)
                masses = []
                nuc_dev = 0.0
                for kk in (4, 8, 16, 32):
                    res = fz.weak_factorize(bump, kk)
                    masses.append(res.partial_l1)
                    nuc_dev = max(nuc_dev, abs(res.nuclear_norm - res.partial_l1 / 2.0))
                incr = [b - a for a, b in zip(masses, masses[1:])]
                mono = max(0.0, -min(incr)) / masses[-1]
                # The tent kink caps the quotient's coefficient decay at
                # 1/k^2, so the octave increments shrink geometrically
                # instead of dropping below a fixed cutoff by K=32.
                geo = max(0.0, max(incr[j + 1] - 0.6 * incr[j] for j in range(2)))
                tail = max(0.0, incr[-1] / masses[-1] - 0.012)
                dev = max(mono, geo, tail, nuc_dev)
                return dev, f"partial_l1={[f'{m:.6g}' for m in masses]}"

            rec.run(f"stabilize-{i:03d}", stabilize, tolerance=1e-9,
                    anchor=COVERAGE_KEYS["factorization:partial-l1-stabilizes"],
                    index=i, dims=1, sizes=f"G={g_grid} K<=32",
                    distribution="smooth-bump")

            d_bl = 2 if i >= 8 else 1
            bl_grid = 64 if d_bl == 2 else g_grid

            def bandlimited(d_bl=d_bl, bl_grid=bl_grid):
                t = np.arange(bl_grid) / bl_grid
                q1 = 1.0 + 0.6 * np.cos(2 * np.pi * t)
                q = q1
                for _ in range(d_bl - 1):
                    q = np.multiply.outer(q, q1)
                gq = fz.CubeFunction(d_bl, bl_grid, 0,
                                     q * fz.tent_values(d_bl, bl_grid))
                ks = (1, 2, 4) if d_bl == 2 else (1, 2, 4, 8)
                masses = [fz.weak_factorize(gq, kk, min_margin=0).partial_l1
                          for kk in ks]
                want = 1.6 ** d_bl
                dev = max(abs(m - want) for m in masses)
                return dev, f"masses={[f'{m:.12g}' for m in masses]} want={want}"

            rec.run(f"bandlimited-{i:03d}", bandlimited, tolerance=1e-12,
                    anchor=COVERAGE_KEYS["factorization:partial-l1-stabilizes"],
                    index=i, dims=d_bl, sizes=f"G={bl_grid}",
                    distribution="bandlimited-quotient")
        elif kind == 2:
            def linearity(rng=rng):
                g = _smooth_bump(1, 128)
                al = complex(_gauss(rng, ()))
                scaled = fz.CubeFunction(1, 128, g.margin, al * g.values)
                r1 = fz.weak_factorize(g, 8)
                r2 = fz.weak_factorize(scaled, 8)
                return _rel(r2.term_array(), al * r1.term_array()), f"alpha={al:.3g}"

            rec.run(f"linearity-{i:03d}", linearity, tolerance=1e-12,
                    anchor=COVERAGE_KEYS["factorization:coefficient-linearity"],
                    index=i, dims=1, sizes="G=128 K=8", distribution="smooth-bump")
        else:
            def roundtrip():
                g = _smooth_bump(1, 256)
                res = fz.weak_factorize(g, 16)
                back = fz.reconstruct(res)
                err = float(np.max(np.abs(back.values - g.values)))
                dev = abs(err - res.residual_sup) / max(res.residual_sup, 1e-30)
                dev = max(dev, abs(res.nuclear_norm - res.partial_l1 / 2.0))
                return dev, f"residual={res.residual_sup:.3e}"

            rec.run(f"reconstruct-{i:03d}", roundtrip, tolerance=1e-9,
                    anchor=COVERAGE_KEYS["factorization:nuclear-norm-consistency"],
                    index=i, dims=1, sizes="G=256 K=16", distribution="smooth-bump")
    return rec.results


@_suite("cli", covers=("cli:determinism", "cli:exit-codes"), default_count=0,
        summary="subcommand determinism and the exit-code contract")
def _run_cli(seed, count):
    import os
    import tempfile

    from . import cli as _cli
    from .operators import save_kernel

    rec = _Recorder("cli", seed)
    rng = _case_rng(seed, 0)

    def call(argv):
        buf = io.StringIO()
        with redirect_stdout(buf):
            code = _cli.main(argv)
        return code, buf.getvalue()

    with tempfile.TemporaryDirectory() as tmp:
        kern_path = os.path.join(tmp, "kernel.json")
        save_kernel(Kernel(np.array([-2]), _gauss(rng, 5)), kern_path)
        dom_path = os.path.join(tmp, "domain.json")
        with open(dom_path, "w", encoding="utf-8") as fh:
            json.dump({"kind": "box", "lo": [0], "hi": [19]}, fh)

        def determinism_norm():
            outs = []
            codes = []
            for run in range(2):
                out = os.path.join(tmp, f"norm-{run}.json")
                code, _ = call(["norm", "--kernel", kern_path, "--domain", dom_path,
                                "--flavor", "psi", "--seed", "11", "--out", out])
                codes.append(code)
                with open(out, encoding="utf-8") as fh:
                    doc = json.load(fh)
                doc.pop("wall_s", None)
                outs.append(json.dumps(doc, sort_keys=True))
            dev = 0.0 if outs[0] == outs[1] else 1.0
            dev = max(dev, 0.0 if codes == [0, 0] else 1.0)
            return dev, f"codes={codes}"

        rec.run("determinism-norm", determinism_norm, tolerance=0.0,
                anchor=COVERAGE_KEYS["cli:determinism"], dims=1, sizes="20 cells")

        def determinism_sweep():
            raws = []
            for run in range(2):
                out = os.path.join(tmp, f"sweep-{run}.csv")
                code, _ = call(["sweep", "--d", "1", "--n", "2", "--trials", "3",
                                "--seed", "5", "--out", out, "--no-plot"])
                if code != 0:
                    return 1.0, f"exit {code}"
                with open(out, "rb") as fh:
                    raws.append(fh.read())
            return (0.0 if raws[0] == raws[1] else 1.0), "csv bytes compared"

        rec.run("determinism-sweep", determinism_sweep, tolerance=0.0,
                anchor=COVERAGE_KEYS["cli:determinism"], dims=1, sizes="3 trials")

        def exit_input_error():
            bad = os.path.join(tmp, "bad.json")
            with open(bad, "w", encoding="utf-8") as fh:
                json.dump({"d": 1, "lo": [0]}, fh)
            code, _ = call(["norm", "--kernel", bad, "--domain", dom_path])
            return (0.0 if code == 2 else 1.0), f"exit {code}"

        rec.run("exit-input-error", exit_input_error, tolerance=0.0,
                anchor=COVERAGE_KEYS["cli:exit-codes"], dims=1, sizes="")

        def exit_nonconvergence():
            out = os.path.join(tmp, "stub.json")
            code, _ = call(["norm", "--kernel", kern_path, "--domain", dom_path,
                            "--tol", "1e-15", "--max-iter", "2", "--out", out])
            emitted = os.path.exists(out)
            return (0.0 if code == 3 and emitted else 1.0), (
                f"exit {code} emitted={emitted}")

        rec.run("exit-nonconvergence", exit_nonconvergence, tolerance=0.0,
                anchor=COVERAGE_KEYS["cli:exit-codes"], dims=1, sizes="max-iter=2")

        def exit_resource():
            stair = os.path.join(tmp, "stair.json")
            with open(stair, "w", encoding="utf-8") as fh:
                json.dump({"kind": "staircase", "h": 1e-7,
                           "spec": {"d": 1, "boxes": [{"lo": [0.0], "hi": [1.0]}],
                                    "bound": 1.0}}, fh)
            code, _ = call(["certify", "--kernel", kern_path, "--domain", stair,
                            "--xi", "0.1", "--nu", "-1"])
            return (0.0 if code == 4 else 1.0), f"exit {code}"

        rec.run("exit-resource-cap", exit_resource, tolerance=0.0,
                anchor=COVERAGE_KEYS["cli:exit-codes"], dims=1, sizes="h=1e-7")
    return rec.results


@_suite("strip", covers=("strip:block-decomposition",), default_count=10,
        summary="strip-mask norms equal the best longitudinal block norm")
def _run_strip(seed, count):
    rec = _Recorder("strip", seed)
    for i in range(count):
        rng = _case_rng(seed, i)
        length = int(rng.integers(16, 33))
        height = int(rng.integers(2, 5))
        s0 = int(rng.integers(0, 2 * height - 1))

        def check(rng=rng, length=length, height=height, s0=s0):
            a0 = int(rng.integers(0, 2 * length - 1))
            b0 = int(rng.integers(a0, 2 * length - 1))
            profile = _gauss(rng, b0 - a0 + 1)
            kern = Kernel(np.array([a0, s0]), profile.reshape(-1, 1))
            mask = GridMask.box([0, 0], [length - 1, height - 1])
            full = norm_dense(CorrelationOperator(kern, mask, mask, "psi"))
            line = GridMask.box([0], [length - 1])
            block = norm_dense(CorrelationOperator(
                Kernel(np.array([a0]), profile), line, line, "psi"))
            return abs(full - block) / max(1.0, full), (
                f"L={length} H={height} level={s0} norm={full:.6g}")

        rec.run(f"strip-{i:03d}", check, tolerance=1e-9,
                anchor=COVERAGE_KEYS["strip:block-decomposition"],
                index=i, dims=2, sizes=f"{length}x{height}",
                distribution="complex-gaussian")
    return rec.results


# ---------------------------------------------------------------------------
# entry points and reporting


def list_suites() -> list[str]:
    return sorted(_REGISTRY)


def suite_summaries() -> dict:
    return {name: _REGISTRY[name].summary for name in sorted(_REGISTRY)}


def run_suite(name: str, seed: int = 0, count: int | None = None) -> SuiteReport:
    """Run one registered suite; ``count`` falls back to the suite default."""
    if name not in _REGISTRY:
        raise InputError(
            f"unknown suite {name!r}; available: {', '.join(sorted(_REGISTRY))}")
    spec = _REGISTRY[name]
    n = spec.default_count if count is None else int(count)
    t0 = time.perf_counter()
    results = spec.runner(int(seed), n)
    return SuiteReport(name, int(seed), n, tuple(results),
                       time.perf_counter() - t0)


def run_all(seed: int = 0, count: int | None = None) -> list[SuiteReport]:
    return [run_suite(name, seed, count) for name in sorted(_REGISTRY)]


def coverage_map() -> dict:
    out = {key: [] for key in COVERAGE_KEYS}
    for name in sorted(_REGISTRY):
        for key in _REGISTRY[name].covers:
            out.setdefault(key, []).append(name)
    return out


def coverage_gaps() -> tuple[list, list]:
    """(checklist keys no suite covers, claimed keys not in the checklist)."""
    covered = set()
    for spec in _REGISTRY.values():
        covered.update(spec.covers)
    missing = sorted(set(COVERAGE_KEYS) - covered)
    unknown = sorted(covered - set(COVERAGE_KEYS))
    return missing, unknown


def report_to_dict(report: SuiteReport) -> dict:
    worst = report.worst()
    return {
        "suite": report.suite,
        "seed": report.seed,
        "count": report.count,
        "passed": report.passed,
        "n_cases": len(report.results),
        "n_failed": len(report.failures),
        "wall_s": report.wall_s,
        "worst_case": None if worst is None else worst.case.name,
        "cases": [
            {
                "name": r.case.name,
                "passed": r.passed,
                "deviation": r.deviation,
                "tolerance": r.case.tolerance,
                "wall_s": r.wall_s,
                "detail": r.detail,
                "record": asdict(r.case),
            }
            for r in report.results
        ],
    }


def write_junit_xml(reports, path) -> None:
    """JUnit-style XML for one report or a list of reports."""
    if isinstance(reports, SuiteReport):
        reports = [reports]
    root = ET.Element("testsuites")
    root.set("tests", str(sum(len(r.results) for r in reports)))
    root.set("failures", str(sum(len(r.failures) for r in reports)))
    root.set("time", f"{sum(r.wall_s for r in reports):.3f}")
    for rep in reports:
        suite = ET.SubElement(root, "testsuite")
        suite.set("name", f"corrops.{rep.suite}")
        suite.set("tests", str(len(rep.results)))
        suite.set("failures", str(len(rep.failures)))
        suite.set("time", f"{rep.wall_s:.3f}")
        for res in rep.results:
            case = ET.SubElement(suite, "testcase")
            case.set("classname", f"corrops.{rep.suite}")
            case.set("name", res.case.name)
            case.set("time", f"{res.wall_s:.3f}")
            if not res.passed:
                failure = ET.SubElement(case, "failure")
                failure.set("message",
                            f"deviation {res.deviation:.6g} exceeds tolerance "
                            f"{res.case.tolerance:.6g}")
                failure.text = res.detail
    tree = ET.ElementTree(root)
    ET.indent(tree)
    tree.write(path, encoding="unicode", xml_declaration=True)
