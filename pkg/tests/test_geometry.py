import numpy as np
import pytest
from scipy.optimize import linprog

from corrops.errors import GeometryError, InputError, ResourceError
from corrops.geometry import (
    GridMask,
    Polytope,
    domain_from_dict,
    domain_sum,
    far_boundary,
    incidence,
    is_simple,
    partition_of_unity,
    rasterize,
    rasterize_staircase,
    support_function,
    validate_direction,
)


def lp_support(p: Polytope, theta) -> float:
    """Support function via linear programming over the facet system only.

    Ignores the vertex list entirely, so agreement with support_function
    confirms the vertex and facet data describe the same body.
    """
    res = linprog(-np.asarray(theta, dtype=float), A_ub=-p.normals,
                  b_ub=-p.offsets, bounds=[(None, None)] * p.d,
                  method="highs")
    assert res.status == 0
    return -res.fun


def pyramid() -> Polytope:
    verts = np.array([
        [0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [1.0, 1.0, 0.0], [0.0, 1.0, 0.0],
        [0.5, 0.5, 1.0],
    ])
    normals = np.array([
        [0.0, 0.0, 1.0],
        [0.0, 2.0, -1.0],
        [-2.0, 0.0, -1.0],
        [0.0, -2.0, -1.0],
        [2.0, 0.0, -1.0],
    ])
    offsets = np.array([0.0, 0.0, -2.0, -2.0, 0.0])
    return Polytope(verts, normals, offsets)


def test_box_structure():
    p = Polytope.box([-1.0, 0.0], [2.0, 1.5])
    assert p.d == 2
    assert p.vertices.shape == (4, 2)
    assert p.normals.shape == (4, 2)
    assert is_simple(p)
    assert incidence(p).sum(axis=1).tolist() == [2, 2, 2, 2]


def test_simplex_structure():
    pts = np.array([[0.0, 0.0], [2.0, 0.0], [0.0, 3.0]])
    p = Polytope.simplex(pts)
    assert is_simple(p)
    # Each facet misses exactly one vertex.
    for j in range(3):
        assert far_boundary(p, j).size == 1


def test_pyramid_apex_is_not_simple():
    p = pyramid()
    counts = incidence(p).sum(axis=1)
    assert counts[4] == 4
    assert counts[:4].tolist() == [3, 3, 3, 3]
    assert not is_simple(p)


def test_polytope_validation():
    with pytest.raises(GeometryError):
        Polytope(np.array([[0.0], [2.0]]), np.array([[1.0]]), np.array([1.0]))
    with pytest.raises(GeometryError):
        Polytope.box([0.0], [0.0])
    with pytest.raises(GeometryError):
        Polytope.simplex(np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [1.0, 1.0]]))


def test_support_function_against_lp():
    rng = np.random.default_rng(21)
    bodies = [
        Polytope.box([-1.0, -2.0], [0.5, 3.0]),
        Polytope.simplex(np.array([[0.0, 0.0], [2.0, 0.2], [0.4, 1.7]])),
        Polytope.box([0.0, 0.0, 0.0], [1.0, 2.0, 3.0]),
        pyramid(),
    ]
    for p in bodies:
        for _ in range(12):
            theta = rng.standard_normal(p.d)
            assert support_function(p, theta) == pytest.approx(
                lp_support(p, theta), abs=1e-9)
    with pytest.raises(GeometryError):
        support_function(bodies[0], [1.0, 0.0, 0.0])


def test_support_function_positive_homogeneity():
    p = Polytope.simplex(np.array([[0.1, 0.0], [1.9, 0.3], [0.5, 2.1]]))
    rng = np.random.default_rng(22)
    for _ in range(8):
        theta = rng.standard_normal(2)
        h = support_function(p, theta)
        assert support_function(p, 2.0 * theta) == 2.0 * h
        assert support_function(p, 1.7 * theta) == pytest.approx(1.7 * h, rel=1e-12)


def test_grid_mask_basics():
    m = GridMask.box([-1, 2], [1, 3])
    assert m.d == 2
    assert m.n_cells == 6
    assert m.indices()[0].tolist() == [-1, 2]
    assert np.array_equal(m.points(), m.indices().astype(float))
    shifted = m.translate([2, -2])
    assert shifted.lo.tolist() == [1, 0]
    assert shifted.same_cells(GridMask.box([1, 0], [3, 1]))


def test_grid_mask_validation():
    with pytest.raises(GeometryError):
        GridMask(np.array([0]), np.zeros(3, dtype=bool))
    cells = np.array([True, False, True])
    with pytest.raises(GeometryError):
        GridMask(np.array([0]), cells)
    with pytest.raises(GeometryError):
        GridMask.box([0], [3], spacing=0.0)


def test_erode():
    m = GridMask.box([0, 0], [4, 4])
    inner = m.erode(1)
    assert inner.same_cells(GridMask.box([1, 1], [3, 3]))
    assert m.erode(0) is m
    with pytest.raises(GeometryError):
        m.erode(3)


def test_rasterize_box_counts_and_interior():
    p = Polytope.box([0.0, 0.0], [1.0, 1.0])
    m = rasterize(p, 1.0 / 8)
    # Strictly interior centers only: (k1, k2) * h with 0 < k_i * h < 1.
    assert m.n_cells == 7 * 7
    pts = m.points()
    slack = pts @ p.normals.T - p.offsets[None, :]
    assert slack.min() > 0


def test_rasterize_refinement_containment():
    p = Polytope.simplex(np.array([[0.05, 0.1], [1.9, 0.3], [0.4, 1.8]]))
    coarse = rasterize(p, 1.0 / 32)
    fine = rasterize(p, 1.0 / 64)
    # Doubling the resolution keeps every coarse center (even indices stay
    # strictly interior).
    fine_set = {tuple(k) for k in fine.indices()}
    for k in coarse.indices():
        assert tuple(2 * k) in fine_set
    assert fine.n_cells > coarse.n_cells


def test_rasterize_failures():
    sliver = Polytope.box([0.0, 0.0], [1.0, 1e-4])
    with pytest.raises(GeometryError):
        rasterize(sliver, 1.0 / 16)
    big = Polytope.box([0.0, 0.0], [1.0, 1.0])
    with pytest.raises(ResourceError):
        rasterize(big, 1e-5)
    with pytest.raises(GeometryError):
        rasterize(big, -0.5)


def test_rasterize_staircase_unit_box():
    spec = {"d": 1, "boxes": [{"lo": [0.0], "hi": [1.0]}], "bound": 1.0}
    m = rasterize_staircase(spec, 1.0 / 16)
    assert m.lo.tolist() == [1]
    assert m.n_cells == 15
    assert m.spacing == 1.0 / 16


def test_rasterize_staircase_l_shape():
    spec = {
        "d": 2,
        "boxes": [
            {"lo": [0.0, 0.0], "hi": [2.0, 1.0]},
            {"lo": [0.0, 0.0], "hi": [1.0, 2.0]},
        ],
        "bound": 2.0,
    }
    m = rasterize_staircase(spec, 0.25)
    pts = m.points()
    in_a = np.all((pts > 0) & (pts < [2.0, 1.0]), axis=1)
    in_b = np.all((pts > 0) & (pts < [1.0, 2.0]), axis=1)
    assert np.all(in_a | in_b)
    assert m.n_cells == 7 * 3 + 3 * 7 - 3 * 3


def test_rasterize_staircase_validation():
    with pytest.raises(InputError):
        rasterize_staircase({"d": 1, "boxes": []}, 0.1)
    spec = {"d": 1, "boxes": [{"lo": [0.5], "hi": [2.0]}], "bound": 0.25}
    with pytest.raises(InputError):
        rasterize_staircase(spec, 0.1)
    cap = {"d": 1, "boxes": [{"lo": [0.0], "hi": [1.0]}], "bound": 1.0}
    with pytest.raises(ResourceError):
        rasterize_staircase(cap, 1e-7)


def test_domain_sum_matches_brute_force():
    rng = np.random.default_rng(23)
    for _ in range(6):
        a = GridMask.box(rng.integers(-3, 0, 2), rng.integers(1, 4, 2))
        b = GridMask.box(rng.integers(-2, 0, 2), rng.integers(0, 3, 2))
        s = domain_sum(a, b)
        want = {tuple(x + y) for x in a.indices() for y in b.indices()}
        got = {tuple(k) for k in s.indices()}
        assert got == want


def test_domain_sum_commutes():
    a = GridMask.from_indices([[0, 0], [1, 0], [1, 1]])
    b = GridMask.box([0, 0], [2, 1])
    assert domain_sum(a, b).same_cells(domain_sum(b, a))


def test_partition_of_unity_sums_to_one():
    p = Polytope.box([0.0, 0.0], [6.0, 5.0])
    mask, members = partition_of_unity(p, h=0.25, margin=0.8)
    total = np.zeros(mask.cells.shape)
    for m in members:
        assert m.min() >= 0.0
        total += m
    assert np.max(np.abs(total[mask.cells] - 1.0)) < 1e-12
    assert np.all(total[~mask.cells] == 0.0)


def test_partition_members_vanish_near_far_boundary():
    p = Polytope.box([0.0, 0.0], [6.0, 5.0])
    margin = 0.8
    mask, members = partition_of_unity(p, h=0.25, margin=margin)
    pts = (mask.lo + np.argwhere(mask.cells)) * 0.25
    unit = p.normals / np.linalg.norm(p.normals, axis=1, keepdims=True)
    soff = p.offsets / np.linalg.norm(p.normals, axis=1)
    flat = [m.ravel()[np.flatnonzero(mask.cells.ravel())] for m in members]
    for j in range(p.vertices.shape[0]):
        far = far_boundary(p, j)
        dist = np.min(pts @ unit[far].T - soff[far][None, :], axis=1)
        assert np.all(flat[j][dist <= margin] == 0.0)


def test_partition_of_unity_guards():
    p = Polytope.box([0.0, 0.0], [2.0, 2.0])
    with pytest.raises(GeometryError):
        partition_of_unity(p, h=0.5, margin=0.6)
    with pytest.raises(GeometryError):
        partition_of_unity(p, h=0.1, margin=1.5)


def test_validate_direction():
    assert validate_direction([1.0, -1.0], "bounded-mask")
    assert validate_direction([-1.0, -0.5], "orthant-sandwiched")
    assert not validate_direction([-1.0, 0.5], "orthant-sandwiched")
    with pytest.raises(InputError):
        validate_direction([1.0], "half-plane")
    with pytest.raises(GeometryError):
        validate_direction([0.0, 0.0], "bounded-mask")


def test_domain_from_dict_box():
    mask, kind = domain_from_dict({"kind": "box", "lo": [0, 0], "hi": [3, 2]})
    assert kind == "bounded-mask"
    assert mask.n_cells == 12


def test_domain_from_dict_staircase():
    doc = {"kind": "staircase", "h": 0.25,
           "spec": {"d": 1, "boxes": [{"lo": [0.0], "hi": [1.0]}], "bound": 1.0}}
    mask, kind = domain_from_dict(doc)
    assert kind == "orthant-sandwiched"
    assert mask.n_cells == 3


def test_domain_from_dict_polytope():
    doc = {
        "kind": "polytope",
        "h": 0.125,
        "polytope": {
            "d": 2,
            "vertices": [[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]],
            "facets": [
                {"normal": [1.0, 0.0], "offset": 0.0},
                {"normal": [0.0, 1.0], "offset": 0.0},
                {"normal": [-1.0, 0.0], "offset": -1.0},
                {"normal": [0.0, -1.0], "offset": -1.0},
            ],
        },
    }
    mask, kind = domain_from_dict(doc)
    assert kind == "bounded-mask"
    assert mask.n_cells == 49


def test_domain_from_dict_errors():
    with pytest.raises(InputError):
        domain_from_dict({"lo": [0], "hi": [1]})
    with pytest.raises(InputError):
        domain_from_dict({"kind": "disk", "radius": 1.0})
    with pytest.raises(InputError):
        domain_from_dict({"kind": "box", "lo": [0]})
