import numpy as np
import pytest

from corrops.errors import InputError
from corrops.factorization import (
    CubeFunction,
    FactorizationResult,
    cubefunction_from_dict,
    cubefunction_to_dict,
    half_cube_samples,
    load_cubefunction,
    reconstruct,
    save_cubefunction,
    tent_values,
    verify_convolution_identity,
    weak_factorize,
)


def bandlimited_input(d, g):
    """g = (1 + 0.6 cos(2 pi x_1)) ... (1 + 0.6 cos(2 pi x_d)) * tent.

    The tent quotient is band limited with l1 mass exactly 1.6 per axis, so
    the expansion must reproduce it exactly once kmax >= 1.
    """
    t = np.arange(g) / g
    q1 = 1.0 + 0.6 * np.cos(2 * np.pi * t)
    q = q1
    for _ in range(d - 1):
        q = np.multiply.outer(q, q1)
    return CubeFunction(d, g, 0, q * tent_values(d, g))


def bump_quotient(g):
    x = np.arange(g) / g
    u = (x - 0.5) / 0.25
    inside = np.abs(u) < 1
    q = np.zeros(g)
    q[inside] = np.exp(-1.0 / (1.0 - u[inside] ** 2))
    return q


def test_tent_values_exact():
    lam = tent_values(1, 8)
    assert lam.tolist() == [0.0, 0.125, 0.25, 0.375, 0.5, 0.375, 0.25, 0.125]
    assert lam.sum() == 8 / 4
    lam2 = tent_values(2, 8)
    assert np.array_equal(lam2, np.multiply.outer(lam, lam))
    assert lam2.sum() == (8 / 4) ** 2
    with pytest.raises(InputError):
        tent_values(0, 8)
    with pytest.raises(InputError):
        tent_values(1, 1)


def test_cubefunction_validation():
    with pytest.raises(InputError):
        CubeFunction(1, 8, 0, np.ones(7))
    with pytest.raises(InputError):
        CubeFunction(2, 4, 0, np.ones((4, 3)))
    with pytest.raises(InputError):
        CubeFunction(1, 8, 0, np.array([np.nan] + [0.0] * 7))
    with pytest.raises(InputError):
        CubeFunction(1, 8, -1, np.zeros(8))
    vals = np.zeros(8)
    vals[1] = 1.0
    with pytest.raises(InputError):
        CubeFunction(1, 8, 2, vals)
    ok = CubeFunction(1, 8, 2, np.array([0, 0, 1, 2, 3, 2, 0, 0], dtype=float))
    assert ok.margin == 2


def test_from_callable_matches_manual():
    g = 16
    f = CubeFunction.from_callable(2, g, 0, lambda p: p[..., 0] + 2 * p[..., 1])
    x = np.arange(g) / g
    want = np.add.outer(x, 2 * x)
    assert np.array_equal(f.values, want.astype(complex))


def test_half_cube_samples_direct():
    g = 16
    h = half_cube_samples((3,), g)
    j = np.arange(g)
    want = np.where((j > 0) & (j < 8), np.exp(2j * np.pi * 3 * j / g), 0.0)
    assert np.max(np.abs(h - want)) == 0.0
    h2 = half_cube_samples((3, -1), g)
    w1 = np.where((j > 0) & (j < 8), np.exp(-2j * np.pi * j / g), 0.0)
    assert np.max(np.abs(h2 - np.multiply.outer(want, w1))) == 0.0


@pytest.mark.parametrize("k", [(0,), (5,), (-8,)])
def test_convolution_identity_error_1d(k):
    errs = [verify_convolution_identity(k, g) for g in (128, 256)]
    assert errs[0] <= 4.0 / 128
    assert errs[1] <= 4.0 / 256
    assert 1.5 <= errs[0] / errs[1] <= 3.0


@pytest.mark.parametrize("k", [(0, 0), (3, -2), (8, 8)])
def test_convolution_identity_error_2d(k):
    errs = [verify_convolution_identity(k, g) for g in (128, 256)]
    assert errs[0] <= 8.0 / 128
    assert errs[1] <= 8.0 / 256
    assert 1.5 <= errs[0] / errs[1] <= 3.0


def test_weak_factorize_guards():
    thin = CubeFunction(1, 16, 1, np.r_[0.0, 0.0, np.ones(12), 0.0, 0.0])
    with pytest.raises(InputError):
        weak_factorize(thin, 2)
    ok = CubeFunction(1, 16, 2, np.r_[0.0, 0.0, np.ones(12), 0.0, 0.0])
    with pytest.raises(InputError):
        weak_factorize(ok, 8)
    with pytest.raises(InputError):
        weak_factorize(ok, -1)
    bad = np.ones(16)
    with pytest.raises(InputError):
        weak_factorize(CubeFunction(1, 16, 0, bad), 2, min_margin=0)


@pytest.mark.parametrize("d,g,masses", [(1, 64, 1.6), (2, 32, 1.6 ** 2)])
def test_bandlimited_quotient_is_exact(d, g, masses):
    cube = bandlimited_input(d, g)
    for kmax in (1, 2, 4):
        res = weak_factorize(cube, kmax, min_margin=0)
        assert abs(res.partial_l1 - masses) <= 1e-12
        assert res.residual_sup <= 1e-9
        assert res.nuclear_norm == res.partial_l1 / 2 ** d
        arr = res.term_array()
        for pos in np.ndindex(*arr.shape):
            k = tuple(p - kmax for p in pos)
            if any(abs(c) > 1 for c in k):
                assert abs(arr[pos]) <= 1e-12


def test_bump_masses_grow_with_shrinking_increments():
    cube = CubeFunction(1, 256, 64, bump_quotient(256).astype(complex))
    masses = [weak_factorize(cube, k).partial_l1 for k in (2, 4, 8, 16)]
    incr = [b - a for a, b in zip(masses, masses[1:])]
    assert all(v >= -1e-12 for v in incr)
    for a, b in zip(incr, incr[1:]):
        assert b <= a


def test_carried_bump_residual_decreases():
    g = 256
    vals = bump_quotient(g) * tent_values(1, g)
    cube = CubeFunction(1, g, g // 4, vals.astype(complex))
    resids = [weak_factorize(cube, k).residual_sup for k in (4, 8, 16)]
    for a, b in zip(resids, resids[1:]):
        assert b <= a
    assert resids[-1] <= 1e-3


def test_scaling_linearity():
    cube = bandlimited_input(1, 64)
    doubled = CubeFunction(1, 64, 0, 2.0 * cube.values)
    r1 = weak_factorize(cube, 2, min_margin=0)
    r2 = weak_factorize(doubled, 2, min_margin=0)
    assert np.max(np.abs(r2.term_array() - 2.0 * r1.term_array())) <= 1e-12
    assert abs(r2.partial_l1 - 2.0 * r1.partial_l1) <= 1e-12


def test_reconstruct_matches_residual():
    cube = CubeFunction(1, 128, 32, bump_quotient(128).astype(complex))
    res = weak_factorize(cube, 8)
    recon = reconstruct(res)
    err = float(np.max(np.abs(cube.values - recon.values)))
    assert abs(err - res.residual_sup) <= 1e-12
    fine = reconstruct(res, g=256)
    assert fine.g == 256
    assert fine.values.shape == (256,)
    with pytest.raises(InputError):
        reconstruct(res, g=16)


def test_term_array_layout():
    res = weak_factorize(bandlimited_input(1, 64), 2, min_margin=0)
    arr = res.term_array()
    assert arr.shape == (5,)
    for t in res.terms:
        assert arr[t.k[0] + 2] == t.a
    assert len(res.terms) == 5
    doc = res.to_dict()
    assert set(doc) == {
        "d", "G", "kmax", "terms", "residual_sup", "partial_l1", "nuclear_norm",
    }


def test_cubefunction_json_roundtrip(tmp_path):
    rng = np.random.default_rng(9)
    vals = rng.standard_normal((8, 8)) + 1j * rng.standard_normal((8, 8))
    cube = CubeFunction(2, 8, 0, vals)
    path = tmp_path / "cube.json"
    save_cubefunction(cube, path)
    back = load_cubefunction(path)
    assert back.d == 2 and back.g == 8 and back.margin == 0
    assert np.array_equal(back.values, cube.values)


def test_cubefunction_dict_validation(tmp_path):
    doc = cubefunction_to_dict(CubeFunction(1, 2, 0, np.zeros(2)))
    for key in ("d", "G", "margin", "values"):
        broken = dict(doc)
        del broken[key]
        with pytest.raises(InputError):
            cubefunction_from_dict(broken)
    with pytest.raises(InputError):
        cubefunction_from_dict({"d": 1, "G": 2, "margin": 0, "values": [[0.0, 0.0]]})
    with pytest.raises(InputError):
        cubefunction_from_dict(
            {"d": 1, "G": 2, "margin": 0, "values": [[0.0], [0.0, 0.0]]}
        )
    with pytest.raises(InputError):
        cubefunction_from_dict(
            {"d": 1, "G": 2, "margin": 0, "values": [[np.inf, 0.0], [0.0, 0.0]]}
        )
    bad = tmp_path / "bad.json"
    bad.write_text("]")
    with pytest.raises(InputError):
        load_cubefunction(bad)
