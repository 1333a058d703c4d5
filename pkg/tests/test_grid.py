import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from wavelet_upwind.adaptivity import _close_parents
from wavelet_upwind.grid import (CoefficientSet, InvalidGridError, MissingValueError,
                                 OffLatticeError, build_uniform, evaluate, forward_transform,
                                 node_levels, point_matrix, read_snapshot, threshold,
                                 write_snapshot)
from wavelet_upwind.wavelet_basis import basis_pair


@pytest.fixture(scope="module")
def bases():
    return basis_pair(5, 10)


def random_grid(seed, J0=4, Jmax=7, bc="periodic", domain=(-1.0, 1.0), density=0.2):
    rng = np.random.default_rng(seed)
    g = build_uniform(J0, domain, bc, Jmax=Jmax)
    stop = g.n_fine if g.periodic else g.n_fine + 1
    pick = np.flatnonzero(rng.random(stop) < density)
    return g.with_fine(_close_parents(g, np.union1d(g.fine, pick)))


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2 ** 20), st.integers(2, 10))
def test_node_levels_brute_force(K, J0):
    Jmax = J0 + 5
    expected = next(J for J in range(J0, Jmax + 1) if K % (1 << (Jmax - J)) == 0)
    assert node_levels(np.array([K]), J0, Jmax)[0] == expected


def test_uniform_layout():
    g = build_uniform(4, (-5.0, 5.0), "fixed", Jmax=7, unit=1.0)
    assert g.n0 == 160 and g.size == 161
    assert g.spacing(4) == pytest.approx(1 / 16)
    assert g.spacing(7) == pytest.approx(1 / 128)
    p = build_uniform(4, (-1.0, 1.0))
    assert p.size == 16 and p.x[0] == -1.0 and p.x[-1] == pytest.approx(1 - 2 / 16)


def test_invalid_grids():
    with pytest.raises(InvalidGridError):
        build_uniform(4, (1.0, 0.0))
    with pytest.raises(InvalidGridError):
        build_uniform(4, (0.0, 1.0), "mystery")
    with pytest.raises(InvalidGridError):
        build_uniform(4, (0.0, 1.0), Jmax=3)
    g = build_uniform(4, (0.0, 1.0), Jmax=6)
    with pytest.raises(InvalidGridError):
        g.with_fine(g.fine[1:])
    with pytest.raises(MissingValueError):
        g.position(1)


@pytest.mark.parametrize("bc", ["periodic", "fixed"])
@pytest.mark.parametrize("seed", range(5))
def test_roundtrip_at_active_nodes(bases, bc, seed):
    g = random_grid(seed, bc=bc)
    vals = np.random.default_rng(seed + 100).normal(size=g.size)
    for basis in bases:
        coef = forward_transform(g, vals, basis)
        back = evaluate(g, coef, basis, g.x)
        assert np.max(np.abs(back - vals)) <= 1e-12 * max(1.0, np.max(np.abs(vals)))


def test_base_functions_interpolate_on_bounded_grid(bases):
    g = build_uniform(4, (0.0, 1.0), "fixed")
    M = point_matrix(g, bases[0], g.fine).toarray()
    np.testing.assert_allclose(M, np.eye(g.size), atol=1e-14)


@pytest.mark.parametrize("bc", ["periodic", "fixed"])
def test_polynomial_reproduced_near_boundaries(bases, bc):
    g = build_uniform(4, (0.0, 1.0), bc)
    f = (lambda x: np.sin(2 * np.pi * x)) if bc == "periodic" else (lambda x: (x - 0.3) ** 4)
    coef = forward_transform(g, f(g.x), bases[0])
    x = (np.arange(16) + 0.5) / 16
    err = np.max(np.abs(evaluate(g, coef, bases[0], x) - f(x)))
    assert err < (1e-3 if bc == "periodic" else 1e-12)


def test_interpolation_order_at_midpoints(bases):
    errs = []
    for J0 in (4, 5, 6, 7):
        g = build_uniform(J0, (-1.0, 1.0))
        coef = forward_transform(g, np.sin(np.pi * g.x), bases[0])
        mid = g.x + 0.5 * g.spacing(J0)
        errs.append(np.max(np.abs(evaluate(g, coef, bases[0], mid) - np.sin(np.pi * mid))))
    orders = np.log2(np.array(errs[:-1]) / np.array(errs[1:]))
    assert orders[-1] >= 4.0


def test_zero_detail_nodes_do_not_change_expansion(bases):
    g = random_grid(3)
    vals = np.cos(np.pi * g.x)
    coef = forward_transform(g, vals, bases[0])
    extra = g.with_fine(_close_parents(g, np.union1d(g.fine, np.arange(0, g.n_fine, 2))))
    new_vals = evaluate(g, coef, bases[0], extra.x)
    coef2 = forward_transform(extra, new_vals, bases[0])
    added = ~g.contains(extra.fine)
    assert np.max(np.abs(coef2.values[added])) < 1e-12
    probe = np.linspace(-1, 1, 257)[:-1]
    np.testing.assert_allclose(evaluate(extra, coef2, bases[0], probe),
                               evaluate(g, coef, bases[0], probe), atol=1e-12)


def test_periodic_shift_equivariance(bases):
    g = random_grid(7)
    shifted = g.with_fine(g.fine + g.step0)
    vals = np.random.default_rng(1).normal(size=g.size)
    c = forward_transform(g, vals, bases[0]).values
    order = np.argsort(np.mod(g.fine + g.step0, g.n_fine))
    c_shift = forward_transform(shifted, vals[order], bases[0]).values
    np.testing.assert_allclose(c_shift, c[order], atol=1e-12)


def test_coarse_evaluation_ignores_finer_details(bases):
    g = random_grid(11)
    vals = np.random.default_rng(2).normal(size=g.size)
    coef = forward_transform(g, vals, bases[0])
    lvl5 = g.x[g.levels <= 5]
    finer = coef.values.copy()
    finer[g.levels > 5] = 0.0
    np.testing.assert_allclose(evaluate(g, CoefficientSet(g, finer), bases[0], lvl5),
                               evaluate(g, coef, bases[0], lvl5), atol=1e-13)


def test_off_lattice_evaluation_raises(bases):
    g = build_uniform(4, (0.0, 1.0))
    coef = forward_transform(g, np.zeros(g.size), bases[0])
    with pytest.raises(OffLatticeError):
        evaluate(g, coef, bases[0], 1 / 3)
    with pytest.raises(ValueError):
        evaluate(g, coef, bases[0], 1.5)


def test_threshold_examples(bases):
    g = build_uniform(4, (-1.0, 1.0), Jmax=8)
    g = g.with_fine(np.arange(g.n_fine))
    zero = CoefficientSet(g, np.zeros(g.size))
    assert len(threshold(zero, 1e-5)) == 0
    v = np.zeros(g.size)
    K = 5 << (g.Jmax - 5)
    v[g.position(K)] = 2e-5
    assert list(threshold(CoefficientSet(g, v), 1e-5)) == [K]
    sq = ((g.x >= -0.4) & (g.x <= 0.4)).astype(float)
    hits = threshold(forward_transform(g, sq, bases[0]), 1e-5)
    assert 0 < len(hits) < 0.2 * g.size
    assert np.all(np.minimum(np.abs(g.fine_to_x(hits) + 0.4), np.abs(g.fine_to_x(hits) - 0.4))
                  < 10 * g.spacing(5))


def test_snapshot_roundtrip(tmp_path):
    g = random_grid(5)
    vals = np.c_[np.sin(g.x), np.cos(g.x)]
    path = tmp_path / "snap.csv"
    write_snapshot(path, g, vals, ["a", "b"])
    data = read_snapshot(path)
    assert list(data) == ["level", "index", "x", "a", "b"]
    np.testing.assert_array_equal(data["x"], g.x)
    np.testing.assert_array_equal(data["a"], vals[:, 0])
    np.testing.assert_array_equal(data["level"], g.levels)
    assert np.all(np.diff(data["x"]) > 0)
