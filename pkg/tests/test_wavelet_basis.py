import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from numpy.polynomial import polynomial as P

from wavelet_upwind.wavelet_basis import (InvalidOrderError, OffLatticeError,
                                          compute_filter_coefficients, export_basis,
                                          load_basis_export, make_basis)

# Published nonzero filter coefficients for the two orders used by the solver.
TABLE = {
    (5, "positive"): {-3: -0.0390625, -1: 0.46875, 0: 1.0, 1: 0.703125, 3: -0.15625, 5: 0.0234375},
    (5, "negative"): {-5: 0.0234375, -3: -0.15625, -1: 0.703125, 0: 1.0, 1: 0.46875, 3: -0.0390625},
    (7, "positive"): {-5: 0.0068359375, -3: -0.068359375, -1: 0.5126953125, 0: 1.0,
                      1: 0.68359375, 3: -0.1708984375, 5: 0.041015625, 7: -0.0048828125},
    (7, "negative"): {-7: -0.0048828125, -5: 0.041015625, -3: -0.1708984375, -1: 0.68359375,
                      0: 1.0, 1: 0.5126953125, 3: -0.068359375, 5: 0.0068359375},
}


def lagrange_oracle(N):
    """Odd taps of the positive bank from numpy polynomial fitting.

    Tap 2m+1 is the weight of node 0 when the N nodes m-ceil(N/2)+1 ..
    m+floor(N/2) predict the point m+1/2.
    """
    left = (N + 1) // 2
    out = {0: 1.0}
    for m in range(left - N, left):
        nodes = np.arange(m - left + 1, m + N - left + 1)
        card = (nodes == 0).astype(float)
        coef = P.polyfit(nodes, card, N - 1)
        out[2 * m + 1] = float(P.polyval(m + 0.5, coef))
    return out


@pytest.mark.parametrize("key", sorted(TABLE))
def test_published_coefficients(key):
    bank = compute_filter_coefficients(*key)
    nonzero = {l: v for l, v in bank.h.items() if v != 0.0}
    assert set(nonzero) == set(TABLE[key])
    for l, v in TABLE[key].items():
        assert abs(nonzero[l] - v) <= 1e-12


@pytest.mark.parametrize("N", [3, 5, 7, 9])
def test_independent_polynomial_fit(N):
    bank = compute_filter_coefficients(N, "positive")
    oracle = lagrange_oracle(N)
    for l, v in oracle.items():
        assert bank.h[l] == pytest.approx(v, abs=1e-10)


@pytest.mark.parametrize("N", [3, 5, 7, 9, 11])
def test_mirror_symmetry_and_sum(N):
    pos = compute_filter_coefficients(N, "positive")
    neg = compute_filter_coefficients(N, "negative")
    assert {l: v for l, v in pos.exact.items()} == {-l: v for l, v in neg.exact.items()}
    assert sum(pos.exact.values()) == 2
    assert all(pos.exact.get(2 * k, 0) == 0 for k in range(-N, N + 1) if k)


def test_support_of_n5():
    assert compute_filter_coefficients(5, "positive").support == (-3, 5)
    assert compute_filter_coefficients(5, "negative").support == (-5, 3)


def test_rejects_bad_orders():
    with pytest.raises(InvalidOrderError):
        compute_filter_coefficients(4)
    with pytest.raises(InvalidOrderError):
        compute_filter_coefficients(1)
    with pytest.raises(ValueError):
        compute_filter_coefficients(5, "sideways")


def test_half_point_value_at_depth_one():
    tab = make_basis(5, "positive", depth=1)
    assert tab.phi(1, 1)[()] == pytest.approx(0.703125, abs=1e-15)


@pytest.fixture(scope="module")
def n5():
    return make_basis(5, "positive", depth=10)


def test_interpolation_property(n5):
    k = np.arange(-6, 7)
    assert np.array_equal(n5.phi(k), (k == 0).astype(float))


def test_refinement_identity(n5):
    # phi(x) = sum_l h_l phi(2x - l) at every point of the depth-9 lattice
    num = np.arange(-3 * 512, 5 * 512 + 1)
    lhs = n5.phi(num, 9)
    rhs = sum(h * n5.phi(2 * num - l * 512, 9) for l, h in n5.filter.h.items())
    assert np.max(np.abs(lhs - rhs)) < 1e-12


@pytest.mark.parametrize("N", [5, 7])
@pytest.mark.parametrize("orientation", ["positive", "negative"])
def test_polynomial_reproduction(N, orientation):
    tab = make_basis(N, orientation, depth=8)
    num = np.arange(0, 256, 7)
    x = num / 256.0
    k = np.arange(-20, 21)
    args = num[:, None] - (k * 256)[None, :]
    phi = tab.phi(args, 8)
    dphi = tab.dphi(args, 8)
    for p in range(N):
        assert np.max(np.abs(phi @ k.astype(float) ** p - x ** p)) < 1e-10
        target = p * x ** (p - 1) if p else np.zeros_like(x)
        assert np.max(np.abs(dphi @ k.astype(float) ** p - target)) < 1e-8


def test_derivative_normalisation(n5):
    m = np.arange(-3, 6)
    assert np.sum(m * n5.dphi(m)) == pytest.approx(-1.0, abs=1e-13)
    assert np.sum(n5.dphi(m)) == pytest.approx(0.0, abs=1e-13)


def test_derivative_matches_finite_differences():
    errs = []
    for depth in (6, 8, 10):
        tab = make_basis(5, "positive", depth=depth)
        h = 2.0 ** -depth
        fd = (tab.values[2:] - tab.values[:-2]) / (2 * h)
        # skip the kinks at integers, where phi is only Lipschitz
        x = tab.abscissae()[1:-1]
        smooth = np.abs(x - np.rint(x)) > 0.25
        errs.append(np.max(np.abs(fd - tab.derivatives[1:-1])[smooth]))
    assert errs[2] < errs[1] < errs[0]


def test_primitive_against_midpoint_quadrature(n5):
    h = 2.0 ** -n5.depth
    mid = 0.5 * (n5.values[1:] + n5.values[:-1]) * h
    assert np.max(np.abs(np.cumsum(mid) - (n5.primitives[1:] - n5.primitives[0]))) < 1e-6
    assert n5.primitives[0] == 0.0
    assert n5.primitives[-1] == pytest.approx(1.0, abs=1e-12)


def test_primitive_mirror():
    pos = make_basis(5, "positive", depth=8)
    neg = make_basis(5, "negative", depth=8)
    num = np.arange(-6 * 256, 6 * 256)
    assert np.max(np.abs(neg.theta(num, 8) - (1 - pos.theta(-num, 8)))) < 1e-12


def test_outside_support_and_lattice(n5):
    assert n5.phi(-10)[()] == 0.0
    assert n5.theta(-10)[()] == 0.0
    assert n5.theta(10)[()] == 1.0
    with pytest.raises(OffLatticeError):
        n5.phi(1, 11)
    with pytest.raises(OffLatticeError):
        n5.to_lattice(1.0 / 3.0)


def test_upwind_derivative_stencil(n5):
    # weight phi'(m) multiplies the value at offset -m
    offsets = [-m for m in n5.derivative_stencil()]
    assert -min(offsets) > max(offsets)


@settings(max_examples=20, deadline=None)
@given(st.integers(min_value=-3 * 1024, max_value=5 * 1024))
def test_lookup_matches_table(j):
    tab = make_basis(5, "positive", depth=10)
    assert tab.phi(j, 10)[()] == tab.values[j + 3 * 1024]


def test_export_roundtrip(tmp_path, n5):
    path = tmp_path / "basis.txt"
    export_basis(n5, path)
    data = load_basis_export(path)
    assert data["N"] == 5 and data["orientation"] == "positive" and data["depth"] == 10
    assert data["filter"] == n5.filter.h
    np.testing.assert_array_equal(data["values"], n5.values)
    np.testing.assert_array_equal(data["primitives"], n5.primitives)
