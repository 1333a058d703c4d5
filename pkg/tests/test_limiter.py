import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import simpson

from wavelet_upwind.adaptivity import _close_parents
from wavelet_upwind.grid import build_uniform, evaluate, forward_transform
from wavelet_upwind.limiter import (LimiterConfig, apply_limiter, integral_average,
                                    integral_averages, interval_length, interval_lengths,
                                    tvb_switch)
from wavelet_upwind.problems import M_BY_LEVEL
from wavelet_upwind.wavelet_basis import make_basis


@pytest.fixture(scope="module")
def pos():
    return make_basis(5, "positive", 10)


def test_switch_examples():
    assert tvb_switch(1.0, 1.0005, 40, 1 / 1024) == 1.0005
    assert tvb_switch(1.0, 1.0 + 1e-6, 40, 1 / 64) == 1.0
    assert tvb_switch(0.3, 0.7, 0.0, 0.1) == 0.7


@settings(max_examples=50, deadline=None)
@given(st.floats(-10, 10), st.floats(-10, 10), st.floats(0, 1e4), st.floats(1e-4, 1))
def test_switch_returns_value_or_mean(u, mean, M, h):
    out = tvb_switch(u, mean, M, h)
    assert out == u or out == mean


def test_config_validation():
    assert LimiterConfig("tvbr").mode == "TVBR"
    with pytest.raises(ValueError):
        LimiterConfig("minmod")
    with pytest.raises(ValueError):
        LimiterConfig("TVBU", M=-1)
    with pytest.raises(ValueError):
        LimiterConfig("TVBC", eps0=1e-4, eps1=1e-2)


def test_means_of_polynomials(pos):
    g = build_uniform(5, (0.0, 1.0), "fixed")
    h = g.spacing(g.Jmax)
    for f, bias in ((lambda x: 3 * x - 1, 0.0), (lambda x: x * x, h * h / 12)):
        c = forward_transform(g, f(g.x), pos)
        means = integral_averages(g, c, pos, h)
        interior = slice(1, -1)
        np.testing.assert_allclose(means[interior], f(g.x)[interior] + bias, atol=1e-13)


def test_square_wave_mean_matches_quadrature(pos):
    g = build_uniform(5, (-1.0, 1.0))
    u = ((g.x >= -0.4) & (g.x <= 0.4)).astype(float)
    c = forward_transform(g, u, pos)
    h = g.spacing(5)
    for x0 in (-0.375, 0.375, 0.4375):
        K = int(g.fine_from_x(np.array([x0]))[0])
        xs = x0 - h / 2 + h * np.arange(1025) / 1024
        ref = simpson(evaluate(g, c, pos, xs), x=xs) / h
        assert integral_average(g, c, pos, K, h) == pytest.approx(ref, abs=1e-8)


def test_bounded_intervals_are_shifted_inward(pos):
    g = build_uniform(5, (0.0, 1.0), "fixed")
    c = forward_transform(g, g.x, pos)
    h = 4 * g.spacing(5)
    means = integral_averages(g, c, pos, h)
    assert means[0] == pytest.approx(h / 2, abs=1e-13)
    assert means[-1] == pytest.approx(1 - h / 2, abs=1e-13)


@pytest.mark.parametrize("J", [6, 7, 8, 9, 10])
def test_smooth_field_left_alone(pos, J):
    g = build_uniform(J, (-1.0, 1.0))
    u = np.sin(np.pi * g.x)
    out = apply_limiter(g, u, pos, LimiterConfig("TVBU", M_BY_LEVEL[J]))
    assert np.max(np.abs(out - u)) <= 1e-12


def test_off_is_identity(pos):
    g = build_uniform(6, (-1.0, 1.0))
    u = np.random.default_rng(0).normal(size=g.size)
    np.testing.assert_array_equal(apply_limiter(g, u, pos, LimiterConfig()), u)


def test_each_component_switched_separately(pos):
    g = build_uniform(6, (0.0, 1.0), "fixed")
    sq = (g.x > 0.5).astype(float)
    U = np.c_[np.sin(g.x), sq, np.ones(g.size)]
    out = apply_limiter(g, U, pos, LimiterConfig("TVBU", 5.0))
    # end nodes average over inward-shifted intervals, so only the interior is smooth
    np.testing.assert_array_equal(out[1:-1, 0], U[1:-1, 0])
    np.testing.assert_array_equal(out[:, 2], U[:, 2])
    assert np.any(out[:, 1] != U[:, 1])


def _adaptive(pos):
    g = build_uniform(4, (-1.0, 1.0), Jmax=8)
    near = np.flatnonzero(np.abs(g.fine_to_x(np.arange(g.n_fine)) - 0.4) < 0.05)
    g = g.with_fine(_close_parents(g, np.union1d(g.fine, near)))
    u = ((g.x >= -0.4) & (g.x <= 0.4)).astype(float)
    return g, forward_transform(g, u, pos)


def test_uniform_length_modes(pos):
    g, c = _adaptive(pos)
    for mode in ("TVBU", "TVBR"):
        h = interval_lengths(g, c, LimiterConfig(mode, 1.0))
        assert np.all(h == g.spacing(g.Jmax))


def test_graded_lengths(pos):
    g, c = _adaptive(pos)
    cfg = LimiterConfig("TVBC", 1.0)
    h = interval_lengths(g, c, cfg)
    wide, narrow = g.spacing((g.Jmax + g.J0) // 2), g.spacing(g.Jmax - 1)
    assert set(np.unique(h)) <= {wide, narrow, 0.5 * (wide + narrow)}
    big = np.flatnonzero((g.levels > g.J0) & (np.abs(c.values) >= cfg.eps0))
    assert len(big) and np.all(h[big] == wide)
    plain = np.flatnonzero((g.levels == g.J0) & (np.roll(g.levels, -1) == g.J0))
    assert np.all(h[plain] == narrow)
    assert interval_length(g, c, g.fine[big[0]], cfg) == wide
    with pytest.raises(ValueError):
        interval_lengths(g, c, LimiterConfig())

