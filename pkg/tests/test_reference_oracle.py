import numpy as np
import pytest

from wavelet_upwind.discretization import FluxFunction
from wavelet_upwind.problems import make_problem
from wavelet_upwind.reference_oracle import (VacuumError, burgers_exact, exact_advection,
                                             exact_riemann, riemann_star, weno5_reference,
                                             weno5_solve)

G = 1.4
SOD = ((1.0, 0.0, 1.0), (0.125, 0.0, 0.1))
LAX = ((0.445, 0.698, 3.528), (0.5, 0.0, 0.571))


def test_sod_star_state():
    s = riemann_star(*SOD, G)
    assert s.p_star == pytest.approx(0.30313, abs=1e-5)
    assert s.u_star == pytest.approx(0.92745, abs=1e-5)


def test_shock_satisfies_jump_conditions():
    s = riemann_star(*SOD, G)
    S = s.shock_speeds()["right"]
    rho_r, u_r, p_r = SOD[1]
    rho_s = s.rho_star[1]
    m = rho_r * (u_r - S)
    assert rho_s * (s.u_star - S) == pytest.approx(m, rel=1e-12)
    assert p_r + m * (u_r - S) == pytest.approx(s.p_star + m * (s.u_star - S), rel=1e-12)


def test_rarefaction_keeps_riemann_invariant():
    s = riemann_star(*LAX, G)
    rho_l, u_l, p_l = LAX[0]
    head = u_l - np.sqrt(G * p_l / rho_l)
    tail = s.u_star - np.sqrt(G * s.p_star / s.rho_star[0])
    xi = np.linspace(head, tail, 7)
    rho, u, p = s.sample(xi)
    c = np.sqrt(G * p / rho)
    np.testing.assert_allclose(u + 2 * c / (G - 1), u_l + 2 * np.sqrt(G * p_l / rho_l) / (G - 1), rtol=1e-12)
    np.testing.assert_allclose(p / rho ** G, p_l / rho_l ** G, rtol=1e-12)
    assert "left" not in s.shock_speeds()


def test_far_field_states():
    rho, u, p = exact_riemann(*SOD, G, np.array([-10.0, 10.0]))
    assert (rho[0], u[0], p[0]) == SOD[0]
    assert (rho[1], u[1], p[1]) == SOD[1]


def test_vacuum_detected():
    with pytest.raises(VacuumError):
        riemann_star((1.0, -10.0, 0.4), (1.0, 10.0, 0.4), G)


def test_burgers_characteristics():
    u0 = lambda s: 0.5 + np.sin(np.pi * s)
    x = np.linspace(0, 2, 41)
    t = 0.25
    u = burgers_exact(u0, t, x)
    np.testing.assert_allclose(u, u0(x - u * t), atol=1e-13)
    np.testing.assert_array_equal(burgers_exact(u0, 0.0, x), u0(x))


def test_shifted_profile_wraps():
    f = lambda s: np.where(np.abs(s) < 0.1, 1.0, 0.0)
    np.testing.assert_array_equal(exact_advection(f, 1.0, 2.0, np.array([0.0, 0.5]), (-1, 1)),
                                  [1.0, 0.0])
    assert exact_advection(f, 1.0, 0.5, np.array([-0.5]), (-1, 1))[0] == 0.0
    assert exact_advection(f, 1.0, 0.5, np.array([0.5]), (-1, 1))[0] == 1.0


def test_weno5_smooth_convergence():
    lin = FluxFunction("linear", 1.0)
    f = lambda x: np.sin(np.pi * x)
    errs = []
    for n in (20, 40, 80):
        x, u = weno5_solve(f, lin, (-1.0, 1.0), n, 0.5, "periodic", cfl=0.2)
        errs.append(np.max(np.abs(u - f(x - 0.5))))
    assert np.log2(errs[1] / errs[2]) > 2.8


def test_weno5_sod_close_to_exact():
    gas = FluxFunction("euler3", gamma=G)
    prob = make_problem("sod")
    x, U = weno5_solve(prob.initial, gas, (0.0, 1.0), 400, 0.2, "fixed",
                       prob.odd_components())
    rho = exact_riemann(*SOD, G, (x - 0.5) / 0.2)[0]
    assert np.mean(np.abs(U[:, 0] - rho)) < 5e-3


def test_weno5_cache(tmp_path):
    prob = make_problem("sod").with_time(0.02)
    r1 = weno5_reference(prob, 64, cache_dir=tmp_path)
    files = list(tmp_path.iterdir())
    assert len(files) == 1
    stamp = files[0].stat().st_mtime_ns
    r2 = weno5_reference(prob, 64, cache_dir=tmp_path)
    assert files[0].stat().st_mtime_ns == stamp
    np.testing.assert_allclose(r1(np.array([0.3, 0.7])), r2(np.array([0.3, 0.7])), rtol=1e-15)
    assert r1.kind == "weno5_converged"
    weno5_reference(prob, 64, cache_dir=tmp_path, force=True)
    assert files[0].stat().st_mtime_ns >= stamp
