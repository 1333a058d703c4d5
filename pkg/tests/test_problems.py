import numpy as np
import pytest

from wavelet_upwind.grid import build_uniform
from wavelet_upwind.problems import (ConvergenceTable, ErrorReport, UnknownProblemError,
                                     convergence_study, error_norms, front_positions,
                                     level_for_count, list_problems, make_problem, node_weights,
                                     relative_l2_difference, spurious_extrema)
from wavelet_upwind.reference_oracle import exact_riemann


def test_catalogue():
    names = list_problems()
    for name in ("square_wave", "burgers", "sod", "lax", "shu_osher", "blast_waves"):
        assert name in names
    with pytest.raises(UnknownProblemError):
        make_problem("kelvin_helmholtz")


def test_initial_states():
    sod = make_problem("sod")
    np.testing.assert_allclose(sod.primitive_initial(np.array([0.25]))[0], [1.0, 0.0, 1.0])
    np.testing.assert_allclose(sod.primitive_initial(np.array([0.75]))[0], [0.125, 0.0, 0.1])
    lax = make_problem("lax")
    np.testing.assert_allclose(lax.primitive_initial(np.array([0.75]))[0], [0.5, 0.0, 0.571])
    comp = make_problem("jiang_shu_composite")
    assert comp.initial(np.array([-0.3]))[0] == 1.0
    assert comp.initial(np.array([0.1]))[0] == pytest.approx(1.0)
    blast = make_problem("blast_waves")
    np.testing.assert_allclose(blast.primitive_initial(np.array([0.05, 0.5, 0.95]))[:, 2],
                               [1000.0, 0.01, 100.0])
    assert blast.bc == "reflective" and blast.t_end == 0.038


def test_exact_solution_matches_oracle():
    sod = make_problem("sod")
    x = np.linspace(0, 1, 11)
    rho = exact_riemann((1.0, 0.0, 1.0), (0.125, 0.0, 0.1), 1.4, (x - 0.5) / 0.2)[0]
    np.testing.assert_allclose(np.asarray(sod.exact(x, 0.2))[:, 0], rho)


def test_error_norms_single_node():
    num = np.zeros(8)
    num[3] = 0.5
    r = error_norms(num, np.zeros(8), 0.25)
    assert r.l_inf == 0.5 and r.l2 == pytest.approx(0.5 * np.sqrt(0.25)) and r.n_nodes == 8


def test_node_weights_sum_to_length():
    for bc, dom in (("periodic", (-1.0, 1.0)), ("fixed", (0.0, 1.0))):
        g = build_uniform(5, dom, bc)
        assert np.sum(node_weights(g)) == pytest.approx(dom[1] - dom[0])


def test_front_positions_on_exact_profile():
    sod = make_problem("sod")
    x = np.linspace(0, 1, 2001)
    rho = np.asarray(sod.exact(x, 0.2))[:, 0]
    fronts = front_positions(sod, x, rho)
    assert set(fronts) == {"contact", "shock"}
    for num, exact in fronts.values():
        assert abs(num - exact) <= 1 / 2000
    with pytest.raises(ValueError):
        front_positions(make_problem("square_wave"), x, rho)


def test_spurious_extrema_detects_a_wiggle():
    sod = make_problem("sod")
    x = np.linspace(0, 1, 501)
    rho = np.asarray(sod.exact(x, 0.2))[:, 0]
    assert spurious_extrema(sod, x, rho) == 0.0
    bumped = rho.copy()
    bumped[50] += 0.01  # far from every jump, on the unit-density plateau
    # nearest jump is the contact (the rarefaction is not a jump)
    contact_jump = abs(np.diff([rho[np.searchsorted(x, 0.68)], rho[np.searchsorted(x, 0.7)]]))[0]
    assert spurious_extrema(sod, x, bumped) == pytest.approx(0.01 / contact_jump, rel=1e-9)


def test_relative_difference():
    x = np.linspace(0, 1, 101)
    f = 1 + x
    assert relative_l2_difference(x, f, x, f) == 0.0
    coarse = x[::4]
    # linear data survives linear interpolation exactly
    assert relative_l2_difference(coarse, 1 + coarse, x, f) < 1e-15
    assert relative_l2_difference(x, 1.1 * f, x, f) == pytest.approx(0.1)


def test_level_for_count():
    for name in ("linear_smooth", "sod"):
        prob = make_problem(name)
        J = level_for_count(prob, 64)
        g = build_uniform(J, prob.domain, prob.bc, unit=prob.unit)
        assert g.n_fine == 64
    with pytest.raises(ValueError):
        level_for_count(make_problem("sod"), 48)


def test_convergence_study_smoke(tmp_path):
    table = convergence_study(make_problem("linear_smooth"), 5, (16, 32), t_end=0.25)
    assert isinstance(table, ConvergenceTable) and len(table.rows) == 2
    assert isinstance(table.rows[0][1], ErrorReport)
    assert table.orders()[0] > 3.0
    table.write_csv(tmp_path / "c.csv")
    assert (tmp_path / "c.csv").read_text().startswith("N1,linf")
    with pytest.raises(ValueError):
        convergence_study(make_problem("shu_osher"), 5, (16, 32))
