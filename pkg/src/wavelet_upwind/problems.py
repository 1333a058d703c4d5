"""Benchmark catalogue, error norms and refinement studies."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np

from .discretization import FluxFunction
from .grid import AdaptiveGrid
from .reference_oracle import (ReferenceSolution, burgers_exact, exact_advection,
                               riemann_star, weno5_reference)

GAMMA = 1.4

# Switch parameter by finest level for the scalar advection tests.
M_BY_LEVEL = {6: 5.0, 7: 10.0, 8: 20.0, 9: 40.0, 10: 80.0, 11: 120.0, 12: 160.0, 13: 320.0}


class UnknownProblemError(KeyError):
    pass


@dataclass(frozen=True)
class ProblemSpec:
    """One benchmark.

    ``initial`` maps positions to conserved states (shape ``(n,)`` for
    scalars, ``(n, 3)`` for Euler).  ``unit`` is the length spanned by
    ``2^J0`` basic cells, so the spacing of level ``J`` is ``unit * 2^-J``.
    ``exact`` maps ``(x, t)`` to conserved states when a closed form exists.
    ``riemann`` holds ``(left, right, x0)`` primitive states of shock tubes.
    """

    name: str
    flux: FluxFunction
    domain: tuple[float, float]
    initial: Callable[[np.ndarray], np.ndarray]
    bc: str
    t_end: float
    J0: int
    Jmax: int
    limiter_mode: str = "off"
    M: float = 0.0
    eps: float = 1e-3
    M0: float = 100.0
    unit: float = 1.0
    exact: Callable[[np.ndarray, float], np.ndarray] | None = None
    reference_kind: str | None = None
    reference_points: int = 2560
    description: str = ""
    riemann: tuple | None = None

    def odd_components(self) -> np.ndarray:
        """Components that change sign under mirror reflection (momentum)."""
        if self.flux.kind == "euler3":
            return np.array([False, True, False])
        return np.array([False])

    def reference(self, t: float | None = None, **kw) -> ReferenceSolution:
        t = self.t_end if t is None else t
        if self.exact is not None:
            return ReferenceSolution(self.reference_kind or "exact", lambda x: self.exact(x, t),
                                     {"t": t})
        if self.reference_kind == "weno5_converged":
            return weno5_reference(self, self.reference_points, t, **kw)
        raise ValueError(f"{self.name} has no reference solution")

    def with_time(self, t_end: float) -> "ProblemSpec":
        return replace(self, t_end=t_end)

    def primitive_initial(self, x) -> np.ndarray:
        U = self.initial(x)
        if self.flux.kind != "euler3":
            return U
        rho, u, p = self.flux.primitive(U)
        return np.stack([rho, u, p], axis=-1)


def _indicator(x, lo, hi):
    return ((x >= lo) & (x <= hi)).astype(float)


def square_wave_initial(x):
    return _indicator(np.asarray(x, dtype=float), -0.4, 0.4)


def composite_initial(x):
    """Gaussians, square, triangle and half ellipse on [-1, 1]."""
    x = np.asarray(x, dtype=float)
    a, z, delta, alpha = 0.5, -0.7, 0.005, 10.0
    beta = math.log(2) / (36 * delta ** 2)

    def G(z_):
        return np.exp(-beta * (x - z_) ** 2)

    def F(a_):
        return np.sqrt(np.maximum(1 - alpha ** 2 * (x - a_) ** 2, 0.0))

    u = np.zeros_like(x)
    r = (x >= -0.8) & (x <= -0.6)
    u[r] = ((G(z - delta) + G(z + delta) + 4 * G(z)) / 6)[r]
    u[(x >= -0.4) & (x <= -0.2)] = 1.0
    r = (x >= 0.0) & (x <= 0.2)
    u[r] = (1 - np.abs(10 * (x - 0.1)))[r]
    r = (x >= 0.4) & (x <= 0.6)
    u[r] = ((F(a - delta) + F(a + delta) + 4 * F(a)) / 6)[r]
    return u


def mixing_initial(x):
    """Plateaus, ramps and a high-frequency sine patch on [-1, 1]."""
    x = np.asarray(x, dtype=float)
    u = np.zeros_like(x)
    pieces = [
        (-0.8, -0.6, lambda s: np.full_like(s, 0.5)),
        (-0.6, -0.4, lambda s: -2.5 * s - 0.5),
        (-0.4, -0.2, lambda s: -2.5 * s),
        (-0.2, -0.1, lambda s: np.full_like(s, 0.5)),
        (-0.1, 0.1, lambda s: 0.5 * (1 + np.sin(40 * np.pi * s))),
        (0.1, 0.2, lambda s: np.full_like(s, 0.5)),
        (0.2, 0.6, lambda s: 0.2 * np.sin(5 * np.pi * (s - 0.2))),
        (0.6, 0.8, lambda s: np.full_like(s, 0.5)),
    ]
    # left-closed, right-open except the last piece, which is closed
    for k, (lo, hi, fn) in enumerate(pieces):
        r = (x >= lo) & ((x < hi) if k < len(pieces) - 1 else (x <= hi))
        u[r] = fn(x[r])
    return u


def _riemann_exact(flux, left, right, x0):
    star = riemann_star(left, right, flux.gamma)

    def exact(x, t):
        x = np.asarray(x, dtype=float)
        if t == 0:
            rho = np.where(x <= x0, left[0], right[0])
            u = np.where(x <= x0, left[1], right[1])
            p = np.where(x <= x0, left[2], right[2])
        else:
            rho, u, p = star.sample((x - x0) / t)
        return flux.conserved(rho, u, p)
    return exact


def _catalogue() -> dict[str, Callable[[], ProblemSpec]]:
    lin = FluxFunction("linear", 1.0)
    burg = FluxFunction("burgers")
    gas = FluxFunction("euler3", gamma=GAMMA)
    # the 1e5 pressure ratio drives the first stages below zero pressure
    blast_gas = FluxFunction("euler3", gamma=GAMMA, allow_negative_pressure=True)
    sym = (-1.0, 1.0)

    def advection(name, u0, t_end, J0, Jmax, desc, eps=1e-3):
        return ProblemSpec(
            name, lin, sym, u0, "periodic", t_end, J0, Jmax, "TVBU",
            M_BY_LEVEL.get(Jmax, 20.0), eps,
            exact=lambda x, t: exact_advection(u0, 1.0, t, x, sym),
            reference_kind="exact_shift", description=desc)

    def sin_initial(x):
        return np.sin(np.pi * np.asarray(x, dtype=float))

    def burgers_initial(x):
        return 0.5 + np.sin(np.pi * np.asarray(x, dtype=float))

    def burgers_solution(x, t):
        x = np.asarray(x, dtype=float)
        return burgers_exact(burgers_initial, t, x,
                             du0=lambda s: np.pi * np.cos(np.pi * s))

    def perturbation_initial(x):
        x = np.asarray(x, dtype=float)
        return gas.conserved(1 + 0.2 * np.sin(np.pi * x), 1.0, 1.0)

    def perturbation_exact(x, t):
        return perturbation_initial(np.asarray(x, dtype=float) - t)

    sod_l, sod_r = (1.0, 0.0, 1.0), (0.125, 0.0, 0.1)
    lax_l, lax_r = (0.445, 0.698, 3.528), (0.5, 0.0, 0.571)

    def two_state(left, right, x0):
        def initial(x):
            x = np.asarray(x, dtype=float)
            lft = x <= x0
            return gas.conserved(np.where(lft, left[0], right[0]),
                                 np.where(lft, left[1], right[1]),
                                 np.where(lft, left[2], right[2]))
        return initial

    def shu_osher_initial(x):
        x = np.asarray(x, dtype=float)
        post = x < -4.0
        rho = np.where(post, 3.857148, 1 + 0.2 * np.sin(5 * x))
        u = np.where(post, 2.629369, 0.0)
        p = np.where(post, 10.333333, 1.0)
        return gas.conserved(rho, u, p)

    def blast_initial(x):
        x = np.asarray(x, dtype=float)
        p = np.where(x < 0.1, 1000.0, np.where(x < 0.9, 0.01, 100.0))
        return blast_gas.conserved(np.ones_like(x), np.zeros_like(x), p)

    return {
        "linear_smooth": lambda: advection(
            "linear_smooth", sin_initial, 2.0, 4, 4, "sin(pi x) advected once around [-1, 1]"),
        "square_wave": lambda: advection(
            "square_wave", square_wave_initial, 2.0, 6, 10, "unit square pulse on [-0.4, 0.4]"),
        "jiang_shu_composite": lambda: advection(
            "jiang_shu_composite", composite_initial, 2.0, 6, 10,
            "Gaussians, square, triangle and half ellipse"),
        "mixing_scale": lambda: replace(advection(
            "mixing_scale", mixing_initial, 2.0, 7, 11,
            "plateaus, ramps and a 20-period sine patch"), M=320.0),
        "burgers": lambda: ProblemSpec(
            "burgers", burg, (0.0, 2.0), burgers_initial, "periodic", 1.5 / math.pi, 6, 10,
            "TVBU", 20.0, 1e-3, exact=burgers_solution,
            reference_kind="burgers_characteristic",
            description="0.5 + sin(pi x); smooth up to t = 1/pi, shocked after"),
        "euler_density_perturbation": lambda: ProblemSpec(
            "euler_density_perturbation", gas, (0.0, 2.0), perturbation_initial, "periodic",
            2.0, 5, 5, "off", 0.0, 1e-3, exact=perturbation_exact,
            reference_kind="exact_shift", description="density wave 1 + 0.2 sin(pi x), u = p = 1"),
        "sod": lambda: ProblemSpec(
            "sod", gas, (0.0, 1.0), two_state(sod_l, sod_r, 0.5), "fixed", 0.2, 6, 10,
            "TVBR", 40.0, 1e-3, exact=_riemann_exact(gas, sod_l, sod_r, 0.5),
            reference_kind="exact_riemann", description="Sod shock tube",
            riemann=(sod_l, sod_r, 0.5)),
        "lax": lambda: ProblemSpec(
            "lax", gas, (0.0, 1.0), two_state(lax_l, lax_r, 0.5), "fixed", 0.13, 7, 10,
            "TVBR", 40.0, 1e-3, exact=_riemann_exact(gas, lax_l, lax_r, 0.5),
            reference_kind="exact_riemann", description="Lax shock tube",
            riemann=(lax_l, lax_r, 0.5)),
        "shu_osher": lambda: ProblemSpec(
            "shu_osher", gas, (-5.0, 5.0), shu_osher_initial, "fixed", 1.8, 4, 7,
            "TVBR", 40.0, 1e-3, reference_kind="weno5_converged", reference_points=2560,
            description="Mach 3 shock running into a density sine wave"),
        "blast_waves": lambda: ProblemSpec(
            "blast_waves", blast_gas, (0.0, 1.0), blast_initial, "reflective", 0.038, 8, 12,
            "TVBR", 3200.0, 1e-3, reference_kind="weno5_converged", reference_points=8192,
            description="two interacting blast waves between reflecting walls"),
    }


CATALOGUE = _catalogue()


def list_problems() -> list[str]:
    return list(CATALOGUE)


def make_problem(name: str) -> ProblemSpec:
    try:
        return CATALOGUE[name]()
    except KeyError:
        raise UnknownProblemError(
            f"unknown problem {name!r}; choose from {', '.join(CATALOGUE)}") from None


# -- errors ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ErrorReport:
    l_inf: float
    l2: float
    n_nodes: int
    l_inf_order: float | None = None
    l2_order: float | None = None


def node_weights(grid: AdaptiveGrid) -> np.ndarray:
    """Local spacing per node: half the distance between its two neighbours.

    Equals the uniform spacing on periodic uniform grids; end nodes of a
    bounded grid get half a cell.
    """
    x = grid.x
    if grid.periodic:
        L = grid.length
        left = np.diff(np.concatenate([[x[-1] - L], x]))
        right = np.diff(np.concatenate([x, [x[0] + L]]))
    else:
        gaps = np.diff(x)
        left = np.concatenate([[0.0], gaps])
        right = np.concatenate([gaps, [0.0]])
    return 0.5 * (left + right)


def error_norms(numeric, exact, dx) -> ErrorReport:
    """Max and discrete l2 errors; ``dx`` is a scalar or one weight per node."""
    e = np.abs(np.asarray(numeric, dtype=float) - np.asarray(exact, dtype=float))
    if e.ndim > 1:
        e = e[:, 0]
    w = np.broadcast_to(np.asarray(dx, dtype=float), e.shape)
    return ErrorReport(float(e.max()) if e.size else 0.0, float(np.sqrt(np.sum(e * e * w))),
                       int(e.size))


def _discontinuities(problem: ProblemSpec, t: float) -> dict[str, tuple[float, float, float]]:
    """Exact position and the two adjacent densities of each density jump."""
    left, right, x0 = problem.riemann
    star = riemann_star(left, right, problem.flux.gamma)
    speeds = star.shock_speeds()
    rl, rr = star.rho_star
    out = {"contact": (x0 + speeds["contact"] * t, rl, rr)}
    if "left" in speeds:
        out["left_shock"] = (x0 + speeds["left"] * t, left[0], rl)
    if "right" in speeds:
        out["shock"] = (x0 + speeds["right"] * t, rr, right[0])
    return out


def front_positions(problem: ProblemSpec, x, rho, t: float | None = None,
                    window: float = 0.05) -> dict[str, tuple[float, float]]:
    """``(numeric, exact)`` position of every density jump of a shock tube.

    The numeric position is where the density crosses the mean of the two
    exact side values, interpolated linearly, taking the crossing nearest the
    exact position within ``window``.  ``nan`` when there is no crossing.
    """
    if problem.riemann is None:
        raise ValueError(f"{problem.name} is not a shock tube")
    t = problem.t_end if t is None else t
    x = np.asarray(x, dtype=float)
    rho = np.asarray(rho, dtype=float)
    out = {}
    for name, (xe, a, b) in _discontinuities(problem, t).items():
        mid = 0.5 * (a + b)
        m = np.flatnonzero(np.abs(x - xe) < window)
        xs, rs = x[m], rho[m] - mid
        k = np.flatnonzero(np.sign(rs[:-1]) != np.sign(rs[1:]))
        if len(k) == 0:
            out[name] = (float("nan"), xe)
            continue
        cross = xs[k] - rs[k] * (xs[k + 1] - xs[k]) / (rs[k + 1] - rs[k])
        out[name] = (float(cross[np.argmin(np.abs(cross - xe))]), xe)
    return out


def spurious_extrema(problem: ProblemSpec, x, rho, t: float | None = None,
                     band: int = 4) -> float:
    """Largest interior density extremum relative to the nearest jump size.

    Nodes within ``band`` nodes of an exact jump position are skipped.  The
    amplitude of an extremum is the smaller of its two neighbour differences.
    """
    t = problem.t_end if t is None else t
    x = np.asarray(x, dtype=float)
    rho = np.asarray(rho, dtype=float)
    jumps = list(_discontinuities(problem, t).values())
    skip = np.zeros(len(x), dtype=bool)
    for xe, _, _ in jumps:
        l = int(np.searchsorted(x, xe))
        skip[max(0, l - band):l + band] = True
    a, b, c = rho[:-2], rho[1:-1], rho[2:]
    ext = ((b - a) * (b - c) > 0) & ~skip[1:-1]
    if not np.any(ext):
        return 0.0
    amp = np.minimum(np.abs(b - a), np.abs(b - c))[ext]
    xi = x[1:-1][ext]
    pos = np.array([j[0] for j in jumps])
    size = np.array([abs(j[1] - j[2]) for j in jumps])
    nearest = np.argmin(np.abs(xi[:, None] - pos[None, :]), axis=1)
    return float(np.max(amp / size[nearest]))


def relative_l2_difference(x_a, a, x_b, b) -> float:
    """``||a - b|| / ||b||`` on the points of ``b``, first component only.

    ``a`` is interpolated linearly onto ``x_b`` (exact at shared nodes) and
    both sums use half-neighbour widths of ``x_b`` as weights.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    a = a[:, 0] if a.ndim > 1 else a
    b = b[:, 0] if b.ndim > 1 else b
    x_b = np.asarray(x_b, dtype=float)
    ai = np.interp(x_b, np.asarray(x_a, dtype=float), a)
    gaps = np.diff(x_b)
    w = 0.5 * (np.concatenate([[0.0], gaps]) + np.concatenate([gaps, [0.0]]))
    return float(np.sqrt(np.sum(w * (ai - b) ** 2) / np.sum(w * b * b)))


def observed_order(coarse: float, fine: float) -> float:
    return math.log2(coarse / fine)


@dataclass
class ConvergenceTable:
    rows: list[tuple[int, ErrorReport]] = field(default_factory=list)

    def orders(self, norm: str = "l_inf") -> list[float]:
        vals = [getattr(r, norm) for _, r in self.rows]
        return [observed_order(a, b) for a, b in zip(vals, vals[1:])]

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["N1", "linf", "linf_order", "l2", "l2_order"])
            for n1, r in self.rows:
                w.writerow([n1, f"{r.l_inf:.17g}",
                            "" if r.l_inf_order is None else f"{r.l_inf_order:.17g}",
                            f"{r.l2:.17g}", "" if r.l2_order is None else f"{r.l2_order:.17g}"])


def level_for_count(problem: ProblemSpec, n1: int) -> int:
    """Basic level whose uniform grid has ``n1`` intervals."""
    J = math.log2(n1 * problem.unit / (problem.domain[1] - problem.domain[0]))
    if abs(J - round(J)) > 1e-12:
        raise ValueError(f"{n1} intervals do not form a dyadic grid on {problem.domain}")
    return int(round(J))


def convergence_study(problem: ProblemSpec, N: int, counts, t_end: float | None = None,
                      cfl: float = 0.4) -> ConvergenceTable:
    """Uniform-grid errors against the exact solution for each node count ``N1``.

    Runs in accuracy mode so the time error stays below the spatial one.
    Errors of systems are measured on the first component (density).
    """
    from .time_integration import SchemeConfig, TimeControl, solve

    if problem.exact is None:
        raise ValueError(f"{problem.name} has no exact solution")
    counts = list(counts)
    if len(counts) < 2:
        raise ValueError("need at least two resolutions")
    t_end = problem.t_end if t_end is None else t_end
    prob = problem.with_time(t_end)
    table = ConvergenceTable()
    prev = None
    for n1 in counts:
        J = level_for_count(prob, n1)
        sol = solve(prob, SchemeConfig(N=N, J0=J), control=TimeControl(
            t_end, cfl=cfl, accuracy_mode=True))
        rep = error_norms(sol.state, prob.exact(sol.x, t_end), node_weights(sol.grid))
        if prev is not None:
            rep = replace(rep, l_inf_order=observed_order(prev.l_inf, rep.l_inf),
                          l2_order=observed_order(prev.l2, rep.l2))
        table.rows.append((n1, rep))
        prev = rep
    return table
