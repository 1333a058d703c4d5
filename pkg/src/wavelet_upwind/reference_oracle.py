"""Exact and reference solutions used to measure errors."""

from __future__ import annotations

import csv
import hashlib
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np
from scipy.interpolate import PchipInterpolator
from scipy.optimize import brentq


class ConvergenceFailure(RuntimeError):
    """Raised when an iterative oracle does not converge."""


class VacuumError(ValueError):
    """Raised when a Riemann problem generates vacuum."""


def wrap(x, domain) -> np.ndarray:
    a, b = domain
    return a + np.mod(np.asarray(x, dtype=float) - a, b - a)


def exact_advection(initial: Callable, a: float, t: float, x, domain) -> np.ndarray:
    """Periodic translation ``u(x, t) = u0(x - a t)``."""
    return initial(wrap(np.asarray(x, dtype=float) - a * t, domain))


# -- Burgers ---------------------------------------------------------------------


def burgers_exact(u0: Callable, t: float, x, tol: float = 1e-14,
                  du0: Callable | None = None, max_iter: int = 50) -> np.ndarray:
    """Solve ``u = u0(x - u t)`` by Newton iteration from ``u = u0(x)``.

    Valid before characteristics cross.  ``du0`` defaults to a centred
    difference of ``u0``.
    """
    x = np.asarray(x, dtype=float)
    if du0 is None:
        def du0(s, _e=1e-6):
            return (u0(s + _e) - u0(s - _e)) / (2 * _e)
    u = np.array(u0(x), dtype=float)
    for _ in range(max_iter):
        s = x - u * t
        g = u - u0(s)
        if np.all(np.abs(g) <= tol):
            return u
        dg = 1.0 + t * du0(s)
        if np.any(dg <= 0):
            raise ConvergenceFailure("characteristics have crossed")
        u = u - g / dg
    g = u - u0(x - u * t)
    if np.all(np.abs(g) <= max(tol, 8 * np.finfo(float).eps * np.max(np.abs(u)))):
        return u
    raise ConvergenceFailure(f"Newton residual {np.max(np.abs(g)):.3e}")


# -- exact Riemann solver -----------------------------------------------------------


@dataclass(frozen=True)
class RiemannSolution:
    """Star state and wave structure of a 1D Euler Riemann problem."""

    left: tuple[float, float, float]
    right: tuple[float, float, float]
    gamma: float
    p_star: float
    u_star: float

    def _side(self, rho, p, c):
        g = self.gamma
        if self.p_star > p:
            rho_s = rho * ((self.p_star / p + (g - 1) / (g + 1))
                           / ((g - 1) / (g + 1) * self.p_star / p + 1))
        else:
            rho_s = rho * (self.p_star / p) ** (1 / g)
        return rho_s

    @property
    def rho_star(self) -> tuple[float, float]:
        rl, _, pl = self.left
        rr, _, pr = self.right
        g = self.gamma
        return (self._side(rl, pl, np.sqrt(g * pl / rl)),
                self._side(rr, pr, np.sqrt(g * pr / rr)))

    def shock_speeds(self) -> dict[str, float]:
        """Speeds of the waves that are shocks (``left``/``right``) and the contact."""
        g = self.gamma
        out = {"contact": self.u_star}
        rl, ul, pl = self.left
        rr, ur, pr = self.right
        if self.p_star > pl:
            cl = np.sqrt(g * pl / rl)
            out["left"] = ul - cl * np.sqrt((g + 1) / (2 * g) * self.p_star / pl + (g - 1) / (2 * g))
        if self.p_star > pr:
            cr = np.sqrt(g * pr / rr)
            out["right"] = ur + cr * np.sqrt((g + 1) / (2 * g) * self.p_star / pr + (g - 1) / (2 * g))
        return out

    def sample(self, xi) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """``(rho, u, p)`` at similarity coordinates ``xi = (x - x0) / t``."""
        xi = np.asarray(xi, dtype=float)
        g = self.gamma
        rl, ul, pl = self.left
        rr, ur, pr = self.right
        cl, cr = np.sqrt(g * pl / rl), np.sqrt(g * pr / rr)
        ps, us = self.p_star, self.u_star
        rsl, rsr = self.rho_star
        rho = np.empty_like(xi)
        u = np.empty_like(xi)
        p = np.empty_like(xi)

        left = xi <= us
        # left of the contact
        if ps > pl:
            sl = ul - cl * np.sqrt((g + 1) / (2 * g) * ps / pl + (g - 1) / (2 * g))
            pre = left & (xi <= sl)
            post = left & (xi > sl)
            rho[pre], u[pre], p[pre] = rl, ul, pl
            rho[post], u[post], p[post] = rsl, us, ps
        else:
            head = ul - cl
            tail = us - cl * (ps / pl) ** ((g - 1) / (2 * g))
            pre = left & (xi <= head)
            fan = left & (xi > head) & (xi < tail)
            post = left & (xi >= tail)
            rho[pre], u[pre], p[pre] = rl, ul, pl
            rho[post], u[post], p[post] = rsl, us, ps
            c = 2 / (g + 1) * (cl + (g - 1) / 2 * (ul - xi[fan]))
            u[fan] = 2 / (g + 1) * (cl + (g - 1) / 2 * ul + xi[fan])
            rho[fan] = rl * (c / cl) ** (2 / (g - 1))
            p[fan] = pl * (c / cl) ** (2 * g / (g - 1))
        right = ~left
        if ps > pr:
            sr = ur + cr * np.sqrt((g + 1) / (2 * g) * ps / pr + (g - 1) / (2 * g))
            pre = right & (xi >= sr)
            post = right & (xi < sr)
            rho[pre], u[pre], p[pre] = rr, ur, pr
            rho[post], u[post], p[post] = rsr, us, ps
        else:
            head = ur + cr
            tail = us + cr * (ps / pr) ** ((g - 1) / (2 * g))
            pre = right & (xi >= head)
            fan = right & (xi < head) & (xi > tail)
            post = right & (xi <= tail)
            rho[pre], u[pre], p[pre] = rr, ur, pr
            rho[post], u[post], p[post] = rsr, us, ps
            c = 2 / (g + 1) * (cr - (g - 1) / 2 * (ur - xi[fan]))
            u[fan] = 2 / (g + 1) * (-cr + (g - 1) / 2 * ur + xi[fan])
            rho[fan] = rr * (c / cr) ** (2 / (g - 1))
            p[fan] = pr * (c / cr) ** (2 * g / (g - 1))
        return rho, u, p


def _pressure_function(p, rho, pk, ck, g):
    """Velocity jump across one wave as a function of the star pressure."""
    if p > pk:
        A = 2 / ((g + 1) * rho)
        B = (g - 1) / (g + 1) * pk
        return (p - pk) * np.sqrt(A / (p + B))
    return 2 * ck / (g - 1) * ((p / pk) ** ((g - 1) / (2 * g)) - 1)


def riemann_star(left, right, gamma: float = 1.4, tol: float = 1e-14) -> RiemannSolution:
    """Star pressure and velocity from the two-wave pressure function."""
    rl, ul, pl = map(float, left)
    rr, ur, pr = map(float, right)
    if min(rl, rr, pl, pr) <= 0:
        raise ValueError("states must have positive density and pressure")
    g = gamma
    cl, cr = np.sqrt(g * pl / rl), np.sqrt(g * pr / rr)
    if 2 * (cl + cr) / (g - 1) <= ur - ul:
        raise VacuumError("the Riemann problem generates vacuum")

    def F(p):
        return _pressure_function(p, rl, pl, cl, g) + _pressure_function(p, rr, pr, cr, g) + ur - ul

    lo, hi = 1e-14 * min(pl, pr), max(pl, pr)
    while F(hi) < 0:
        hi *= 2
    if F(lo) > 0:
        raise VacuumError("no positive star pressure")
    ps = brentq(F, lo, hi, xtol=tol * hi, rtol=4 * np.finfo(float).eps, maxiter=500)
    us = 0.5 * (ul + ur) + 0.5 * (_pressure_function(ps, rr, pr, cr, g)
                                  - _pressure_function(ps, rl, pl, cl, g))
    return RiemannSolution((rl, ul, pl), (rr, ur, pr), g, ps, us)


def exact_riemann(left, right, gamma: float, xi) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """``(rho, u, p)`` of the self-similar solution at ``xi = (x - x0) / t``."""
    return riemann_star(left, right, gamma).sample(xi)


# -- WENO-5 reference ----------------------------------------------------------------


def _weno5_faces(v: np.ndarray) -> np.ndarray:
    """Left-biased fifth-order reconstruction at face ``i+1/2`` from ``v[i-2..i+2]``.

    ``v`` carries three ghost entries on each side; output has one entry per
    interior face ``i+1/2`` for ``i = -1 .. n-1`` (n + 1 faces).
    """
    eps = 1e-6
    vm2, vm1, v0, vp1, vp2 = (v[k:len(v) - 4 + k] for k in range(5))
    b0 = 13 / 12 * (vm2 - 2 * vm1 + v0) ** 2 + 0.25 * (vm2 - 4 * vm1 + 3 * v0) ** 2
    b1 = 13 / 12 * (vm1 - 2 * v0 + vp1) ** 2 + 0.25 * (vm1 - vp1) ** 2
    b2 = 13 / 12 * (v0 - 2 * vp1 + vp2) ** 2 + 0.25 * (3 * v0 - 4 * vp1 + vp2) ** 2
    a0 = 0.1 / (eps + b0) ** 2
    a1 = 0.6 / (eps + b1) ** 2
    a2 = 0.3 / (eps + b2) ** 2
    q0 = (2 * vm2 - 7 * vm1 + 11 * v0) / 6
    q1 = (-vm1 + 5 * v0 + 2 * vp1) / 6
    q2 = (2 * v0 + 5 * vp1 - vp2) / 6
    return (a0 * q0 + a1 * q1 + a2 * q2) / (a0 + a1 + a2)


def _ghost(U: np.ndarray, bc: str, odd: np.ndarray, n: int = 3) -> np.ndarray:
    if bc == "periodic":
        return np.concatenate([U[-n:], U, U[:n]])
    if bc == "reflective":
        sign = np.where(odd, -1.0, 1.0)
        left = U[:n][::-1] * sign
        right = U[-n:][::-1] * sign
        return np.concatenate([left, U, right])
    return np.concatenate([np.repeat(U[:1], n, axis=0), U, np.repeat(U[-1:], n, axis=0)])


def weno5_rhs(U: np.ndarray, flux, dx: float, bc: str, odd: np.ndarray) -> np.ndarray:
    """Conservative finite-difference WENO-5 with global Lax-Friedrichs splitting."""
    alpha = flux.wave_speed(U)
    G = _ghost(U, bc, odd)
    F = flux(G)
    fp = 0.5 * (F + alpha * G)
    fm = 0.5 * (F - alpha * G)
    # faces i+1/2 for i = -1 .. n-1 use stencils centred on ghost index i+3
    plus = _weno5_faces(fp[:-1])
    minus = _weno5_faces(fm[::-1][:-1])[::-1]
    face = plus + minus
    return -(face[1:] - face[:-1]) / dx


def weno5_solve(initial: Callable, flux, domain, points: int, t_end: float, bc: str,
                odd: np.ndarray | None = None, cfl: float = 0.4) -> tuple[np.ndarray, np.ndarray]:
    """Cell-centred WENO-5 run with third-order SSP Runge-Kutta.

    Returns the cell centres and the conserved state at ``t_end``.
    """
    a, b = domain
    dx = (b - a) / points
    x = a + (np.arange(points) + 0.5) * dx
    U = np.asarray(initial(x), dtype=float)
    odd = np.zeros(U.shape[1:] or (1,), dtype=bool) if odd is None else odd
    if U.ndim == 1:
        odd = bool(np.ravel(odd)[0])
    t = 0.0
    while t < t_end:
        alpha = flux.wave_speed(U)
        dt = min(cfl * dx / alpha if alpha > 0 else t_end, t_end - t)
        L = lambda V: weno5_rhs(V, flux, dx, bc, odd)
        U1 = U + dt * L(U)
        U2 = 0.75 * U + 0.25 * (U1 + dt * L(U1))
        U = U / 3 + 2 / 3 * (U2 + dt * L(U2))
        if not np.all(np.isfinite(U)):
            raise ConvergenceFailure(f"WENO-5 run became non-finite at t={t:.6g}")
        t = t_end if t_end - (t + dt) < 1e-12 * t_end else t + dt
    return x, U


@dataclass
class ReferenceSolution:
    """Tabulated or closed-form reference.

    ``kind`` is one of ``exact_shift``, ``burgers_characteristic``,
    ``exact_riemann`` or ``weno5_converged``.
    """

    kind: str
    evaluator: Callable[[np.ndarray], np.ndarray]
    meta: dict = field(default_factory=dict)
    x: np.ndarray | None = None
    values: np.ndarray | None = None

    def __call__(self, x) -> np.ndarray:
        return self.evaluator(np.asarray(x, dtype=float))


def _table_evaluator(x: np.ndarray, values: np.ndarray, domain, bc: str):
    """Monotone piecewise-cubic interpolant of a nodal table (per column)."""
    a, b = domain
    if bc == "periodic":
        xs = np.concatenate([x[-3:] - (b - a), x, x[:3] + (b - a)])
        vs = np.concatenate([values[-3:], values, values[:3]])
    else:
        xs = np.concatenate([[a], x, [b]])
        vs = np.concatenate([values[:1], values, values[-1:]])
    interp = PchipInterpolator(xs, vs, axis=0, extrapolate=True)

    def evaluate(q):
        q = np.asarray(q, dtype=float)
        if bc == "periodic":
            q = wrap(q, domain)
        return interp(q)
    return evaluate


def default_cache_dir() -> Path:
    root = os.environ.get("WUH_CACHE") or os.path.join(os.path.expanduser("~"), ".cache", "wuh")
    return Path(root)


def weno5_reference(problem, points: int, t_end: float | None = None,
                    cache_dir: str | os.PathLike | None = None,
                    force: bool = False) -> ReferenceSolution:
    """Final-time WENO-5 table for ``problem`` with a PCHIP evaluator.

    Tables are cached as CSV keyed by problem, resolution and end time; the
    file name carries a hash of those keys and ``force`` recomputes.
    """
    t_end = problem.t_end if t_end is None else t_end
    key = f"{problem.name}|{points}|{t_end!r}|{problem.flux.kind}|{problem.domain!r}"
    digest = hashlib.sha256(key.encode()).hexdigest()[:16]
    cache = Path(cache_dir) if cache_dir is not None else default_cache_dir()
    path = cache / f"weno5_{problem.name}_{points}_{digest}.csv"
    x = values = None
    if path.exists() and not force:
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
        if rows and rows[0][0] == f"# {key}":
            arr = np.array([[float(v) for v in r] for r in rows[2:]])
            x, values = arr[:, 0], arr[:, 1:]
    if x is None:
        x, values = weno5_solve(problem.initial, problem.flux, problem.domain, points,
                                t_end, problem.bc, problem.odd_components())
        values = values.reshape(len(x), -1)
        cache.mkdir(parents=True, exist_ok=True)
        tmp = path.with_suffix(".tmp")
        with open(tmp, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow([f"# {key}"])
            w.writerow(["x"] + [f"q{i}" for i in range(values.shape[1])])
            for xi, row in zip(x, values):
                w.writerow([f"{xi:.17g}"] + [f"{v:.17g}" for v in row])
        os.replace(tmp, path)
    if values.shape[1] == 1:
        values = values[:, 0]
    return ReferenceSolution("weno5_converged",
                             _table_evaluator(x, values, problem.domain, problem.bc),
                             {"points": points, "t_end": t_end, "path": str(path)}, x, values)
