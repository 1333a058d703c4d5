"""Explicit RK4 stepping and the adapt / integrate / limit loop."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .adaptivity import AdaptConfig, AdaptLog, adapt_step, initialize_nodes
from .discretization import FluxFunction, NonPhysicalStateError, rhs
from .grid import AdaptiveGrid, build_uniform
from .limiter import LimiterConfig, apply_limiter
from .wavelet_basis import basis_pair

log = logging.getLogger(__name__)


class SolverError(RuntimeError):
    """Raised when a step keeps failing or the state stops being finite."""


@dataclass(frozen=True)
class TimeControl:
    """``cfl`` scales the step; ``accuracy_mode`` caps it by ``h^1.5`` as well."""

    t_end: float
    cfl: float = 0.4
    dt_override: float | None = None
    accuracy_mode: bool = False
    max_retries: int = 4

    def __post_init__(self):
        if not self.t_end > 0:
            raise ValueError("t_end must be positive")
        if not 0 < self.cfl <= 1:
            raise ValueError("cfl must lie in (0, 1]")


@dataclass(frozen=True)
class SchemeConfig:
    """``adaptive=False`` is the static uniform scheme on level ``J0``."""

    N: int = 5
    J0: int = 6
    Jmax: int | None = None
    adaptive: bool = False
    depth: int | None = None
    eta: int | None = None

    @property
    def levels(self) -> tuple[int, int]:
        if not self.adaptive:
            return self.J0, self.J0
        return self.J0, self.J0 if self.Jmax is None else self.Jmax


def rk4_step(grid: AdaptiveGrid, state: np.ndarray,
             f: Callable[[AdaptiveGrid, np.ndarray], np.ndarray], dt: float) -> np.ndarray:
    """Classic four-stage Runge-Kutta step on a frozen grid."""
    if not dt > 0:
        raise ValueError("dt must be positive")
    k1 = f(grid, state)
    k2 = f(grid, state + 0.5 * dt * k1)
    k3 = f(grid, state + 0.5 * dt * k2)
    k4 = f(grid, state + dt * k3)
    return state + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def compute_dt(grid: AdaptiveGrid, state: np.ndarray, flux: FluxFunction,
               control: TimeControl, t: float = 0.0) -> float:
    """Step from the smallest active spacing and the largest wave speed.

    The step is shrunk so that a whole number of equal steps of this size
    would reach ``t_end``; the last step lands on it exactly.
    """
    if control.dt_override is not None and not control.accuracy_mode:
        dt = control.dt_override
    else:
        h = grid.spacing(int(grid.levels.max()))
        alpha = flux.wave_speed(state)
        if alpha > 0:
            dt = control.cfl * h / alpha
        elif control.dt_override is not None:
            dt = control.dt_override
        else:
            dt = control.cfl * h * h
        if control.accuracy_mode:
            dt = min(dt, control.cfl * h ** 1.5)
    remaining = control.t_end - t
    if dt >= remaining or remaining - dt < 1e-12 * control.t_end:
        return remaining
    return remaining / math.ceil(remaining / dt - 1e-9)


@dataclass
class Solution:
    grid: AdaptiveGrid
    state: np.ndarray
    t: float
    steps: int
    adapt_log: AdaptLog | None = None
    dt_trace: list[float] = field(default_factory=list)
    snapshots: list[tuple[float, AdaptiveGrid, np.ndarray]] = field(default_factory=list)

    @property
    def x(self) -> np.ndarray:
        return self.grid.x


def _mirror_initial(initial, a: float, length: float, odd: np.ndarray):
    """Initial data of the mirror-doubled domain ``[a - length, a + length)``."""
    def doubled(x):
        x = np.asarray(x, dtype=float)
        left = x < a
        xs = np.where(left, 2 * a - x, x)
        U = np.array(initial(xs), dtype=float)
        sign = np.where(odd, -1.0, 1.0)
        U[left] = U[left] * sign
        return U
    return doubled


def _restrict_mirror(grid: AdaptiveGrid, state: np.ndarray, domain) -> tuple[AdaptiveGrid, np.ndarray]:
    """Keep the physical half of a mirror-doubled periodic run."""
    half = grid.n_fine // 2
    keep = grid.fine >= half
    fine = np.concatenate([grid.fine[keep] - half, [half]])
    vals = np.concatenate([state[keep], state[:1]])
    out = AdaptiveGrid(grid.J0, grid.Jmax, tuple(domain), "reflective", grid.n0 // 2,
                       grid.eta, fine.astype(np.int64))
    return out, vals


def solve(problem, scheme: SchemeConfig, adapt: AdaptConfig | None = None,
          limiter: LimiterConfig | None = None, control: TimeControl | None = None,
          snapshot_every: int = 0, progress: Callable[[float, int], None] | None = None
          ) -> Solution:
    """Integrate ``problem`` to ``control.t_end``.

    Each step adapts the active set from the current state (adaptive scheme
    only), picks ``dt``, takes one RK4 step on the frozen set and applies the
    limiter once.  Reflective walls are handled by solving the mirror-doubled
    periodic problem and returning the physical half.
    """
    limiter = limiter or LimiterConfig()
    control = control or TimeControl(problem.t_end)
    J0, Jmax = scheme.levels
    depth = scheme.depth or max(10, Jmax - J0 + 4)
    pos, neg = basis_pair(scheme.N, depth)
    eta = scheme.eta or scheme.N
    flux = problem.flux

    a, b = problem.domain
    initial, domain, bc = problem.initial, (a, b), problem.bc
    if bc == "reflective":
        length = b - a
        initial = _mirror_initial(problem.initial, a, length, problem.odd_components())
        domain, bc = (a - length, b), "periodic"
    grid = build_uniform(J0, domain, bc, Jmax=Jmax, eta=eta, unit=problem.unit)

    alog = AdaptLog() if scheme.adaptive else None
    if scheme.adaptive:
        grid, U = initialize_nodes(initial, grid, pos, adapt or AdaptConfig())
    else:
        U = np.asarray(initial(grid.x), dtype=float)

    def f(g, s):
        return rhs(g, s, flux, (pos, neg))

    t, steps = 0.0, 0
    sol = Solution(grid, U, t, steps, alog)
    while t < control.t_end:
        if scheme.adaptive:
            grid, U = adapt_step(grid, U, pos, adapt or AdaptConfig(), alog, t)
        dt = compute_dt(grid, U, flux, control, t)
        for attempt in range(control.max_retries + 1):
            try:
                new = rk4_step(grid, U, f, dt)
                new = apply_limiter(grid, new, pos, limiter)
                if flux.kind == "euler3":
                    flux.primitive(new)
                break
            except NonPhysicalStateError as exc:
                if attempt == control.max_retries:
                    raise SolverError(f"step at t={t:.6g} failed: {exc}") from exc
                dt *= 0.5
                log.debug("retrying step at t=%g with dt=%g", t, dt)
        if not np.all(np.isfinite(new)):
            raise SolverError(f"non-finite state at t={t + dt:.6g}")
        U = new
        t = control.t_end if control.t_end - (t + dt) < 1e-12 * control.t_end else t + dt
        steps += 1
        sol.dt_trace.append(dt)
        if snapshot_every and steps % snapshot_every == 0:
            sol.snapshots.append((t, grid, U.copy()))
        if progress is not None:
            progress(t, steps)

    if problem.bc == "reflective":
        grid, U = _restrict_mirror(grid, U, (a, b))
    sol.grid, sol.state, sol.t, sol.steps = grid, U, t, steps
    return sol
