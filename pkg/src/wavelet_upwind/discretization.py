"""Upwind wavelet collocation right-hand sides for ``u_t + f(u)_x = 0``."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grid import AdaptiveGrid, OffLatticeError, operators
from .wavelet_basis import ScalingTables


class NonPhysicalStateError(ValueError):
    """Raised when a gas state has non-positive density or pressure."""


@dataclass(frozen=True)
class FluxFunction:
    """Flux of a scalar law or of the 1D Euler equations.

    ``kind`` is ``"linear"`` (``f = speed * u``), ``"burgers"``
    (``f = u^2 / 2``) or ``"euler3"`` (conserved ``(rho, rho u, E)``).

    With ``allow_negative_pressure`` the Euler flux is evaluated from
    whatever pressure the conserved state implies and sound speeds use
    ``|p|``.  Strong-ratio problems need this because the linear upwind
    stencils dip below zero pressure for a few steps before the limiter
    smooths the jump.  Density is always checked.
    """

    kind: str
    speed: float = 1.0
    gamma: float = 1.4
    allow_negative_pressure: bool = False

    def __post_init__(self):
        if self.kind not in ("linear", "burgers", "euler3"):
            raise ValueError(f"unknown flux kind {self.kind!r}")

    @property
    def arity(self) -> str:
        return "euler3" if self.kind == "euler3" else "scalar"

    @property
    def n_components(self) -> int:
        return 3 if self.kind == "euler3" else 1

    def primitive(self, U: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """``(rho, u, p)`` of conserved Euler states, checking positivity."""
        rho, mom, E = U[..., 0], U[..., 1], U[..., 2]
        if np.any(~(rho > 0)):
            raise NonPhysicalStateError("non-positive density")
        u = mom / rho
        p = (self.gamma - 1.0) * (E - 0.5 * mom * u)
        if not self.allow_negative_pressure and np.any(~(p > 0)):
            raise NonPhysicalStateError("non-positive pressure")
        return rho, u, p

    def conserved(self, rho, u, p) -> np.ndarray:
        rho, u, p = np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in (rho, u, p)))
        return np.stack([rho, rho * u, p / (self.gamma - 1.0) + 0.5 * rho * u * u], axis=-1)

    def __call__(self, U: np.ndarray) -> np.ndarray:
        if self.kind == "linear":
            return self.speed * U
        if self.kind == "burgers":
            return 0.5 * U * U
        rho, u, p = self.primitive(U)
        return np.stack([rho * u, rho * u * u + p, u * (U[..., 2] + p)], axis=-1)

    def wave_speed(self, U: np.ndarray) -> float:
        """Largest characteristic speed magnitude over the given states."""
        if self.kind == "linear":
            return abs(self.speed)
        if self.kind == "burgers":
            return float(np.max(np.abs(U))) if np.size(U) else 0.0
        rho, u, p = self.primitive(U)
        return float(np.max(np.abs(u) + np.sqrt(self.gamma * np.abs(p) / rho)))


@dataclass(frozen=True)
class SplitFluxes:
    alpha: float
    plus: np.ndarray
    minus: np.ndarray


def global_lf_split(flux: FluxFunction, U: np.ndarray, alpha: float | None = None) -> SplitFluxes:
    """``f± = (f ± alpha u) / 2`` with ``alpha`` the largest wave speed over ``U``.

    For a linear flux the split is exact upwinding (``f-`` is identically
    zero when the speed is positive).
    """
    U = np.asarray(U, dtype=float)
    f = flux(U)
    if flux.kind == "linear":
        a = flux.speed
        zero = np.zeros_like(f)
        return SplitFluxes(abs(a), f if a >= 0 else zero, zero if a >= 0 else f)
    if alpha is None:
        alpha = flux.wave_speed(U)
    plus = 0.5 * (f + alpha * U)
    return SplitFluxes(alpha, plus, f - plus)


def _hold_boundary(grid: AdaptiveGrid, dudt: np.ndarray) -> np.ndarray:
    if grid.bc == "fixed":
        dudt[0] = 0.0
        dudt[-1] = 0.0
    return dudt


def _is_uniform(grid: AdaptiveGrid) -> bool:
    return bool(np.all(grid.levels == grid.J0))


def uniform_derivative(values: np.ndarray, basis: ScalingTables, dx: float) -> np.ndarray:
    """Periodic uniform-grid derivative by the banded ``phi'`` stencil."""
    out = np.zeros_like(values, dtype=float)
    for m, w in basis.derivative_stencil().items():
        out += w * np.roll(values, m, axis=0)
    return out / dx


def wavelet_derivative(grid: AdaptiveGrid, basis: ScalingTables, values, target=None):
    """Derivative of the expansion of ``values`` at active nodes.

    ``target`` selects nodes by fine index; ``None`` returns every active
    node.  Targets that are not active nodes raise :class:`OffLatticeError`.
    """
    values = np.asarray(values, dtype=float)
    ops = operators(grid, basis)
    du = ops.differentiate(ops.transform(values))
    if target is None:
        return du
    target = np.asarray(target, dtype=np.int64)
    if not np.all(grid.contains(target)):
        raise OffLatticeError("derivative target is not an active node")
    return du[grid.position(target)]


def rhs_uniform(grid: AdaptiveGrid, values, flux: FluxFunction,
                bases: tuple[ScalingTables, ScalingTables]) -> np.ndarray:
    """``-(D+ f+ + D- f-)`` on a grid whose nodes all sit at level ``J0``."""
    if not _is_uniform(grid):
        raise ValueError("rhs_uniform needs a single-level grid")
    U = np.asarray(values, dtype=float)
    split = global_lf_split(flux, U)
    pos, neg = bases
    if grid.periodic:
        dx = grid.spacing(grid.J0)
        dudt = -(uniform_derivative(split.plus, pos, dx)
                 + uniform_derivative(split.minus, neg, dx))
    else:
        dudt = -(operators(grid, pos).derivative @ split.plus
                 + operators(grid, neg).derivative @ split.minus)
    return _hold_boundary(grid, dudt)


def rhs_adaptive(grid: AdaptiveGrid, values, flux: FluxFunction,
                 bases: tuple[ScalingTables, ScalingTables]) -> np.ndarray:
    """Right-hand side on an arbitrary admissible node set.

    Each split flux is transformed with its own orientation's basis and
    differentiated through the same basis, so the positive part only ever
    sees the left-biased stencils and the negative part the right-biased ones.
    """
    U = np.asarray(values, dtype=float)
    split = global_lf_split(flux, U)
    pos, neg = bases
    dudt = -wavelet_derivative(grid, pos, split.plus)
    if flux.kind != "linear" or flux.speed < 0:
        dudt -= wavelet_derivative(grid, neg, split.minus)
    return _hold_boundary(grid, dudt)


def rhs(grid: AdaptiveGrid, values, flux: FluxFunction,
        bases: tuple[ScalingTables, ScalingTables]) -> np.ndarray:
    """Dispatch to the uniform stencil when the grid has a single level."""
    if _is_uniform(grid) and grid.periodic:
        return rhs_uniform(grid, values, flux, bases)
    return rhs_adaptive(grid, values, flux, bases)
