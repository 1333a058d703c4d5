"""Integral-average reconstruction with a TVB-type switch."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grid import AdaptiveGrid, CoefficientSet, forward_transform, interval_matrix, operators
from .wavelet_basis import ScalingTables

MODES = ("off", "TVBU", "TVBR", "TVBC")

# Interval lengths are handled in units of a quarter fine cell so every
# length of the TVBC rule is an integer.
_Q = 2


@dataclass(frozen=True)
class LimiterConfig:
    """``M`` multiplies ``h^2`` in the switch; ``eps0``/``eps1`` only matter for TVBC.

    ``component`` picks the field whose coefficients drive TVBC (density
    for Euler states).
    """

    mode: str = "off"
    M: float = 0.0
    eps0: float = 1e-2
    eps1: float = 1e-4
    component: int = 0

    def __post_init__(self):
        mode = self.mode.upper() if self.mode.lower() != "off" else "off"
        if mode not in MODES:
            raise ValueError(f"unknown limiter mode {self.mode!r}")
        object.__setattr__(self, "mode", mode)
        if self.M < 0:
            raise ValueError("M must be non-negative")
        if mode == "TVBC" and self.eps1 > self.eps0:
            raise ValueError("eps1 must not exceed eps0")


def tvb_switch(u, mean, M: float, h):
    """Keep ``u`` where ``|mean - u| <= M h^2``, otherwise take ``mean``."""
    u = np.asarray(u, dtype=float)
    mean = np.asarray(mean, dtype=float)
    keep = np.abs(mean - u) <= M * np.asarray(h, dtype=float) ** 2
    out = np.where(keep, u, mean)
    return out[()] if out.ndim == 0 else out


def _interval_bounds(grid: AdaptiveGrid, fine: np.ndarray, h_units: np.ndarray):
    """Integer end points (units 2^-_Q fine cells), shifted inside bounded domains."""
    T = fine << _Q
    half = h_units // 2
    L, R = T - half, T + half
    if not grid.periodic:
        top = grid.n_fine << _Q
        over = R > top
        L[over], R[over] = top - h_units[over], top
        under = L < 0
        L[under], R[under] = 0, h_units[under]
    return L, R


def _to_units(grid: AdaptiveGrid, h) -> np.ndarray:
    cells = np.broadcast_to(np.asarray(h, dtype=float), (grid.size,)) / grid.spacing(grid.Jmax)
    units = np.rint(cells * (1 << _Q))
    if np.any(np.abs(units - cells * (1 << _Q)) > 1e-9 * np.maximum(1.0, units)):
        raise ValueError("interval length is not a multiple of a quarter finest cell")
    units = units.astype(np.int64)
    if np.any(units <= 0) or np.any(units % 2):
        raise ValueError("interval length must be a positive multiple of half a finest cell")
    if not grid.periodic and np.any(units > grid.n_fine << _Q):
        raise ValueError("interval longer than the domain")
    return units


def integral_averages(grid: AdaptiveGrid, coeffs: CoefficientSet, basis: ScalingTables,
                      h) -> np.ndarray:
    """Mean of the expansion over ``[x_i - h_i/2, x_i + h_i/2]`` at every active node.

    Computed exactly for the expansion from differences of the tabulated
    primitive.  Periodic intervals wrap; bounded ones are shifted inward.
    """
    units = _to_units(grid, h)
    L, R = _interval_bounds(grid, grid.fine, units)
    return operators(grid, basis).interval_means(L, R, _Q) @ coeffs.values


def integral_average(grid: AdaptiveGrid, coeffs: CoefficientSet, basis: ScalingTables,
                     node: int, h: float):
    """Mean over the interval of length ``h`` centred on active node ``node`` (fine index)."""
    i = int(grid.position(node))
    units = _to_units(grid, h)[i:i + 1]
    L, R = _interval_bounds(grid, grid.fine[i:i + 1], units)
    return (interval_matrix(grid, basis, L, R, _Q) @ coeffs.values)[0]


def interval_lengths(grid: AdaptiveGrid, coeffs: CoefficientSet | None,
                     config: LimiterConfig) -> np.ndarray:
    """Interval length ``h_i`` at every active node.

    TVBU and TVBR use the finest spacing everywhere.  TVBC grades the length
    by the node's level and the size of its coefficient.
    """
    fine = grid.spacing(grid.Jmax)
    if config.mode in ("TVBU", "TVBR"):
        return np.full(grid.size, fine)
    if config.mode != "TVBC":
        raise ValueError("no interval length when limiting is off")
    wide = grid.spacing((grid.Jmax + grid.J0) // 2)
    narrow = grid.spacing(grid.Jmax - 1)
    middle = 0.5 * (wide + narrow)
    v = coeffs.values if coeffs.values.ndim == 1 else coeffs.values[:, config.component]
    d = np.abs(v)
    lev = grid.levels
    h = np.full(grid.size, narrow)
    hi = lev > grid.J0
    h[hi & (d >= config.eps0)] = wide
    h[hi & (d >= config.eps1) & (d < config.eps0)] = middle
    succ = np.roll(lev, -1)
    if not grid.periodic:
        succ[-1] = grid.J0
    h[(lev == grid.J0) & (succ > grid.J0)] = middle
    return h


def interval_length(grid: AdaptiveGrid, coeffs: CoefficientSet | None, node: int,
                    config: LimiterConfig) -> float:
    return float(interval_lengths(grid, coeffs, config)[grid.position(node)])


def apply_limiter(grid: AdaptiveGrid, state, basis: ScalingTables,
                  config: LimiterConfig) -> np.ndarray:
    """One reconstruction pass over every active node.

    Each component is switched by its own deviation from its mean; the
    driving component's coefficients only enter the TVBC interval rule.
    """
    state = np.asarray(state, dtype=float)
    if config.mode == "off":
        return state.copy()
    coeffs = forward_transform(grid, state, basis)
    h = interval_lengths(grid, coeffs, config)
    mean = integral_averages(grid, coeffs, basis, h)
    hh = h if state.ndim == 1 else h[:, None]
    return tvb_switch(state, mean, config.M, hh)
