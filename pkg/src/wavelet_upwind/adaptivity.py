"""Trouble-node detection and active-set updates between time steps."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .grid import (AdaptiveGrid, CoefficientSet, _ragged, forward_transform,
                   node_levels, point_matrix, threshold)
from .wavelet_basis import ScalingTables


@dataclass(frozen=True)
class AdaptConfig:
    """Refinement parameters.

    ``eps`` is the coefficient threshold, ``M0`` scales ``dx^2`` in the
    basic-level smoothness test, ``L`` and ``Kw`` shape the adjacent zone and
    ``L0`` is how many levels are inserted around a basic-level trouble node.
    ``component`` picks the field that drives refinement.
    """

    eps: float = 1e-3
    M0: float = 100.0
    L: int = 1
    Kw: float = 2.0
    L0: int = 1
    component: int = 0

    def __post_init__(self):
        if not self.eps > 0:
            raise ValueError("eps must be positive")
        if self.L < 0 or self.Kw < 0 or self.L0 < 1:
            raise ValueError("invalid adjacent-zone parameters")


# -- basic-level detection ------------------------------------------------------


def smoothness_indicators(f: np.ndarray, periodic: bool = True) -> np.ndarray:
    """Jiang-Shu indicator at every node of a uniform sample.

    On bounded samples the end nodes reuse the stencil of their inner
    neighbour.
    """
    f = np.asarray(f, dtype=float)
    if periodic:
        fm, fp = np.roll(f, 1), np.roll(f, -1)
        return 13.0 / 12.0 * (fm - 2 * f + fp) ** 2 + 0.25 * (fm - fp) ** 2
    inner = smoothness_indicators(f, True)[1:-1]
    return np.concatenate([inner[:1], inner, inner[-1:]])


def smoothness_indicator(values, l: int, dx: float | None = None, periodic: bool = True) -> float:
    """Indicator at index ``l`` of the basic-level samples ``values``.

    ``dx`` does not enter the indicator itself; it is accepted so callers
    can pass the same arguments as to :func:`detect_trouble_J0`.
    """
    return float(smoothness_indicators(values, periodic)[l])


def detect_trouble_J0(values, dx: float, M0: float, periodic: bool = True) -> np.ndarray:
    """Indices of basic-level samples with indicator above ``M0 dx^2``."""
    return np.flatnonzero(smoothness_indicators(values, periodic) > M0 * dx * dx)


def detect_trouble_J(coeffs: CoefficientSet, eps: float) -> np.ndarray:
    return threshold(coeffs, eps)


# -- adjacent zones -------------------------------------------------------------


def zone_nodes(grid: AdaptiveGrid, centres: np.ndarray, levels: np.ndarray,
               lo_level: Callable[[np.ndarray], np.ndarray] | int,
               hi_level: Callable[[np.ndarray], np.ndarray] | int,
               radius_level: np.ndarray, Kw: float) -> np.ndarray:
    """Fine indices of nodes whose own level lies in ``[lo, hi]`` near each centre.

    A node qualifies when its distance to the centre is at most
    ``Kw`` spacings of level ``radius_level``.
    """
    centres = np.asarray(centres, dtype=np.int64)
    out = []
    for J1 in range(grid.J0 + 1, grid.Jmax + 1):
        sel = (_per_centre(lo_level, levels) <= J1) & (J1 <= _per_centre(hi_level, levels))
        if not np.any(sel):
            continue
        c = centres[sel]
        r = np.floor(Kw * (1 << (grid.Jmax - radius_level[sel])) + 1e-9).astype(np.int64)
        s = 1 << (grid.Jmax - J1)
        first = -((r - c) // s)          # ceil((c - r) / s)
        last = (c + r) // s
        owner, m = _ragged(first, last + 1)
        m = m[m % 2 == 1]
        out.append(m * s)
    if not out:
        return np.zeros(0, dtype=np.int64)
    K = grid.wrap(np.concatenate(out))
    return np.unique(K[grid.in_domain(K)])


def _per_centre(spec, levels):
    return spec(levels) if callable(spec) else np.full(levels.shape, spec)


def adjacent_zones(grid: AdaptiveGrid, trouble: np.ndarray, config: AdaptConfig) -> np.ndarray:
    """Union of the adjacent zones of the given trouble nodes (fine indices)."""
    trouble = np.asarray(trouble, dtype=np.int64)
    if len(trouble) == 0:
        return trouble
    lev = node_levels(trouble, grid.J0, grid.Jmax)
    return zone_nodes(grid, trouble, lev,
                      lambda J: np.maximum(J - config.L, grid.J0 + 1),
                      lambda J: np.minimum(J + config.L, grid.Jmax),
                      lev, config.Kw)


def adjacent_zone(grid: AdaptiveGrid, node, config: AdaptConfig) -> set[tuple[int, int]]:
    """Adjacent zone of one node given as ``(level, index)``, as ``(level, index)`` pairs."""
    J, l = node
    if not grid.J0 <= J <= grid.Jmax:
        raise ValueError("node level outside the hierarchy")
    K = np.array([l << (grid.Jmax - J)], dtype=np.int64)
    lev = np.array([J])
    fine = zone_nodes(grid, K, lev,
                      lambda J_: np.maximum(J_ - config.L, grid.J0 + 1),
                      lambda J_: np.minimum(J_ + config.L, grid.Jmax),
                      lev, config.Kw)
    levs = node_levels(fine, grid.J0, grid.Jmax)
    return {(int(j), int(k >> (grid.Jmax - j))) for j, k in zip(levs, fine)}


def insert_around_J0(grid: AdaptiveGrid, trouble_l: np.ndarray, config: AdaptConfig) -> np.ndarray:
    """Nodes of levels ``J0+1 .. J0+L0`` within ``Kw`` basic spacings of each trouble node."""
    trouble_l = np.asarray(trouble_l, dtype=np.int64)
    if len(trouble_l) == 0:
        return trouble_l
    K = trouble_l * grid.step0
    lev = np.full(K.shape, grid.J0)
    return zone_nodes(grid, K, lev, grid.J0 + 1, min(grid.J0 + config.L0, grid.Jmax),
                      lev, config.Kw)


def _close_parents(grid: AdaptiveGrid, fine: np.ndarray) -> np.ndarray:
    """Add both coarser neighbours of every node, level by level downwards.

    This keeps every active node's parents active, so coarsening never
    strands a fine node without the nodes it refines.
    """
    fine = np.unique(fine)
    for J in range(grid.Jmax, grid.J0, -1):
        lev = node_levels(fine, grid.J0, grid.Jmax)
        K = fine[lev == J]
        if len(K) == 0:
            continue
        s = 1 << (grid.Jmax - J)
        parents = grid.wrap(np.concatenate([K - s, K + s]))
        parents = parents[grid.in_domain(parents)]
        fine = np.union1d(fine, parents)
    return fine


def _characteristic(state: np.ndarray, component: int) -> np.ndarray:
    return state if state.ndim == 1 else state[:, component]


def refine_set(grid: AdaptiveGrid, state: np.ndarray, basis: ScalingTables,
               config: AdaptConfig) -> tuple[np.ndarray, CoefficientSet]:
    """Fine indices of the next active set computed from ``state`` on ``grid``."""
    chi = _characteristic(state, config.component)
    coeffs = forward_transform(grid, chi, basis)
    base = grid.base_fine()
    base_vals = chi[grid.position(base)]
    t0 = detect_trouble_J0(base_vals, grid.spacing(grid.J0), config.M0, grid.periodic)
    troubled = detect_trouble_J(coeffs, config.eps)
    new = np.concatenate([base, insert_around_J0(grid, t0, config),
                          adjacent_zones(grid, troubled, config)])
    return _close_parents(grid, new), coeffs


# -- initialisation and per-step update ------------------------------------------


def initialize_nodes(initial: Callable[[np.ndarray], np.ndarray], grid: AdaptiveGrid,
                     basis: ScalingTables, config: AdaptConfig,
                     max_sweeps: int = 64) -> tuple[AdaptiveGrid, np.ndarray]:
    """Refine a basic-level grid around the structure of the initial data.

    Basic-level trouble nodes get ``L0`` levels inserted around them; then
    nodes are added in the adjacent zones of every coefficient above ``eps``,
    recomputed from the exact initial data, until the set stops growing.
    """
    grid = grid.with_fine(grid.base_fine())
    state = np.asarray(initial(grid.x), dtype=float)
    chi = _characteristic(state, config.component)
    t0 = detect_trouble_J0(chi, grid.spacing(grid.J0), config.M0, grid.periodic)
    seeds = [grid.fine, insert_around_J0(grid, t0, config)]
    if grid.Jmax > grid.J0:
        # every first-level node is a candidate: its coefficient is the
        # exact value minus the basic-level prediction
        cand = grid.all_fine(grid.J0 + 1)
        cand = cand[node_levels(cand, grid.J0, grid.Jmax) == grid.J0 + 1]
        exact = _characteristic(np.asarray(initial(grid.fine_to_x(cand)), dtype=float),
                                config.component)
        coef = forward_transform(grid, chi, basis).values
        d = exact - point_matrix(grid, basis, cand) @ coef
        seeds.append(adjacent_zones(grid, cand[np.abs(d) > config.eps], config))
    grid = grid.with_fine(_close_parents(grid, np.concatenate(seeds)))
    for _ in range(max_sweeps):
        state = np.asarray(initial(grid.x), dtype=float)
        coeffs = forward_transform(grid, _characteristic(state, config.component), basis)
        zones = adjacent_zones(grid, detect_trouble_J(coeffs, config.eps), config)
        fine = _close_parents(grid, np.union1d(grid.fine, zones))
        if len(fine) == grid.size:
            break
        grid = grid.with_fine(fine)
    return grid, np.asarray(initial(grid.x), dtype=float)


@dataclass
class AdaptRecord:
    t: float
    n_active: int
    n_added: int
    n_removed: int
    max_level: int


@dataclass
class AdaptLog:
    records: list[AdaptRecord] = field(default_factory=list)

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["t", "n_active", "n_added", "n_removed", "max_level"])
            for r in self.records:
                w.writerow([f"{r.t:.17g}", r.n_active, r.n_added, r.n_removed, r.max_level])


def reconstruct(old: AdaptiveGrid, state: np.ndarray, new: AdaptiveGrid,
                basis: ScalingTables) -> np.ndarray:
    """State on ``new``: kept nodes copy their values, added ones interpolate."""
    state = np.asarray(state, dtype=float)
    out = np.empty((new.size,) + state.shape[1:])
    have = old.contains(new.fine)
    out[have] = state[old.position(new.fine[have])]
    if np.any(~have):
        coef = forward_transform(old, state, basis).values
        out[~have] = point_matrix(old, basis, new.fine[~have]) @ coef
    return out


def adapt_step(grid: AdaptiveGrid, state: np.ndarray, basis: ScalingTables,
               config: AdaptConfig, log: AdaptLog | None = None,
               t: float = 0.0) -> tuple[AdaptiveGrid, np.ndarray]:
    """Next active set and the state reconstructed on it.

    The new set is the basic level, the insertions around basic-level
    trouble nodes and the adjacent zones of coefficients above ``eps``, closed
    under parents.  Everything else above the basic level is dropped.
    """
    state = np.asarray(state, dtype=float)
    fine, _ = refine_set(grid, state, basis, config)
    if len(fine) == grid.size and np.array_equal(fine, grid.fine):
        new, new_state = grid, state
    else:
        new = grid.with_fine(fine)
        new_state = reconstruct(grid, state, new, basis)
    if log is not None:
        added = int(np.count_nonzero(~grid.contains(new.fine)))
        removed = int(np.count_nonzero(~new.contains(grid.fine)))
        log.records.append(AdaptRecord(t, new.size, added, removed, int(new.levels.max())))
    return new, new_state
