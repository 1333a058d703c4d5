"""Sparse dyadic grids and the interpolating multiresolution machinery.

Nodes are stored once, at the coarsest level where they exist, by their
integer index on the finest (``Jmax``) lattice.  A grid with ``n0`` level-J0
intervals on ``[a, b]`` places node ``K`` at ``x = a + (b - a) K / (n0 2^(Jmax-J0))``.

The expansion of a nodal field is

    u(x) = sum_k c_k Phi_{J0,k}(x) + sum_{J>J0} sum_k d_{J,k} phi(2^J s - k)

with ``Phi`` the boundary-modified level-J0 basis (periodised on periodic
grids).  Every basis function vanishes at the nodes of its own and of
coarser levels, so the collocation matrix is unit lower triangular in level
order and the forward transform is a level-ascending substitution.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np
import scipy.sparse as sp

from .wavelet_basis import OffLatticeError, ScalingTables

BOUNDARY_KINDS = ("periodic", "fixed", "reflective")


class InvalidGridError(ValueError):
    """Raised for inadmissible levels, intervals or node sets."""


class MissingValueError(ValueError):
    """Raised when a field does not cover every active node."""


def _normalise_bc(bc: str) -> str:
    if bc == "fixed_inflow_outflow":
        return "fixed"
    if bc not in BOUNDARY_KINDS:
        raise InvalidGridError(f"unknown boundary kind {bc!r}")
    return bc


def node_levels(K: np.ndarray, J0: int, Jmax: int) -> np.ndarray:
    """Own level of each fine-lattice index (the coarsest level holding it)."""
    K = np.asarray(K, dtype=np.int64)
    step = 1 << (Jmax - J0)
    lev = np.full(K.shape, J0, dtype=np.int64)
    odd = K % step != 0
    if np.any(odd):
        low = K[odd] & -K[odd]
        lev[odd] = Jmax - np.log2(low).astype(np.int64)
    return lev


@dataclass(frozen=True)
class DyadicNode:
    level: int
    index: int
    x: float


@dataclass(frozen=True, eq=False)
class AdaptiveGrid:
    """Active node set on a dyadic hierarchy over ``domain``.

    ``fine`` holds the sorted active indices on the ``Jmax`` lattice.  The
    grid is treated as immutable; adaptation builds a new one with
    :meth:`with_fine`.
    """

    J0: int
    Jmax: int
    domain: tuple[float, float]
    bc: str
    n0: int
    eta: int
    fine: np.ndarray = field(repr=False)

    @property
    def periodic(self) -> bool:
        return self.bc == "periodic"

    @property
    def step0(self) -> int:
        """Fine-lattice distance between neighbouring level-J0 nodes."""
        return 1 << (self.Jmax - self.J0)

    @property
    def n_fine(self) -> int:
        """Number of finest-level intervals across the domain."""
        return self.n0 * self.step0

    @property
    def length(self) -> float:
        return self.domain[1] - self.domain[0]

    def spacing(self, level: float) -> float:
        """Physical node spacing of level ``level``."""
        return self.length / self.n0 * 2.0 ** (self.J0 - level)

    @cached_property
    def levels(self) -> np.ndarray:
        return node_levels(self.fine, self.J0, self.Jmax)

    @cached_property
    def x(self) -> np.ndarray:
        a, _ = self.domain
        return a + self.length * self.fine / self.n_fine

    @cached_property
    def key(self) -> bytes:
        return self.fine.tobytes()

    @property
    def size(self) -> int:
        return len(self.fine)

    def level_index(self) -> np.ndarray:
        return self.fine >> (self.Jmax - self.levels)

    def all_fine(self, level: int) -> np.ndarray:
        """Fine indices of every node that exists at ``level`` (any parity)."""
        step = 1 << (self.Jmax - level)
        stop = self.n_fine if self.periodic else self.n_fine + 1
        return np.arange(0, stop, step, dtype=np.int64)

    def base_fine(self) -> np.ndarray:
        return self.all_fine(self.J0)

    def position(self, K) -> np.ndarray:
        """Index into the active arrays of fine indices ``K`` (must be active)."""
        K = np.asarray(K, dtype=np.int64)
        pos = np.searchsorted(self.fine, K)
        pos = np.minimum(pos, len(self.fine) - 1)
        if np.any(self.fine[pos] != K):
            raise MissingValueError("node is not active")
        return pos

    def contains(self, K) -> np.ndarray:
        K = np.asarray(K, dtype=np.int64)
        pos = np.minimum(np.searchsorted(self.fine, K), len(self.fine) - 1)
        return self.fine[pos] == K

    def wrap(self, K) -> np.ndarray:
        """Map fine indices into the domain (periodic wrap, else clipped away)."""
        K = np.asarray(K, dtype=np.int64)
        if self.periodic:
            return np.mod(K, self.n_fine)
        return K

    def in_domain(self, K) -> np.ndarray:
        K = np.asarray(K, dtype=np.int64)
        if self.periodic:
            return np.ones(K.shape, dtype=bool)
        return (K >= 0) & (K <= self.n_fine)

    def with_fine(self, fine: Iterable[int]) -> "AdaptiveGrid":
        fine = np.unique(self.wrap(np.fromiter(fine, dtype=np.int64)
                                   if not isinstance(fine, np.ndarray) else fine))
        fine = fine[self.in_domain(fine)]
        base = self.base_fine()
        if not np.all(np.isin(base, fine)):
            raise InvalidGridError("every level-J0 node must stay active")
        return AdaptiveGrid(self.J0, self.Jmax, self.domain, self.bc, self.n0,
                            self.eta, fine)

    def with_levels(self, Jmax: int) -> "AdaptiveGrid":
        """Same active nodes expressed on a hierarchy with a new ``Jmax``."""
        if Jmax < self.Jmax and np.any(self.levels > Jmax):
            raise InvalidGridError("active nodes above the new maximum level")
        shift = Jmax - self.Jmax
        fine = self.fine << shift if shift >= 0 else self.fine >> -shift
        return AdaptiveGrid(self.J0, Jmax, self.domain, self.bc, self.n0, self.eta, fine)

    def nodes(self) -> list[DyadicNode]:
        return [DyadicNode(int(J), int(k), float(x))
                for J, k, x in zip(self.levels, self.level_index(), self.x)]

    def fine_to_x(self, K) -> np.ndarray:
        a, _ = self.domain
        return a + self.length * np.asarray(K, dtype=np.int64) / self.n_fine

    def fine_from_x(self, x) -> np.ndarray:
        """Fine-lattice index of physical points; off-lattice points raise."""
        a, _ = self.domain
        s = (np.asarray(x, dtype=float) - a) / self.length * self.n_fine
        r = np.rint(s)
        if np.any(np.abs(s - r) > 1e-9 * np.maximum(1.0, np.abs(s))):
            raise OffLatticeError("point is not a node of the finest level")
        return r.astype(np.int64)


def build_uniform(J0: int, domain: Sequence[float], bc: str = "periodic",
                  Jmax: int | None = None, eta: int = 5,
                  unit: float | None = None) -> AdaptiveGrid:
    """Grid with every level-J0 node active.

    ``unit`` fixes the physical length spanned by ``2^J0`` level-J0
    intervals; by default it is the domain length (``2^J0`` intervals over
    ``[a, b]``).  With ``unit=1`` the spacing at level ``J`` is ``2^-J``.
    Non-periodic grids include both end points.
    """
    a, b = float(domain[0]), float(domain[1])
    if not b > a:
        raise InvalidGridError(f"invalid interval [{a}, {b}]")
    Jmax = J0 if Jmax is None else Jmax
    if J0 < 2 or Jmax < J0:
        raise InvalidGridError(f"invalid levels J0={J0}, Jmax={Jmax}")
    bc = _normalise_bc(bc)
    if unit is None:
        n0 = 1 << J0
    else:
        ratio = (b - a) / unit * 2 ** J0
        n0 = int(round(ratio))
        if abs(ratio - n0) > 1e-9 * max(1.0, ratio) or n0 < 1:
            raise InvalidGridError("domain length is not a whole number of level-J0 cells")
    if eta < 2 or (bc != "periodic" and eta > n0 + 1):
        raise InvalidGridError(f"extension order eta={eta} does not fit the grid")
    grid = AdaptiveGrid(J0, Jmax, (a, b), bc, n0, eta, np.zeros(0, dtype=np.int64))
    return AdaptiveGrid(J0, Jmax, (a, b), bc, n0, eta, grid.base_fine())


# -- boundary extension -------------------------------------------------------


@dataclass(frozen=True)
class BoundaryExtension:
    """Lagrange extrapolation of external level-J0 nodes from interior ones.

    ``nodes[n]`` lists the ``eta`` interior level-J0 indices used for the
    external index ``n`` and ``weights[n]`` the matching cardinal values.
    """

    nodes: dict[int, np.ndarray]
    weights: dict[int, np.ndarray]

    def apply(self, n: int, samples: np.ndarray) -> float:
        return float(np.dot(self.weights[n], samples))


def lagrange_weights(x_nodes: np.ndarray, x: float) -> np.ndarray:
    x_nodes = np.asarray(x_nodes, dtype=float)
    w = np.ones(len(x_nodes))
    for k, xk in enumerate(x_nodes):
        for i, xi in enumerate(x_nodes):
            if i != k:
                w[k] *= (x - xi) / (xk - xi)
    return w


def boundary_extension(grid: AdaptiveGrid, basis: ScalingTables) -> BoundaryExtension:
    """Extension data for every external level-J0 index the basis can reach."""
    NL, NR = basis.support
    eta, n0 = grid.eta, grid.n0
    left = np.arange(eta)
    right = np.arange(n0 - eta + 1, n0 + 1)
    nodes, weights = {}, {}
    for n in range(-NR + 1, 0):
        nodes[n], weights[n] = left, lagrange_weights(left, n)
    for n in range(n0 + 1, n0 - NL):
        nodes[n], weights[n] = right, lagrange_weights(right, n)
    return BoundaryExtension(nodes, weights)


# -- operator assembly --------------------------------------------------------


def _ragged(lo: np.ndarray, hi: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Flatten the index ranges ``[lo[i], hi[i])``: returns (owner, index)."""
    counts = np.maximum(hi - lo, 0)
    owner = np.repeat(np.arange(len(lo)), counts)
    if len(owner) == 0:
        return owner, owner
    starts = np.cumsum(counts) - counts
    idx = np.arange(len(owner)) - np.repeat(starts, counts) + np.repeat(lo, counts)
    return owner, idx


def _columns(grid: AdaptiveGrid, basis: ScalingTables):
    """Basis columns: per level, (centres on the fine lattice, column ids).

    On bounded grids the external level-J0 translates get negative column
    ids ``-1 - e`` and are folded into the interior ones afterwards.
    """
    cols = []
    lev = grid.levels
    ext = None
    for J in range(grid.J0, grid.Jmax + 1):
        ids = np.flatnonzero(lev == J)
        centres = grid.fine[ids]
        if J == grid.J0 and not grid.periodic:
            ext = boundary_extension(grid, basis)
            n_ext = np.array(sorted(ext.nodes), dtype=np.int64)
            centres = np.concatenate([centres, n_ext * grid.step0])
            ids = np.concatenate([ids, -1 - np.arange(len(n_ext))])
        if len(ids):
            cols.append((J, centres, ids))
    return cols, ext


def _fold_extension(grid: AdaptiveGrid, ext: BoundaryExtension | None,
                    rows, cols, vals, n_rows: int) -> sp.csr_matrix:
    rows, cols, vals = map(np.concatenate, (rows, cols, vals))
    n = grid.size
    inner = cols >= 0
    M = sp.csr_matrix((vals[inner], (rows[inner], cols[inner])), shape=(n_rows, n))
    if ext is not None and np.any(~inner):
        n_ext = np.array(sorted(ext.nodes), dtype=np.int64)
        E_rows, E_cols, E_vals = [], [], []
        for e, nidx in enumerate(n_ext):
            pos = grid.position(ext.nodes[nidx] * grid.step0)
            E_rows.append(np.full(len(pos), e))
            E_cols.append(pos)
            E_vals.append(ext.weights[nidx])
        E = sp.csr_matrix((np.concatenate(E_vals),
                           (np.concatenate(E_rows), np.concatenate(E_cols))),
                          shape=(len(n_ext), n))
        X = sp.csr_matrix((vals[~inner], (rows[~inner], -1 - cols[~inner])),
                          shape=(n_rows, len(n_ext)))
        M = M + X @ E
    M.sum_duplicates()
    M.eliminate_zeros()
    return M.tocsr()


def _periodic_images(grid: AdaptiveGrid, basis: ScalingTables) -> np.ndarray:
    if not grid.periodic:
        return np.zeros(1, dtype=np.int64)
    NL, NR = basis.support
    w = (NR - NL) // grid.n0 + 1
    return np.arange(-w, w + 1, dtype=np.int64) * grid.n_fine


def _check_depth(grid: AdaptiveGrid, basis: ScalingTables, q: int) -> None:
    if grid.Jmax - grid.J0 + q > basis.depth:
        raise OffLatticeError(
            f"table depth {basis.depth} too shallow for Jmax-J0={grid.Jmax - grid.J0}"
            f" at sub-resolution 2^-{q}")


def point_matrix(grid: AdaptiveGrid, basis: ScalingTables, T: np.ndarray, q: int = 0,
                 derivative: bool = False) -> sp.csr_matrix:
    """Basis values (or x-derivatives) at points ``T`` in units of ``2^-q`` fine cells.

    Row ``i`` applied to the coefficient vector gives the expansion (or its
    derivative) at point ``T[i]``.  ``T`` must be sorted.
    """
    _check_depth(grid, basis, q)
    T = np.asarray(T, dtype=np.int64)
    NL, NR = basis.support
    cols, ext = _columns(grid, basis)
    images = _periodic_images(grid, basis)
    table = basis.dphi if derivative else basis.phi
    rows_l, cols_l, vals_l = [], [], []
    for J, centres, ids in cols:
        S = (1 << (grid.Jmax - J)) << q
        c = (centres[None, :] + images[:, None]).ravel() << q
        cid = np.tile(ids, len(images))
        lo = np.searchsorted(T, c + NL * S, side="right")
        hi = np.searchsorted(T, c + NR * S, side="left")
        owner, r = _ragged(lo, hi)
        if len(r) == 0:
            continue
        v = table(T[r] - c[owner], grid.Jmax - J + q)
        if derivative:
            v = v / grid.spacing(J)
        rows_l.append(r)
        cols_l.append(cid[owner])
        vals_l.append(v)
    if not rows_l:
        return sp.csr_matrix((len(T), grid.size))
    return _fold_extension(grid, ext, rows_l, cols_l, vals_l, len(T))


def interval_matrix(grid: AdaptiveGrid, basis: ScalingTables, L: np.ndarray,
                    R: np.ndarray, q: int) -> sp.csr_matrix:
    """Mean of each basis function over ``[L_i, R_i]`` (units of ``2^-q`` fine cells)."""
    _check_depth(grid, basis, q)
    L = np.asarray(L, dtype=np.int64)
    R = np.asarray(R, dtype=np.int64)
    NL, NR = basis.support
    cols, ext = _columns(grid, basis)
    images = _periodic_images(grid, basis)
    order = np.argsort(L, kind="stable")
    Ls, Rs = L[order], R[order]
    width = int(np.max(R - L)) if len(L) else 0
    rows_l, cols_l, vals_l = [], [], []
    for J, centres, ids in cols:
        shift = grid.Jmax - J + q
        S = 1 << shift
        c = (centres[None, :] + images[:, None]).ravel() << q
        cid = np.tile(ids, len(images))
        lo = np.searchsorted(Ls, c + NL * S - width, side="right")
        hi = np.searchsorted(Ls, c + NR * S, side="left")
        owner, r = _ragged(lo, hi)
        if len(r) == 0:
            continue
        dtheta = basis.theta(Rs[r] - c[owner], shift) - basis.theta(Ls[r] - c[owner], shift)
        keep = dtheta != 0.0
        r, owner, dtheta = r[keep], owner[keep], dtheta[keep]
        rows_l.append(order[r])
        cols_l.append(cid[owner])
        vals_l.append(dtheta * S / (Rs[r] - Ls[r]))
    if not rows_l:
        return sp.csr_matrix((len(L), grid.size))
    return _fold_extension(grid, ext, rows_l, cols_l, vals_l, len(L))


class Operators:
    """Collocation operators of one basis on one frozen grid.

    Holds the strictly lower (coarser-level) part of the collocation matrix,
    split by level for the ascending transform, and the derivative matrix
    mapping coefficients to nodal derivatives.
    """

    def __init__(self, grid: AdaptiveGrid, basis: ScalingTables):
        self.grid = grid
        self.basis = basis
        B = point_matrix(grid, basis, grid.fine)
        lev = grid.levels
        B = B.tocoo()
        strict = lev[B.col] < lev[B.row]
        self.lower = sp.csr_matrix((B.data[strict], (B.row[strict], B.col[strict])),
                                   shape=B.shape)
        self.level_rows = []
        for J in range(grid.J0 + 1, grid.Jmax + 1):
            rows = np.flatnonzero(lev == J)
            if len(rows):
                self.level_rows.append((rows, self.lower[rows]))
        self._deriv: sp.csr_matrix | None = None
        self._means: dict[tuple[bytes, bytes, int], sp.csr_matrix] = {}

    @property
    def derivative(self) -> sp.csr_matrix:
        if self._deriv is None:
            self._deriv = point_matrix(self.grid, self.basis, self.grid.fine,
                                       derivative=True)
        return self._deriv

    def interval_means(self, L: np.ndarray, R: np.ndarray, q: int) -> sp.csr_matrix:
        """Cached :func:`interval_matrix` for this grid and basis."""
        key = (L.tobytes(), R.tobytes(), q)
        M = self._means.get(key)
        if M is None:
            if len(self._means) > 8:
                self._means.clear()
            M = self._means[key] = interval_matrix(self.grid, self.basis, L, R, q)
        return M

    def transform(self, values: np.ndarray) -> np.ndarray:
        """Nodal values -> coefficients, ascending from the basic level."""
        coef = np.array(values, dtype=float, copy=True)
        for rows, block in self.level_rows:
            coef[rows] = coef[rows] - block @ coef
        return coef

    def inverse(self, coef: np.ndarray) -> np.ndarray:
        """Coefficients -> nodal values."""
        return coef + self.lower @ coef

    def differentiate(self, coef: np.ndarray) -> np.ndarray:
        return self.derivative @ coef


_OPS_CACHE: dict = {}


def operators(grid: AdaptiveGrid, basis: ScalingTables) -> Operators:
    """Cached :class:`Operators`; grids with identical node sets share them."""
    key = (grid.J0, grid.Jmax, grid.domain, grid.bc, grid.n0, grid.eta, grid.key,
           id(basis))
    ops = _OPS_CACHE.get(key)
    if ops is None:
        if len(_OPS_CACHE) > 64:
            _OPS_CACHE.clear()
        ops = _OPS_CACHE[key] = Operators(grid, basis)
    return ops


# -- coefficients ---------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class CoefficientSet:
    """Expansion coefficients aligned with ``grid.fine``.

    Entries at level-J0 nodes are the scaling coefficients ``c``; all other
    entries are wavelet coefficients ``d``.
    """

    grid: AdaptiveGrid
    values: np.ndarray

    @property
    def detail_mask(self) -> np.ndarray:
        return self.grid.levels > self.grid.J0

    @property
    def c(self) -> dict[tuple[int, int], float]:
        return self._as_map(~self.detail_mask)

    @property
    def d(self) -> dict[tuple[int, int], float]:
        return self._as_map(self.detail_mask)

    def _as_map(self, mask):
        lev = self.grid.levels[mask]
        idx = self.grid.level_index()[mask]
        return {(int(J), int(k)): v for J, k, v in zip(lev, idx, self.values[mask])}


def _as_values(grid: AdaptiveGrid, values) -> np.ndarray:
    values = np.asarray(values, dtype=float)
    if values.shape[0] != grid.size or np.any(~np.isfinite(values)):
        raise MissingValueError(
            f"field has {values.shape[0]} entries for {grid.size} active nodes")
    return values


def forward_transform(grid: AdaptiveGrid, values, basis: ScalingTables) -> CoefficientSet:
    """Coefficients of the nodal field, computed level by level from ``J0``.

    At each node above ``J0`` the wavelet coefficient is the nodal value minus
    the prediction of the coarser expansion there; parents missing from the
    active set are evaluated from the coarser expansion rather than sampled.
    """
    return CoefficientSet(grid, operators(grid, basis).transform(_as_values(grid, values)))


def evaluate(grid: AdaptiveGrid, coeffs: CoefficientSet, basis: ScalingTables, x):
    """Evaluate the expansion at dyadic points ``x`` of the domain.

    Points must lie on the tabulation lattice (``2^-depth`` of a level-J0
    cell); anything else raises :class:`OffLatticeError`.
    """
    scalar = np.ndim(x) == 0
    x = np.atleast_1d(np.asarray(x, dtype=float))
    a, b = grid.domain
    if np.any(x < a - 1e-12 * grid.length) or np.any(x > b + 1e-12 * grid.length):
        raise ValueError("evaluation point outside the domain")
    q = basis.depth - (grid.Jmax - grid.J0)
    s = (x - a) / grid.length * (grid.n_fine << q)
    T = np.rint(s)
    if np.any(np.abs(s - T) > 1e-9 * np.maximum(1.0, np.abs(s))):
        raise OffLatticeError("point is not on the tabulation lattice")
    T = T.astype(np.int64)
    if grid.periodic:
        T = np.mod(T, grid.n_fine << q)
    order = np.argsort(T, kind="stable")
    M = point_matrix(grid, basis, T[order], q)
    out = np.empty((len(T),) + coeffs.values.shape[1:])
    out[order] = M @ coeffs.values
    return out[0] if scalar else out


def threshold(coeffs: CoefficientSet, eps: float) -> np.ndarray:
    """Fine indices of the nodes above ``J0`` whose coefficient exceeds ``eps``.

    For multi-component coefficients the first component decides.
    """
    if eps <= 0:
        raise ValueError("threshold must be positive")
    v = coeffs.values if coeffs.values.ndim == 1 else coeffs.values[:, 0]
    hit = coeffs.detail_mask & (np.abs(v) > eps)
    return coeffs.grid.fine[hit]


# -- snapshots ------------------------------------------------------------------


def write_snapshot(path, grid: AdaptiveGrid, values, names: Sequence[str] | None = None) -> None:
    """CSV with ``level,index,x,value[,component...]``, one row per node, by x."""
    values = np.asarray(values, dtype=float)
    vals2 = values[:, None] if values.ndim == 1 else values
    if names is None:
        names = ["value"] + [f"component{i}" for i in range(1, vals2.shape[1])]
    order = np.argsort(grid.x, kind="stable")
    lev, idx = grid.levels, grid.level_index()
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["level", "index", "x", *names])
        for i in order:
            w.writerow([int(lev[i]), int(idx[i]), f"{grid.x[i]:.17g}",
                        *(f"{v:.17g}" for v in vals2[i])])


def read_snapshot(path) -> dict[str, np.ndarray]:
    with open(path, newline="") as fh:
        r = csv.reader(fh)
        header = next(r)
        rows = [list(map(float, row)) for row in r]
    arr = np.array(rows).reshape(-1, len(header))
    return {name: arr[:, i] for i, name in enumerate(header)}
