"""Asymmetric interpolating scaling functions with an upwind bias.

A filter bank is built from Lagrange cardinal values on a shifted stencil
(odd taps) plus the interpolation constraint (even taps).  From the bank the
scaling function, its first derivative and its primitive are tabulated on a
dyadic lattice by the cascade algorithm, so every later evaluation is a plain
table lookup.

    >>> bank = compute_filter_coefficients(5, "positive")
    >>> float(bank.h[1])
    0.703125
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Literal

import numpy as np

Orientation = Literal["positive", "negative"]

DEFAULT_DEPTH = 10


class InvalidOrderError(ValueError):
    """Raised for a wavelet order the stencil policy cannot support."""


class DegenerateFilterError(RuntimeError):
    """Raised when the derivative eigenproblem has no unique solution."""


class OffLatticeError(ValueError):
    """Raised when an argument does not fall on the tabulation lattice."""


@dataclass(frozen=True)
class FilterBank:
    """Two-scale refinement coefficients ``h[l]`` of one orientation."""

    N: int
    orientation: Orientation
    h: dict[int, float]
    exact: dict[int, Fraction] = field(repr=False, compare=False)

    @property
    def support(self) -> tuple[int, int]:
        nz = [l for l, v in self.exact.items() if v != 0]
        return min(nz), max(nz)

    def array(self) -> tuple[int, np.ndarray]:
        """Return ``(first_index, dense coefficient array)`` over the support."""
        lo, hi = self.support
        return lo, np.array([self.h.get(l, 0.0) for l in range(lo, hi + 1)])


def _left_count(N: int, left: int | None) -> int:
    return (N + 1) // 2 if left is None else left


def compute_filter_coefficients(
    N: int, orientation: Orientation = "positive", left: int | None = None
) -> FilterBank:
    """Filter bank of the order-``N`` upwind interpolating wavelet.

    The positive bank predicts the half-integer point ``m + 1/2`` from the
    ``N`` integer nodes ``m - left + 1, ..., m + N - left``; by default
    ``left = ceil(N/2)`` so the stencil leans to the left.  The negative bank
    is the mirror image.  Coefficients are computed in exact rationals.
    """
    if orientation not in ("positive", "negative"):
        raise ValueError(f"unknown orientation {orientation!r}")
    if N < 3:
        raise InvalidOrderError(f"order N={N} must be at least 3")
    nl = _left_count(N, left)
    if left is None and N % 2 == 0:
        # the default stencil is centred for even N: no upwind bias
        raise InvalidOrderError(f"even order N={N} is not supported by the upwind stencil")
    if not 1 <= nl <= N - 1:
        raise InvalidOrderError(f"left count {nl} outside 1..{N - 1}")

    exact: dict[int, Fraction] = {0: Fraction(1)}
    # node 0 belongs to the stencil of m+1/2 iff m-nl+1 <= 0 <= m+N-nl
    for m in range(nl - N, nl):
        nodes = range(m - nl + 1, m + N - nl + 1)
        x = Fraction(2 * m + 1, 2)
        val = Fraction(1)
        for i in nodes:
            if i != 0:
                val *= (x - i) / (0 - i)
        exact[2 * m + 1] = val
    if orientation == "negative":
        exact = {-l: v for l, v in exact.items()}
    exact = dict(sorted(exact.items()))
    return FilterBank(N, orientation, {l: float(v) for l, v in exact.items()}, exact)


def _refine(prev: np.ndarray, hlo: int, harr: np.ndarray, NL: int, d: int,
            factor: float, tail: float = 0.0) -> np.ndarray:
    """One cascade step from lattice 2^-(d-1) to 2^-d over the support.

    ``tail`` is the value assumed to the right of the support (used by the
    primitive, which is 1 there); to the left everything is zero.
    """
    n = (len(prev) - 1) * 2 + 1
    out = np.zeros(n)
    j = np.arange(n)
    for off, hk in enumerate(harr):
        if hk == 0.0:
            continue
        k = hlo + off
        src = j + (NL - k) * 2 ** (d - 1)
        inside = (src >= 0) & (src < len(prev))
        out[inside] += hk * prev[src[inside]]
        out[src >= len(prev)] += hk * tail
    out *= factor
    # points already on the coarser lattice keep their values: recomputing
    # them would amplify round-off by ``factor`` at every level
    out[::2] = prev
    return out


def cascade_evaluate(bank: FilterBank, depth: int) -> np.ndarray:
    """Values of the scaling function at ``N_L + j 2^-depth`` over the support."""
    if depth < 0:
        raise ValueError("depth must be non-negative")
    NL, NR = bank.support
    hlo, harr = bank.array()
    v = np.zeros(NR - NL + 1)
    v[-NL] = 1.0
    for d in range(1, depth + 1):
        v = _refine(v, hlo, harr, NL, d, 1.0)
    return v


def _solve_exact(rows: list[list[Fraction]], rhs: list[Fraction]) -> list[Fraction] | None:
    """Gauss-Jordan on a consistent (possibly overdetermined) rational system.

    Returns ``None`` when the solution is not unique or the system is
    inconsistent.
    """
    n = len(rows[0])
    M = [list(r) + [b] for r, b in zip(rows, rhs)]
    piv_row = 0
    for col in range(n):
        p = next((r for r in range(piv_row, len(M)) if M[r][col] != 0), None)
        if p is None:
            return None
        M[piv_row], M[p] = M[p], M[piv_row]
        pv = M[piv_row][col]
        M[piv_row] = [v / pv for v in M[piv_row]]
        for r in range(len(M)):
            if r != piv_row and M[r][col] != 0:
                f = M[r][col]
                M[r] = [a - f * b for a, b in zip(M[r], M[piv_row])]
        piv_row += 1
    if any(M[r][n] != 0 for r in range(piv_row, len(M))):
        return None
    return [M[r][n] for r in range(n)]


def _integer_derivatives(bank: FilterBank) -> list[Fraction]:
    NL, NR = bank.support
    idx = list(range(NL, NR + 1))
    zero = Fraction(0)
    rows = [[2 * bank.exact.get(2 * i - j, zero) - (1 if i == j else 0) for j in idx]
            for i in idx]
    rows.append([Fraction(k) for k in idx])
    sol = _solve_exact(rows, [zero] * len(idx) + [Fraction(-1)])
    if sol is None:
        raise DegenerateFilterError(
            f"eigenvalue 1/2 is not simple for N={bank.N} ({bank.orientation})")
    return sol


def scaling_derivatives(bank: FilterBank, depth: int) -> np.ndarray:
    """First derivative of the scaling function on the depth-``depth`` lattice.

    Integer values solve ``v = 2 A v`` with ``A[i, j] = h[2i - j]``, scaled so
    that ``sum_k k v[k] = -1`` (differentiated linear reproduction).  The
    integer system is solved in exact rationals; dyadic values follow from
    the cascade with the chain-rule factor 2.
    """
    NL, _ = bank.support
    v = np.array([float(x) for x in _integer_derivatives(bank)])
    hlo, harr = bank.array()
    for d in range(1, depth + 1):
        v = _refine(v, hlo, harr, NL, d, 2.0)
    return v


def scaling_primitives(bank: FilterBank, depth: int) -> np.ndarray:
    """Primitive ``Theta(x) = int_{N_L}^x phi`` on the depth-``depth`` lattice.

    Integer values solve ``Theta(i) = sum_k h_k/2 Theta(2i - k)`` with
    ``Theta = 0`` left of the support and ``1`` right of it.
    """
    NL, NR = bank.support
    idx = list(range(NL, NR + 1))
    half = Fraction(1, 2)
    rows = [[Fraction(1 if i == j else 0) for j in idx] for i in idx]
    rhs = [Fraction(0)] * len(idx)
    for a, i in enumerate(idx):
        for l, hl in bank.exact.items():
            y = 2 * i - l
            if y > NR:
                rhs[a] += half * hl
            elif y >= NL:
                rows[a][y - NL] -= half * hl
    sol = _solve_exact(rows, rhs)
    if sol is None:
        raise DegenerateFilterError("primitive system is singular")
    theta = np.array([float(x) for x in sol])
    hlo, harr = bank.array()
    for d in range(1, depth + 1):
        theta = _refine(theta, hlo, harr, NL, d, 0.5, tail=1.0)
    return theta


@dataclass(frozen=True)
class ScalingTables:
    """Scaling function, derivative and primitive tabulated at ``2^-depth``.

    Entry ``j`` of each table belongs to ``x = N_L + j / 2**depth``.  The
    lookup helpers take arguments as integer numerators over ``2**shift``
    (``shift <= depth``) so that no floating-point rounding enters the
    indexing.  Outside the support ``phi`` and ``dphi`` are zero while
    ``theta`` is 0 on the left and 1 on the right.
    """

    filter: FilterBank
    depth: int
    values: np.ndarray
    derivatives: np.ndarray
    primitives: np.ndarray

    @property
    def N(self) -> int:
        return self.filter.N

    @property
    def orientation(self) -> Orientation:
        return self.filter.orientation

    @property
    def support(self) -> tuple[int, int]:
        return self.filter.support

    def _index(self, num, shift: int) -> np.ndarray:
        if shift > self.depth:
            raise OffLatticeError(f"lattice 2^-{shift} finer than table depth {self.depth}")
        NL, _ = self.support
        return np.asarray(num, dtype=np.int64) * 2 ** (self.depth - shift) - NL * 2 ** self.depth

    def _lookup(self, table: np.ndarray, num, shift: int, right: float) -> np.ndarray:
        j = self._index(num, shift)
        out = np.zeros(j.shape)
        inside = (j >= 0) & (j < len(table))
        out[inside] = table[j[inside]]
        out[j >= len(table)] = right
        return out

    def phi(self, num, shift: int = 0) -> np.ndarray:
        return self._lookup(self.values, num, shift, 0.0)

    def dphi(self, num, shift: int = 0) -> np.ndarray:
        return self._lookup(self.derivatives, num, shift, 0.0)

    def theta(self, num, shift: int = 0) -> np.ndarray:
        return self._lookup(self.primitives, num, shift, 1.0)

    def to_lattice(self, x) -> np.ndarray:
        """Integer numerators of ``x`` on the ``2^-depth`` lattice.

        Raises :class:`OffLatticeError` when ``x`` is not representable.
        """
        s = np.asarray(x, dtype=float) * 2.0 ** self.depth
        r = np.rint(s)
        if np.any(np.abs(s - r) > 1e-9 * np.maximum(1.0, np.abs(s))):
            raise OffLatticeError("argument not on the tabulation lattice")
        return r.astype(np.int64)

    def abscissae(self) -> np.ndarray:
        NL, _ = self.support
        return NL + np.arange(len(self.values)) / 2.0 ** self.depth

    def derivative_stencil(self) -> dict[int, float]:
        """``phi'(m)`` at the integers; the uniform-grid differentiation weights."""
        NL, NR = self.support
        m = np.arange(NL, NR + 1)
        vals = self.dphi(m)
        return {int(k): float(v) for k, v in zip(m, vals) if v != 0.0}


WaveletBasis = ScalingTables


def make_basis(N: int, orientation: Orientation = "positive",
               depth: int = DEFAULT_DEPTH, left: int | None = None) -> ScalingTables:
    """Build the filter bank and all three tables for one orientation."""
    if depth < 1:
        raise ValueError("depth must be at least 1")
    bank = compute_filter_coefficients(N, orientation, left)
    return ScalingTables(
        filter=bank,
        depth=depth,
        values=cascade_evaluate(bank, depth),
        derivatives=scaling_derivatives(bank, depth),
        primitives=scaling_primitives(bank, depth),
    )


_PAIR_CACHE: dict[tuple[int, int, int | None], tuple[ScalingTables, ScalingTables]] = {}


def basis_pair(N: int, depth: int = DEFAULT_DEPTH,
               left: int | None = None) -> tuple[ScalingTables, ScalingTables]:
    """(positive, negative) bases; cached since the tables are immutable."""
    key = (N, depth, left)
    if key not in _PAIR_CACHE:
        _PAIR_CACHE[key] = (make_basis(N, "positive", depth, left),
                            make_basis(N, "negative", depth, left))
    return _PAIR_CACHE[key]


def export_basis(tables: ScalingTables, path) -> None:
    """Write a bank and its tables as plain text.

    Layout: header ``N orientation depth``, then one ``# name`` line per
    array followed by ``index value`` rows (17 significant digits).  For the
    filter, ``index`` is the tap ``l``; for the tables it is the lattice
    numerator ``k`` of ``x = k / 2**depth``.
    """
    NL, _ = tables.support
    offset = NL * 2 ** tables.depth
    with open(path, "w") as fh:
        fh.write(f"{tables.N} {tables.orientation} {tables.depth}\n")
        fh.write("# filter\n")
        for l, v in tables.filter.h.items():
            fh.write(f"{l} {v:.17g}\n")
        for name, arr in (("values", tables.values),
                          ("derivatives", tables.derivatives),
                          ("primitives", tables.primitives)):
            fh.write(f"# {name}\n")
            for j, v in enumerate(arr):
                fh.write(f"{j + offset} {v:.17g}\n")


def load_basis_export(path) -> dict:
    """Read a file written by :func:`export_basis` back into arrays."""
    out: dict = {}
    with open(path) as fh:
        N, orientation, depth = fh.readline().split()
        out["N"], out["orientation"], out["depth"] = int(N), orientation, int(depth)
        current = None
        rows: dict[str, list] = {}
        for line in fh:
            if line.startswith("#"):
                current = line[1:].strip()
                rows[current] = []
            elif line.strip():
                i, v = line.split()
                rows[current].append((int(i), float(v)))
    for name, r in rows.items():
        out[name] = dict(r) if name == "filter" else np.array([v for _, v in r])
    return out
