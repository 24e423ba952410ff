"""The full swap neighbourhood as an ``m x 4`` table of flip tuples.

Row ``i`` belongs to a fixed pair of blocks ``(a, b)`` with ``a < b`` and
holds ``(z1, z2, z3, z4)`` where ``z1 = support[a]`` and ``z2 = support[b]``.
Because the support is indexed by block, ``z1 < z2`` always holds and the
block-pair order coincides with the lexicographic order of ``(z1, z2)``.
A move only rewrites the ``2n - 3`` rows touching its two blocks and never
changes which block pair a row belongs to, so the table stays sorted
without any reordering.

The row table is the sparse form of two 0/1 matrices with two set bits per
row: ``S12`` marks ``z1, z2`` and ``S34`` marks ``z3, z4``. :class:`SMatrices`
keeps those dense matrices for small ``n`` and updates them element-wise.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import comb

import numpy as np

from .errors import InfeasibleSolution, PairNotInNeighbourhood
from .feasible_core import BinarySolution, FlipTuple, is_feasible


def pair_index(a: int, b: int, n: int) -> int:
    """Row of block pair ``(a, b)``, ``a < b``, in lexicographic order."""
    return a * (2 * n - a - 1) // 2 + (b - a - 1)


def _pair_tables(n: int) -> tuple[np.ndarray, np.ndarray]:
    pairs = np.array([(a, b) for a in range(n) for b in range(a + 1, n)],
                     dtype=np.int64).reshape(-1, 2)
    # block_rows[a] lists the n-1 rows involving block a, ascending; the other
    # block of those rows is also ascending
    block_rows = np.empty((n, n - 1), dtype=np.int64)
    for a in range(n):
        others = [c for c in range(n) if c != a]
        block_rows[a] = [pair_index(min(a, c), max(a, c), n) for c in others]
    return pairs, block_rows


@dataclass
class UpdateRowSets:
    R1: np.ndarray
    R2: np.ndarray
    R3: np.ndarray

    def all(self) -> np.ndarray:
        return np.concatenate([self.R1, self.R2, self.R3])


class FullNeighbourhood:
    def __init__(self, n: int, rows: np.ndarray, support: np.ndarray,
                 pairs: np.ndarray | None = None, block_rows: np.ndarray | None = None):
        self.n = n
        self.rows = rows
        self.support = support
        if pairs is None or block_rows is None:
            pairs, block_rows = _pair_tables(n)
        self.pairs = pairs
        self.block_rows = block_rows

    def __len__(self) -> int:
        return self.rows.shape[0]

    def __getitem__(self, i: int) -> FlipTuple:
        return FlipTuple(*(int(v) for v in self.rows[i]))

    def tuples(self) -> list[FlipTuple]:
        return [self[i] for i in range(len(self))]

    def copy(self) -> "FullNeighbourhood":
        return FullNeighbourhood(self.n, self.rows.copy(), self.support.copy(),
                                 self.pairs, self.block_rows)

    @property
    def z1(self):
        return self.rows[:, 0]

    @property
    def z2(self):
        return self.rows[:, 1]

    @property
    def z3(self):
        return self.rows[:, 2]

    @property
    def z4(self):
        return self.rows[:, 3]

    def is_sorted(self) -> bool:
        key = self.rows[:, 0] * (self.n * self.n) + self.rows[:, 1]
        return bool(np.all(np.diff(key) > 0))

    def dump(self) -> str:
        return "\n".join(f"{i}: {r[0]} {r[1]} {r[2]} {r[3]}" for i, r in enumerate(self.rows.tolist()))

    def s_matrices(self) -> "SMatrices":
        return SMatrices.from_neighbourhood(self)


def _fill_rows(rows: np.ndarray, idx: np.ndarray, pairs: np.ndarray,
               support: np.ndarray, n: int) -> None:
    z1 = support[pairs[idx, 0]]
    z2 = support[pairs[idx, 1]]
    rows[idx, 0] = z1
    rows[idx, 1] = z2
    rows[idx, 2] = (z2 // n) * n + z1 % n
    rows[idx, 3] = (z1 // n) * n + z2 % n


def build_full_neighbourhood(x: BinarySolution) -> FullNeighbourhood:
    n = x.n
    if not is_feasible(x.bits, n) or not np.array_equal(np.flatnonzero(x.bits), x.support):
        raise InfeasibleSolution("neighbourhood needs a feasible solution")
    pairs, block_rows = _pair_tables(n)
    rows = np.empty((comb(n, 2), 4), dtype=np.int64)
    support = x.support.astype(np.int64).copy()
    _fill_rows(rows, np.arange(rows.shape[0]), pairs, support, n)
    return FullNeighbourhood(n, rows, support, pairs, block_rows)


def _blocks_of(fn: FullNeighbourhood, zb1: int, zb2: int) -> tuple[int, int, int]:
    n = fn.n
    zb1, zb2 = int(zb1), int(zb2)
    if zb1 > zb2:
        zb1, zb2 = zb2, zb1
    a, b = zb1 // n, zb2 // n
    if not (0 <= zb1 and zb2 < n * n) or a == b or fn.support[a] != zb1 or fn.support[b] != zb2:
        raise PairNotInNeighbourhood(f"({zb1}, {zb2}) is not the leading pair of any row")
    return a, b, pair_index(a, b, n)


def locate_update_rows(fn: FullNeighbourhood, zb1: int, zb2: int) -> UpdateRowSets:
    """Rows whose leading pair holds only ``zb1``, only ``zb2``, or both."""
    a, b, r3 = _blocks_of(fn, zb1, zb2)
    ra = fn.block_rows[a]
    rb = fn.block_rows[b]
    return UpdateRowSets(ra[ra != r3], rb[rb != r3], np.array([r3], dtype=np.int64))


def locate_update_rows_scan(fn: FullNeighbourhood, zb1: int, zb2: int) -> UpdateRowSets:
    """Reference implementation scoring every row against the two bits."""
    a, b, _ = _blocks_of(fn, zb1, zb2)
    lo, hi = fn.support[a], fn.support[b]
    lead = fn.rows[:, :2]
    score = (lead == lo).any(axis=1) * 1 + (lead == hi).any(axis=1) * 2
    return UpdateRowSets(np.flatnonzero(score == 1), np.flatnonzero(score == 2),
                         np.flatnonzero(score == 3))


def update_full_neighbourhood(fn: FullNeighbourhood, zb1: int, zb2: int,
                              inplace: bool = True) -> FullNeighbourhood:
    """Apply the accepted move on ``(zb1, zb2)`` to the table.

    ``zb1`` becomes ``z1* = block(zb1)*n + zb2 % n`` and ``zb2`` becomes
    ``z2* = block(zb2)*n + zb1 % n``; the third and fourth entries of the
    touched rows follow from the flip rule.
    """
    a, b, _ = _blocks_of(fn, zb1, zb2)
    out = fn if inplace else fn.copy()
    n = fn.n
    lo, hi = int(out.support[a]), int(out.support[b])
    out.support[a] = a * n + hi % n
    out.support[b] = b * n + lo % n
    # the shared row appears in both lists; rewriting it twice is harmless
    touched = np.concatenate((out.block_rows[a], out.block_rows[b]))
    _fill_rows(out.rows, touched, out.pairs, out.support, n)
    return out


@dataclass
class SMatrices:
    """Dense ``S12`` / ``S34`` incidence matrices (``m x n^2``, int8)."""

    n: int
    S12: np.ndarray
    S34: np.ndarray

    @classmethod
    def from_neighbourhood(cls, fn: FullNeighbourhood) -> "SMatrices":
        m, N = len(fn), fn.n * fn.n
        S12 = np.zeros((m, N), dtype=np.int8)
        S34 = np.zeros((m, N), dtype=np.int8)
        r = np.arange(m)
        S12[r, fn.z1] = 1
        S12[r, fn.z2] = 1
        S34[r, fn.z3] = 1
        S34[r, fn.z4] = 1
        return cls(fn.n, S12, S34)

    def copy(self) -> "SMatrices":
        return SMatrices(self.n, self.S12.copy(), self.S34.copy())

    def row_sets(self, zb1: int, zb2: int) -> UpdateRowSets:
        """Classify rows via ``S12 @ b`` with ``b`` scoring the two bits 1 and 2."""
        b = np.zeros(self.n * self.n, dtype=np.int64)
        b[min(zb1, zb2)] = 1
        b[max(zb1, zb2)] = 2
        score = self.S12 @ b
        if not (score == 3).any():
            raise PairNotInNeighbourhood(f"({zb1}, {zb2}) is not the leading pair of any row")
        return UpdateRowSets(np.flatnonzero(score == 1), np.flatnonzero(score == 2),
                             np.flatnonzero(score == 3))

    def update(self, zb1: int, zb2: int) -> None:
        """Element-wise update of both matrices for the move on ``(zb1, zb2)``."""
        n = self.n
        zb1, zb2 = sorted((int(zb1), int(zb2)))
        sets = self.row_sets(zb1, zb2)
        a, b = zb1 // n, zb2 // n
        z1s = a * n + zb2 % n
        z2s = b * n + zb1 % n
        # S12: the cleared bit of each touched row moves to its new position
        self.S12[sets.R1, zb1] = 0
        self.S12[sets.R1, z1s] = 1
        self.S12[sets.R2, zb2] = 0
        self.S12[sets.R2, z2s] = 1
        r3 = sets.R3
        self.S12[r3, [zb1, zb2]] = 0
        self.S12[r3, [z1s, z2s]] = 1
        # S34: in the other block c of each touched row the set bit moves
        # between residues zb1 % n and zb2 % n
        c = np.array([k for k in range(n) if k not in (a, b)], dtype=np.int64)
        c1 = n * c + zb1 % n
        c2 = n * c + zb2 % n
        for rows in (sets.R1, sets.R2):
            v1 = self.S34[rows, c1].copy()
            self.S34[rows, c1] = self.S34[rows, c2]
            self.S34[rows, c2] = v1
        self.S34[r3, [zb1, zb2]] = 1
        self.S34[r3, [z1s, z2s]] = 0
