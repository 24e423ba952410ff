"""Permutations, their binary encodings, and the quadruple bit-flip move.

A feasible binary solution is the column stack of a permutation matrix:
``bits[j*n + s[j]] = 1``. Swapping two entries of ``s`` clears two bits and
sets two others, which is the only kind of move used by the search.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import (
    DimensionMismatch,
    InfeasibleSolution,
    ModeUnsupportedForInstance,
    NotAPermutation,
    SameBlockOrResidue,
    TupleNotApplicable,
)
from .instance_io import Instance
from .qubo_model import QOperator


def check_permutation(perm, n: int | None = None) -> np.ndarray:
    p = np.asarray(perm, dtype=np.int64)
    if p.ndim != 1 or (n is not None and p.size != n):
        raise DimensionMismatch(f"expected a length-{n} permutation, got shape {p.shape}")
    if not np.array_equal(np.sort(p), np.arange(p.size)):
        raise NotAPermutation(f"{p.tolist()} is not a permutation")
    return p


@dataclass
class BinarySolution:
    """Bit vector plus the cached sorted support (one index per block)."""

    bits: np.ndarray
    support: np.ndarray

    @property
    def n(self) -> int:
        return self.support.size

    def copy(self) -> "BinarySolution":
        return BinarySolution(self.bits.copy(), self.support.copy())

    def layout(self) -> np.ndarray:
        """The permutation ``s`` with ``support[j] = j*n + s[j]``."""
        return self.support % self.n


def to_binary(perm) -> BinarySolution:
    p = check_permutation(perm)
    n = p.size
    support = np.arange(n, dtype=np.int64) * n + p
    bits = np.zeros(n * n, dtype=np.int8)
    bits[support] = 1
    return BinarySolution(bits, support)


def to_permutation(x: BinarySolution) -> np.ndarray:
    return x.layout().copy()


def is_feasible(bits, n: int) -> bool:
    """Both one-hot families hold for a length-``n*n`` 0/1 vector."""
    b = np.asarray(bits)
    if b.shape != (n * n,) or not np.isin(b, (0, 1)).all():
        return False
    X = b.reshape(n, n)
    return bool((X.sum(axis=1) == 1).all() and (X.sum(axis=0) == 1).all())


def from_bits(bits) -> BinarySolution:
    b = np.asarray(bits, dtype=np.int8)
    n = int(round(np.sqrt(b.size)))
    if not is_feasible(b, n):
        raise InfeasibleSolution("bit vector is not a permutation-matrix column stack")
    return BinarySolution(b.copy(), np.flatnonzero(b).astype(np.int64))


class FlipTuple(NamedTuple):
    z1: int
    z2: int
    z3: int
    z4: int

    def reversed(self, n: int) -> "FlipTuple":
        """The tuple that undoes this flip on the resulting solution."""
        return make_tuple(self.z3, self.z4, n)


def identify_bits_to_flip(z1: int, z2: int, n: int) -> tuple[int, int]:
    """The two bits that must be set when ``z1`` and ``z2`` are cleared."""
    z1 = int(z1)
    z2 = int(z2)
    if z1 // n == z2 // n or z1 % n == z2 % n:
        raise SameBlockOrResidue(f"bits {z1} and {z2} share a block or residue (n={n})")
    return (z2 // n) * n + z1 % n, (z1 // n) * n + z2 % n


def make_tuple(z1: int, z2: int, n: int) -> FlipTuple:
    a, b = (z1, z2) if z1 < z2 else (z2, z1)
    return FlipTuple(int(a), int(b), *identify_bits_to_flip(a, b, n))


def apply_quadruple_flip(x: BinarySolution, t: FlipTuple, inplace: bool = False) -> BinarySolution:
    """Clear ``z1, z2`` and set ``z3, z4``."""
    n = x.n
    z1, z2, z3, z4 = (int(v) for v in t)
    if (z3, z4) != identify_bits_to_flip(z1, z2, n):
        raise TupleNotApplicable(f"{tuple(t)} violates the block rule for n={n}")
    b1, b2 = z1 // n, z2 // n
    if x.support[b1] != z1 or x.support[b2] != z2:
        raise TupleNotApplicable(f"bits {z1}, {z2} are not both set")
    y = x if inplace else x.copy()
    y.bits[[z1, z2]] = 0
    y.bits[[z3, z4]] = 1
    y.support[b1] = z4
    y.support[b2] = z3
    return y


def swap_layout(layout, a: int, b: int) -> np.ndarray:
    s = np.array(layout, dtype=np.int64)
    s[a], s[b] = s[b], s[a]
    return s


def objective(instance: Instance, perm) -> float:
    p = check_permutation(perm, instance.n)
    return float(np.sum(instance.F * instance.D[np.ix_(p, p)]))


def objective_binary(Q: QOperator, x: BinarySolution | np.ndarray) -> float:
    bits = x.bits if isinstance(x, BinarySolution) else np.asarray(x)
    if bits.shape != (Q.size,):
        raise DimensionMismatch(f"bit vector of length {bits.shape} for n={Q.n}")
    return Q.quadratic(bits)


def exact_pair_difference(Q: QOperator, x: BinarySolution, t: FlipTuple,
                          mode: str = "general") -> float:
    """``y^T Q y - x^T Q x`` for the flip ``t``, by one of three closed forms.

    ``general`` works for any ``Q``; ``symmetrized`` requires ``Q = Q^T``;
    ``semisymmetric`` additionally needs ``Q(z1, z2) = Q(z4, z3)``, which
    holds when the right Kronecker factor is symmetric.
    """
    z1, z2, z3, z4 = (int(v) for v in t)
    xb = x.bits.astype(float)
    yb = xb.copy()
    yb[[z1, z2]] = 0.0
    yb[[z3, z4]] = 1.0
    e = Q.entry
    if mode == "general":
        rows_y = Q.row(z3) + Q.row(z4)
        rows_x = Q.row(z1) + Q.row(z2)
        cols_y = Q.column(z3) + Q.column(z4)
        cols_x = Q.column(z1) + Q.column(z2)
        # the row and column passes both count the four flipped bits; the
        # last terms remove that double count
        phi_x = e(z1, z1) + e(z1, z2) + e(z2, z1) + e(z2, z2)
        phi_y = e(z3, z3) + e(z3, z4) + e(z4, z3) + e(z4, z4)
        return float(rows_y @ yb - rows_x @ xb + cols_y @ yb - cols_x @ xb
                     + phi_x - phi_y)
    if not (Q.symmetrized or np.array_equal(Q.A, Q.A.T) and np.array_equal(Q.B, Q.B.T)):
        raise ModeUnsupportedForInstance(f"mode {mode!r} needs a symmetric Q")
    rows_y = Q.row(z3) + Q.row(z4)
    rows_x = Q.row(z1) + Q.row(z2)
    if mode == "symmetrized":
        return float(2 * (rows_y @ yb - rows_x @ xb) + 2 * (e(z1, z2) - e(z4, z3)))
    if mode == "semisymmetric":
        if not np.array_equal(Q.B, Q.B.T):
            raise ModeUnsupportedForInstance("semisymmetric mode needs a symmetric right factor")
        return float(2 * (rows_y @ yb - rows_x @ xb))
    raise ValueError(f"unknown mode {mode!r}")


def brute_force_difference(Q: QOperator, x: BinarySolution, t: FlipTuple) -> float:
    y = apply_quadruple_flip(x, t)
    return objective_binary(Q, y) - objective_binary(Q, x)
