"""Objective changes for every row of the neighbourhood from one product ``Qx``.

With ``q = Qx`` the per-bit gain is ``g[i] = q[i] - q[support[block(i)]]`` off
the support and ``-q[i]`` on it. Adding the gains of a row's two new bits
gives the approximate change; a two-entry correction per row makes it exact
for symmetric ``Q`` built from at least one symmetric factor. All values here
are half of the true objective change.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import IndexMisalignment, ModeUnsupportedForInstance
from .feasible_core import BinarySolution
from .neighbourhood import FullNeighbourhood
from .qubo_model import QOperator

APPROXIMATE = "approximate"
EXACT = "exact"


@dataclass
class GainDecomposition:
    q: np.ndarray
    gplus: np.ndarray
    gminus: np.ndarray
    g: np.ndarray

    @property
    def objective(self) -> float:
        """``x^T Q x``, the sum of ``q`` over the support."""
        return float(self.gminus[:: self.n].sum())

    @property
    def n(self) -> int:
        return int(round(np.sqrt(self.q.size)))


@dataclass
class GradientVector:
    values: np.ndarray
    mode: str
    corrector: np.ndarray | None = None

    def __len__(self) -> int:
        return self.values.size

    def true_delta(self, i: int) -> float:
        """Objective change of row ``i`` (factor two restored)."""
        return 2.0 * float(self.values[i])


def gain_vector(Q: QOperator, x: BinarySolution) -> GainDecomposition:
    n = Q.n
    q = Q.matvec(x.bits)
    gplus = q * (1 - x.bits)
    gminus = np.repeat(q[x.support], n)
    return GainDecomposition(q, gplus, gminus, gplus - gminus)


def _check(fn: FullNeighbourhood, size: int) -> None:
    if fn.n * fn.n != size:
        raise IndexMisalignment(f"neighbourhood of order {fn.n} vs vector of length {size}")


def approximate_gradient(fn: FullNeighbourhood, gd: GainDecomposition) -> GradientVector:
    _check(fn, gd.g.size)
    return GradientVector(gd.g[fn.z3] + gd.g[fn.z4], APPROXIMATE)


def error_corrector(fn: FullNeighbourhood, Q: QOperator) -> np.ndarray:
    """``Q(z3, z4) + Q(z4, z3)`` per row."""
    _check(fn, Q.size)
    return Q.entry(fn.z3, fn.z4) + Q.entry(fn.z4, fn.z3)


def general_corrector(fn: FullNeighbourhood, Q: QOperator) -> np.ndarray:
    """Exact correction for any symmetric ``Q``: ``Q(z3, z4) + Q(z1, z2)``."""
    _check(fn, Q.size)
    return Q.entry(fn.z3, fn.z4) + Q.entry(fn.z1, fn.z2)


def error_corrector_dense(fn: FullNeighbourhood, Q: QOperator) -> np.ndarray:
    """Reference form ``((S34 Q) * S34) 1`` using dense matrices."""
    S34 = fn.s_matrices().S34.astype(float)
    return ((S34 @ Q.todense()) * S34).sum(axis=1)


def q_is_symmetric(Q: QOperator) -> bool:
    return Q.symmetrized or (np.array_equal(Q.A, Q.A.T) and np.array_equal(Q.B, Q.B.T))


def semisymmetric_ok(Q: QOperator) -> bool:
    """Whether the short corrector is exact for this operator."""
    return q_is_symmetric(Q) and (np.array_equal(Q.B, Q.B.T) or np.array_equal(Q.A, Q.A.T))


def evaluate_full_neighbourhood(x: BinarySolution, fn: FullNeighbourhood, Q: QOperator,
                                mode: str = APPROXIMATE, general: bool | None = None,
                                gd: GainDecomposition | None = None) -> GradientVector:
    """Half objective change of every neighbour.

    In exact mode the short corrector is used when it is exact for ``Q``;
    otherwise ``general`` must allow the general corrector (the default
    ``None`` picks it automatically).
    """
    if gd is None:
        gd = gain_vector(Q, x)
    grad = approximate_gradient(fn, gd)
    if mode == APPROXIMATE:
        return grad
    if mode != EXACT:
        raise ValueError(f"unknown gradient mode {mode!r}")
    if not q_is_symmetric(Q):
        raise ModeUnsupportedForInstance("exact mode needs a symmetric (or symmetrized) Q")
    if semisymmetric_ok(Q) and not general:
        E = error_corrector(fn, Q)
    elif general is False:
        raise ModeUnsupportedForInstance("exact mode on this instance needs the general corrector")
    else:
        E = general_corrector(fn, Q)
    return GradientVector(grad.values + E, EXACT, E)


def relative_error(gd: GainDecomposition, fn: FullNeighbourhood, E) -> float:
    """Mean of ``E_i / max(1, gplus[z3] + gplus[z4])`` over the rows."""
    _check(fn, gd.g.size)
    plus = gd.gplus[fn.z3] + gd.gplus[fn.z4]
    return float(np.mean(np.asarray(E) / np.maximum(1.0, plus)))


def row_corrector(Q: QOperator, z1: int, z2: int, z3: int, z4: int) -> float:
    """Exact-minus-approximate for a single row, valid for any symmetric ``Q``."""
    n, A, B = Q.n, Q.A, Q.B
    v = A[z3 // n, z4 // n] * B[z3 % n, z4 % n] + A[z1 // n, z2 // n] * B[z1 % n, z2 % n]
    if Q.symmetrized:
        v = 0.5 * (v + A[z4 // n, z3 // n] * B[z4 % n, z3 % n]
                   + A[z2 // n, z1 // n] * B[z2 % n, z1 % n])
    return float(v)
