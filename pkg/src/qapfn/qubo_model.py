"""Kronecker-structured QUBO matrices for the QAP.

The operator never stores the ``n^2 x n^2`` matrix unless asked to. It keeps
the two ``n x n`` factors ``A`` and ``B`` and applies ``Q = A (x) B`` through
the reshape identity ``(A (x) B) vec(X) = vec(B X A^T)``, where ``vec`` stacks
columns. A symmetrized operator represents ``(Q + Q^T) / 2``.

Binary vectors use the column-stack layout: bit ``j*n + s[j]`` is set for a
permutation ``s``, so block ``j`` (positions ``j*n .. j*n+n-1``) holds exactly
one set bit. With ``A = F`` the quadratic form equals the QAP cost of ``s``;
with ``A = D`` it equals the cost of the inverse of ``s``, which is what the
``inverted`` flag records.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatch, IndexOutOfRange
from .instance_io import Instance, Symmetry

DENSE_THRESHOLD = 16


@dataclass(frozen=True, eq=False)
class QOperator:
    A: np.ndarray
    B: np.ndarray
    symmetrized: bool = False
    inverted: bool = False
    dense_threshold: int = DENSE_THRESHOLD
    dense: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        A = np.asarray(self.A, dtype=float)
        B = np.asarray(self.B, dtype=float)
        if A.ndim != 2 or A.shape != B.shape or A.shape[0] != A.shape[1]:
            raise DimensionMismatch(f"factors {A.shape} and {B.shape} must be equal squares")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "B", B)
        if self.dense is None and A.shape[0] <= self.dense_threshold:
            object.__setattr__(self, "dense", self._materialize())

    @property
    def n(self) -> int:
        return self.A.shape[0]

    @property
    def size(self) -> int:
        return self.n * self.n

    def _materialize(self) -> np.ndarray:
        Q = np.kron(self.A, self.B)
        if self.symmetrized:
            Q = 0.5 * (Q + Q.T)
        Q.setflags(write=False)
        return Q

    def todense(self) -> np.ndarray:
        return self.dense if self.dense is not None else self._materialize()

    # ---- products
    def matvec(self, x) -> np.ndarray:
        """``Q @ x`` in O(n^3) without forming ``Q``."""
        x = np.asarray(x, dtype=float)
        n = self.n
        if x.shape != (n * n,):
            raise DimensionMismatch(f"vector of length {x.shape} for n={n}")
        X = x.reshape(n, n).T
        M = self.B @ X @ self.A.T
        if self.symmetrized:
            M = 0.5 * (M + self.B.T @ X @ self.A)
        return M.T.reshape(-1)

    __matmul__ = matvec

    def dense_matvec(self, x) -> np.ndarray:
        return self.todense() @ np.asarray(x, dtype=float)

    def quadratic(self, x) -> float:
        x = np.asarray(x, dtype=float)
        return float(x @ self.matvec(x))

    # ---- element access
    def entry(self, r, c):
        """Entry ``Q[r, c]``; accepts scalars or equal-shape index arrays."""
        r = np.asarray(r)
        c = np.asarray(c)
        N = self.size
        if np.any((r < 0) | (r >= N) | (c < 0) | (c >= N)):
            raise IndexOutOfRange(f"index outside [0, {N})")
        n = self.n
        val = self.A[r // n, c // n] * self.B[r % n, c % n]
        if self.symmetrized:
            val = 0.5 * (val + self.A[c // n, r // n] * self.B[c % n, r % n])
        return float(val) if np.ndim(val) == 0 else val

    def row(self, r: int) -> np.ndarray:
        n = self.n
        if not 0 <= r < self.size:
            raise IndexOutOfRange(f"row {r} outside [0, {self.size})")
        out = np.kron(self.A[r // n], self.B[r % n])
        if self.symmetrized:
            out = 0.5 * (out + np.kron(self.A[:, r // n], self.B[:, r % n]))
        return out

    def column(self, c: int) -> np.ndarray:
        n = self.n
        if not 0 <= c < self.size:
            raise IndexOutOfRange(f"column {c} outside [0, {self.size})")
        out = np.kron(self.A[:, c // n], self.B[:, c % n])
        if self.symmetrized:
            out = 0.5 * (out + np.kron(self.A[c // n], self.B[c % n]))
        return out

    # ---- permutation <-> bit-layout permutation
    def encode(self, perm) -> np.ndarray:
        """Map an assignment ``perm`` to the layout permutation seen by ``Q``."""
        perm = np.asarray(perm, dtype=np.int64)
        return np.argsort(perm) if self.inverted else perm.copy()

    def decode(self, layout) -> np.ndarray:
        layout = np.asarray(layout, dtype=np.int64)
        return np.argsort(layout) if self.inverted else layout.copy()


def build_q_operator(instance: Instance, symmetrize: bool | None = None,
                     dense_threshold: int = DENSE_THRESHOLD) -> QOperator:
    """Pick the Kronecker factors by instance symmetry.

    The symmetric matrix always ends up as the right factor. When only ``F``
    is symmetric the factors are swapped to ``D (x) F`` and the operator is
    marked ``inverted``. Non-symmetric instances are symmetrized; passing
    ``symmetrize`` overrides that choice.
    """
    sym = instance.symmetry
    if sym is Symmetry.SemiSymmetricFsym:
        A, B, inverted = instance.D, instance.F, True
    else:
        A, B, inverted = instance.F, instance.D, False
    if symmetrize is None:
        symmetrize = sym is not Symmetry.Symmetric
    return QOperator(A, B, symmetrized=symmetrize, inverted=inverted,
                     dense_threshold=dense_threshold)


@dataclass(frozen=True)
class PenaltyQubo:
    Q: QOperator
    lam: float
    u: float
    alpha: float

    @property
    def n(self) -> int:
        return self.Q.n


def build_penalty_qubo(instance: Instance, alpha: float = 1.0) -> PenaltyQubo:
    """Quadratic term plus ``lam`` times squared one-hot violations.

    ``u = max(D) * sum(F)`` bounds every feasible cost because each term
    ``F_ij * D_kl`` is at most ``F_ij * max(D)`` (for nonnegative data).
    """
    if not alpha > 0:
        raise ValueError("alpha must be positive")
    Q = QOperator(instance.F, instance.D, symmetrized=instance.symmetry is not Symmetry.Symmetric)
    u = float(instance.D.max() * instance.F.sum())
    return PenaltyQubo(Q, alpha * u, u, float(alpha))


def violations(x, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Per-block and per-residue set-bit counts minus one."""
    X = np.asarray(x, dtype=float).reshape(n, n)
    return X.sum(axis=1) - 1.0, X.sum(axis=0) - 1.0


def penalty_energy(pq: PenaltyQubo, x) -> float:
    x = np.asarray(x, dtype=float)
    n = pq.n
    if x.shape != (n * n,):
        raise DimensionMismatch(f"vector of length {x.shape} for n={n}")
    blocks, residues = violations(x, n)
    return pq.Q.quadratic(x) + pq.lam * float(blocks @ blocks + residues @ residues)
