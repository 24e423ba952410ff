"""Baselines that ignore the feasible-space structure.

``run_qubo_tabu_single_flip`` is a textbook one-bit-flip tabu search on the
penalty QUBO; ``run_random_feasible`` samples uniform permutations. Both
produce a :class:`BitflipTrace` so their feasible-visit counts and best
feasible objectives can be set side by side with the native search.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .feasible_core import objective, to_binary
from .instance_io import Instance
from .qubo_model import PenaltyQubo


@dataclass
class BitflipTrace:
    energies: list[float] = field(default_factory=list)
    feasible: list[bool] = field(default_factory=list)
    flips: list[int] = field(default_factory=list)
    best_feasible_objective: float | None = None
    best_energy: float = np.inf

    def record(self, energy: float, is_feasible: bool, flip: int = -1) -> None:
        """Log one state; ``flip`` is the bit flipped to reach it (-1 for none)."""
        self.energies.append(float(energy))
        self.flips.append(int(flip))
        self.feasible.append(bool(is_feasible))
        self.best_energy = min(self.best_energy, float(energy))
        if is_feasible and (self.best_feasible_objective is None
                            or energy < self.best_feasible_objective):
            self.best_feasible_objective = float(energy)

    @property
    def feasible_count(self) -> int:
        return int(sum(self.feasible))

    def __len__(self) -> int:
        return len(self.energies)

    def best_feasible_curve(self) -> np.ndarray:
        """Running minimum over feasible records; NaN before the first one."""
        e = np.where(self.feasible, self.energies, np.inf) if self.energies else np.zeros(0)
        curve = np.minimum.accumulate(e) if e.size else e
        return np.where(np.isinf(curve), np.nan, curve)


def count_feasible_visits(trace: BitflipTrace) -> int:
    return trace.feasible_count


def run_qubo_tabu_single_flip(pq: PenaltyQubo, iters: int, seed: int = 0, tenure: int = 20,
                              start=None) -> BitflipTrace:
    """One-bit-flip tabu search on the penalty energy.

    Starts from a random permutation (or ``start``). Each iteration flips the
    best non-tabu bit, or a tabu bit whose flip beats the best energy seen.
    A flipped bit stays tabu for ``tenure`` iterations.
    """
    rng = np.random.default_rng(seed)
    Q = pq.Q
    n = Q.n
    lam = pq.lam
    perm = rng.permutation(n) if start is None else np.asarray(start)
    x = to_binary(perm).bits.astype(float)
    q = Q.matvec(x)
    X = x.reshape(n, n)
    block = X.sum(axis=1) - 1.0   # per block j (positions j*n .. j*n+n-1)
    resid = X.sum(axis=0) - 1.0   # per residue r
    energy = float(x @ q) + lam * float(block @ block + resid @ resid)
    blk = np.repeat(np.arange(n), n)
    res = np.tile(np.arange(n), n)
    tabu_until = np.zeros(n * n, dtype=np.int64)

    trace = BitflipTrace()
    trace.record(energy, True)
    best = energy
    for it in range(1, iters + 1):
        s = 1.0 - 2.0 * x
        delta = 2 * s * q + lam * (2 * s * block[blk] + 1 + 2 * s * resid[res] + 1)
        # the tolerance stops rounding in the running energy from letting a
        # return to an already-seen state pass as an improvement
        tol = 1e-9 * max(1.0, abs(best))
        allowed = (tabu_until < it) | (energy + delta < best - tol)
        if not allowed.any():
            allowed[:] = True
        cand = np.where(allowed, delta, np.inf)
        k = int(np.argmin(cand))
        sk = s[k]
        x[k] += sk
        q += sk * Q.column(k)
        block[k // n] += sk
        resid[k % n] += sk
        energy += float(delta[k])
        tabu_until[k] = it + tenure
        best = min(best, energy)
        feasible = not (block.any() or resid.any())
        trace.record(energy, feasible, k)
    return trace


def run_random_feasible(instance: Instance, iters: int, seed: int = 0) -> BitflipTrace:
    rng = np.random.default_rng(seed)
    trace = BitflipTrace()
    for _ in range(iters):
        trace.record(objective(instance, rng.permutation(instance.n)), True)
    return trace
