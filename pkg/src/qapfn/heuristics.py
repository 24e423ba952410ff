"""Move-selection policies that read a gradient vector and return a row.

Every policy works on half objective changes (``theta``). The factor two is
restored only where a value is compared with a true objective (tabu
aspiration) and for temperature calibration, which samples half changes
so that ``exp(-theta / T)`` has the intended acceptance probability.
"""

from __future__ import annotations

import enum
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .errors import AllMovesTabu, DegenerateSamples, EmptyNeighbourhood


class Heuristic(str, enum.Enum):
    Greedy = "greedy"
    Top10 = "top10"
    WalkQAP = "walkqap"
    Tabu = "tabu"
    SA = "sa"


@dataclass(frozen=True)
class SAConfig:
    p_initial: float = 0.8
    p_final: float = 0.1
    gamma_initial: float = 50.0
    gamma_final: float = 5.0
    sample_configs: int = 10
    sample_neighbours: int = 10

    def __post_init__(self):
        for p in (self.p_initial, self.p_final):
            if not 0 < p < 1:
                raise ValueError(f"acceptance probability {p} outside (0, 1)")
        for g in (self.gamma_initial, self.gamma_final):
            if not 0 <= g <= 100:
                raise ValueError(f"percentile {g} outside [0, 100]")
        if self.sample_configs < 1 or self.sample_neighbours < 1:
            raise ValueError("sample sizes must be positive")


@dataclass(frozen=True)
class HeuristicConfig:
    kind: Heuristic = Heuristic.Top10
    p: float = 0.95
    pool_size: int = 10
    tabu_length: int = 20
    sa: SAConfig = field(default_factory=SAConfig)

    def __post_init__(self):
        object.__setattr__(self, "kind", Heuristic(self.kind))
        if not 0 < self.p < 1:
            raise ValueError("p must lie in (0, 1)")
        if self.pool_size < 1 or self.tabu_length < 1:
            raise ValueError("pool_size and tabu_length must be positive")


def _values(theta) -> np.ndarray:
    v = np.asarray(getattr(theta, "values", theta), dtype=float)
    if v.size == 0:
        raise EmptyNeighbourhood("no candidate moves")
    return v


def choose_greedy(theta) -> int:
    """Index of the smallest value; the lowest index wins ties."""
    return int(np.argmin(_values(theta)))


def top_pool(theta, pool_size: int) -> np.ndarray:
    """Row indices of the ``pool_size`` smallest values, ordered by (value, index)."""
    v = _values(theta)
    k = min(pool_size, v.size)
    if k < v.size:
        cand = np.argpartition(v, k - 1)[:k]
        # argpartition is arbitrary among ties at the boundary; widen to all
        # rows tied with the k-th value, then take the first k by index
        kth = v[cand].max()
        cand = np.flatnonzero(v <= kth)
    else:
        cand = np.arange(v.size)
    order = np.lexsort((cand, v[cand]))
    return cand[order][:k]


def choose_top10(theta, rng: np.random.Generator, pool_size: int = 10) -> int:
    pool = top_pool(theta, pool_size)
    return int(pool[rng.integers(pool.size)])


def choose_walkqap(theta, rng: np.random.Generator, p: float = 0.95, pool_size: int = 10) -> int:
    v = _values(theta)
    if p >= 1 or rng.random() < p:
        return choose_top10(v, rng, pool_size)
    return int(rng.integers(v.size))


def fingerprint(layout) -> int:
    return hash(tuple(int(s) for s in layout))


@dataclass
class TabuState:
    capacity: int = 20
    f_best: float = np.inf
    entries: deque = field(default_factory=deque)

    def __post_init__(self):
        self.entries = deque(self.entries, maxlen=self.capacity)

    def __contains__(self, fp: int) -> bool:
        return fp in self.entries

    def __len__(self) -> int:
        return len(self.entries)

    def push(self, fp: int) -> None:
        self.entries.append(fp)


def choose_tabu(theta, state: TabuState, f_x: float, fingerprints) -> int:
    """Aspiration first, then the best non-tabu row.

    ``fingerprints(i)`` returns the fingerprint of the solution reached by
    row ``i``. The chosen row's fingerprint is pushed onto the list. When
    every row is tabu :class:`AllMovesTabu` carries the best row; nothing
    is pushed in that case.
    """
    v = _values(theta)
    order = np.argsort(v, kind="stable")
    best = int(order[0])
    if f_x + 2.0 * v[best] < state.f_best:
        state.push(fingerprints(best))
        return best
    for i in order:
        fp = fingerprints(int(i))
        if fp not in state:
            state.push(fp)
            return int(i)
    raise AllMovesTabu(best)


REJECT = -1


def choose_sa(theta, rng: np.random.Generator, T: float) -> int:
    """Propose one row uniformly; return it if accepted, else ``REJECT``."""
    v = _values(theta)
    if not T > 0:
        raise ValueError("temperature must be positive")
    i = int(rng.integers(v.size))
    if v[i] <= 0 or rng.random() < np.exp(-v[i] / T):
        return i
    return REJECT


def temperatures_from_samples(samples, cfg: SAConfig) -> tuple[float, float]:
    s = np.abs(np.asarray(samples, dtype=float))
    s = s[s > 0]
    if s.size == 0:
        raise DegenerateSamples("all sampled differences are zero")
    d_high = float(np.percentile(s, cfg.gamma_initial))
    d_low = float(np.percentile(s, cfg.gamma_final))
    return -d_high / np.log(cfg.p_initial), -d_low / np.log(cfg.p_final)


FALLBACK_TEMPERATURES = (1.0, 0.01)


def estimate_temperatures(instance, Q, rng: np.random.Generator,
                          cfg: SAConfig = SAConfig(), strict: bool = False) -> tuple[float, float]:
    """Calibrate ``(T_high, T_low)`` from random neighbour differences.

    Differences are sampled as half changes so they share units with the
    gradient values fed to :func:`choose_sa`. Degenerate samples fall back
    to ``(1, 0.01)`` unless ``strict``.
    """
    from .feasible_core import exact_pair_difference, make_tuple, to_binary

    n = instance.n
    samples = []
    for _ in range(cfg.sample_configs):
        x = to_binary(rng.permutation(n))
        for _ in range(cfg.sample_neighbours):
            a, b = rng.choice(n, size=2, replace=False)
            t = make_tuple(x.support[a], x.support[b], n)
            samples.append(0.5 * exact_pair_difference(Q, x, t, "general"))
    try:
        return temperatures_from_samples(samples, cfg)
    except DegenerateSamples:
        if strict:
            raise
        return FALLBACK_TEMPERATURES


def temperature_schedule(T_high: float, T_low: float, i_max: int) -> np.ndarray:
    if i_max <= 1:
        return np.array([T_high] * max(i_max, 0), dtype=float)
    k = np.arange(i_max)
    T = T_high * (T_low / T_high) ** (k / (i_max - 1))
    T[0], T[-1] = T_high, T_low
    return T
