"""Full-neighbourhood local search driver and multi-trial gap reporting."""

from __future__ import annotations

import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from .errors import AllMovesTabu, InfeasibleSolution
from .feasible_core import (
    BinarySolution,
    exact_pair_difference,
    is_feasible,
    objective,
    objective_binary,
    to_binary,
)
from .gradient import (
    APPROXIMATE,
    EXACT,
    error_corrector,
    evaluate_full_neighbourhood,
    gain_vector,
    q_is_symmetric,
    relative_error,
    row_corrector,
)
from .heuristics import (
    REJECT,
    Heuristic,
    HeuristicConfig,
    TabuState,
    choose_greedy,
    choose_sa,
    choose_top10,
    choose_tabu,
    choose_walkqap,
    estimate_temperatures,
    fingerprint,
    temperature_schedule,
)
from .instance_io import Instance, best_known
from .neighbourhood import build_full_neighbourhood, update_full_neighbourhood
from .qubo_model import QOperator, build_q_operator

AUDIT_EVERY = 2 ** 14
PHASES = ("gradient", "neighbourhood_update", "selection", "other")


@dataclass(frozen=True)
class SearchConfig:
    i_max: int = 100_000
    gradient_mode: str = APPROXIMATE
    heuristic: HeuristicConfig = field(default_factory=HeuristicConfig)
    start: str | Sequence[int] = "random"
    trials: int = 1
    seed: int = 0
    general_corrector: bool | None = None
    target: float | None = None
    trace: bool = False
    record_rel_error: bool = False
    audit_every: int = AUDIT_EVERY
    workers: int = 1

    def __post_init__(self):
        if self.i_max < 0:
            raise ValueError("i_max must be nonnegative")
        if self.trials < 1:
            raise ValueError("trials must be at least 1")
        if self.gradient_mode not in (APPROXIMATE, EXACT):
            raise ValueError(f"unknown gradient mode {self.gradient_mode!r}")


@dataclass
class SearchResult:
    f_best: float
    x_best: np.ndarray
    best_iteration: int
    iterations: int
    seed: int
    wall_time: float
    timing_breakdown: dict[str, float]
    trace: list[tuple[int, float, int, int, int]] | None = None
    rel_errors: list[float] | None = None
    max_drift: float = 0.0


@dataclass
class GapReport:
    relgaps: list[float]
    relgap_min: float
    f_star: float


def relgap(f: float, f_star: float) -> float:
    return (f - f_star) / f_star if f_star != 0 else float(f - f_star)


def feasibility_audit(x: BinarySolution) -> bool:
    n = x.n
    return is_feasible(x.bits, n) and np.array_equal(np.flatnonzero(x.bits), x.support)


def _start_layout(instance: Instance, Q: QOperator, start, rng) -> np.ndarray:
    n = instance.n
    if isinstance(start, str):
        if start == "identity":
            perm = np.arange(n)
        elif start == "random":
            perm = rng.permutation(n)
        else:
            raise ValueError(f"unknown start {start!r}")
    else:
        perm = np.asarray(start, dtype=np.int64)
    return Q.encode(perm)


class _Chooser:
    """Binds one heuristic to its per-trial state."""

    def __init__(self, cfg: HeuristicConfig, instance, Q, rng, i_max: int, fn, x, f0):
        self.cfg = cfg
        self.rng = rng
        self.fn = fn
        self.x = x
        self.kind = cfg.kind
        if self.kind is Heuristic.Tabu:
            self.tabu = TabuState(cfg.tabu_length, f0)
            self.tabu.push(fingerprint(x.layout()))
        if self.kind is Heuristic.SA:
            T_high, T_low = estimate_temperatures(instance, Q, rng, cfg.sa)
            self.schedule = temperature_schedule(T_high, T_low, max(i_max, 1))

    def _neighbour_fp(self, i: int) -> int:
        a, b = self.fn.pairs[i]
        s = self.x.layout()
        s[a], s[b] = s[b], s[a]
        return fingerprint(s)

    def __call__(self, theta: np.ndarray, k: int, f_x: float, f_best: float) -> int:
        kind = self.kind
        if kind is Heuristic.Greedy:
            return choose_greedy(theta)
        if kind is Heuristic.Top10:
            return choose_top10(theta, self.rng, self.cfg.pool_size)
        if kind is Heuristic.WalkQAP:
            return choose_walkqap(theta, self.rng, self.cfg.p, self.cfg.pool_size)
        if kind is Heuristic.Tabu:
            self.tabu.f_best = f_best
            try:
                return choose_tabu(theta, self.tabu, f_x, self._neighbour_fp)
            except AllMovesTabu as exc:
                return exc.fallback
        return choose_sa(theta, self.rng, float(self.schedule[k]))


def run_search(instance: Instance, config: SearchConfig, seed: int | None = None,
               Q: QOperator | None = None) -> SearchResult:
    seed = config.seed if seed is None else seed
    rng = np.random.default_rng(seed)
    t_start = time.perf_counter()
    timers = dict.fromkeys(PHASES, 0.0)
    if Q is None:
        Q = build_q_operator(instance)
    n = instance.n
    mode = config.gradient_mode
    symmetric_q = q_is_symmetric(Q)

    x = to_binary(_start_layout(instance, Q, config.start, rng))
    fn = build_full_neighbourhood(x)
    f = objective_binary(Q, x)
    f_best, best_layout, best_iter = f, x.layout().copy(), 0
    choose = _Chooser(config.heuristic, instance, Q, rng, config.i_max, fn, x, f)
    trace = [] if config.trace else None
    rel_errors = [] if config.record_rel_error else None
    max_drift = 0.0
    target = config.target
    tol = 1e-9 * max(1.0, abs(f))

    k = 0
    now = time.perf_counter
    while k < config.i_max:
        if target is not None and f_best <= target + tol:
            break
        t0 = now()
        gd = gain_vector(Q, x)
        grad = evaluate_full_neighbourhood(x, fn, Q, mode, config.general_corrector, gd)
        t1 = now()
        row = choose(grad.values, k, f, f_best)
        t2 = now()
        timers["gradient"] += t1 - t0
        timers["selection"] += t2 - t1
        if rel_errors is not None:
            E = grad.corrector if grad.corrector is not None else error_corrector(fn, Q)
            rel_errors.append(relative_error(gd, fn, E))
        k += 1
        if row == REJECT:
            if trace is not None:
                trace.append((k, f, -1, -1, -1))
            timers["other"] += now() - t2
            continue
        z1, z2, z3, z4 = (int(v) for v in fn.rows[row])
        if mode == EXACT:
            delta = 2.0 * float(grad.values[row])
        elif symmetric_q:
            delta = 2.0 * (float(grad.values[row]) + row_corrector(Q, z1, z2, z3, z4))
        else:
            delta = exact_pair_difference(Q, x, fn[row], "general")
        # the row comes from a neighbourhood kept consistent with x, so the
        # checks of apply_quadruple_flip are skipped here
        x.bits[z1] = x.bits[z2] = 0
        x.bits[z3] = x.bits[z4] = 1
        x.support[z1 // n] = z4
        x.support[z2 // n] = z3
        f += delta
        if f < f_best - tol:
            f_best, best_layout, best_iter = f, x.layout().copy(), k
        if k % config.audit_every == 0:
            if not feasibility_audit(x):
                raise InfeasibleSolution(f"solution left the feasible set at iteration {k}")
            exact = objective_binary(Q, x)
            max_drift = max(max_drift, abs(exact - f) / max(1.0, abs(exact)))
            f = exact
        if trace is not None:
            trace.append((k, f, row, z1, z2))
        t3 = now()
        update_full_neighbourhood(fn, z1, z2)
        t4 = now()
        timers["other"] += t3 - t2
        timers["neighbourhood_update"] += t4 - t3

    x_best = Q.decode(best_layout)
    f_best = objective(instance, x_best)
    return SearchResult(f_best, x_best, best_iter, k, seed, time.perf_counter() - t_start,
                        timers, trace, rel_errors, max_drift)


def _trial(args):
    instance, config, seed = args
    return run_search(instance, config, seed)


def run_trials(instance: Instance, config: SearchConfig, f_star: float | None = None,
               search_dir=None) -> tuple[GapReport, list[SearchResult]]:
    """Run ``config.trials`` searches with seeds ``seed, seed+1, ...``."""
    if f_star is None:
        f_star = best_known(instance.name, search_dir)
    jobs = [(instance, config, config.seed + t) for t in range(config.trials)]
    if config.workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            results = list(pool.map(_trial, jobs))
    else:
        results = [_trial(j) for j in jobs]
    gaps = [relgap(r.f_best, f_star) for r in results]
    return GapReport(gaps, min(gaps), float(f_star)), results


def with_overrides(config: SearchConfig, **kw) -> SearchConfig:
    return replace(config, **kw)
