import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qapfn.errors import AllMovesTabu, DegenerateSamples, EmptyNeighbourhood
from qapfn.heuristics import (
    FALLBACK_TEMPERATURES,
    REJECT,
    Heuristic,
    HeuristicConfig,
    SAConfig,
    TabuState,
    choose_greedy,
    choose_sa,
    choose_tabu,
    choose_top10,
    choose_walkqap,
    estimate_temperatures,
    temperature_schedule,
    temperatures_from_samples,
    top_pool,
)
from qapfn.instance_io import Instance
from qapfn.qubo_model import build_q_operator

from conftest import random_instance

APPROX = [13, 4.5, -11.5, 0, -5, -3.5, -15.5, -12.5, 1, 5.5]
EXACT = [15, 4.5, 9.5, 0, 3, -3.5, 4.5, -4.5, 11, 17.5]

theta_arrays = st.lists(st.integers(-20, 20), min_size=1, max_size=40).map(
    lambda v: np.array(v, dtype=float))


def test_config_defaults_and_validation():
    cfg = HeuristicConfig()
    assert (cfg.p, cfg.pool_size, cfg.tabu_length) == (0.95, 10, 20)
    assert cfg.sa == SAConfig(0.8, 0.1, 50, 5, 10, 10)
    assert HeuristicConfig("sa").kind is Heuristic.SA
    for bad in (dict(p=1.0), dict(p=0.0), dict(pool_size=0), dict(tabu_length=0)):
        with pytest.raises(ValueError):
            HeuristicConfig(**bad)
    with pytest.raises(ValueError):
        SAConfig(p_initial=1.2)
    with pytest.raises(ValueError):
        SAConfig(gamma_final=101)


def test_greedy_on_reference_vectors():
    assert choose_greedy(APPROX) == 6
    assert choose_greedy(EXACT) == 7
    assert choose_greedy(np.zeros(10)) == 0
    with pytest.raises(EmptyNeighbourhood):
        choose_greedy([])


@given(theta_arrays, st.randoms())
def test_greedy_value_invariant_under_permutation(theta, rnd):
    order = list(range(theta.size))
    rnd.shuffle(order)
    assert theta[choose_greedy(theta)] == theta.min()
    assert theta[order][choose_greedy(theta[order])] == theta.min()


@given(theta_arrays, st.integers(1, 15))
def test_pool_is_k_smallest(theta, k):
    pool = top_pool(theta, k)
    assert pool.size == min(k, theta.size)
    assert sorted(theta[pool]) == sorted(theta)[: pool.size]
    # ties go to the lower index
    order = np.lexsort((np.arange(theta.size), theta))
    assert pool.tolist() == order[: pool.size].tolist()


def test_top10_whole_neighbourhood_is_deterministic_per_seed():
    picks = [choose_top10(APPROX, np.random.default_rng(5)) for _ in range(3)]
    assert len(set(picks)) == 1 and 0 <= picks[0] < 10


def test_top10_pool_one_is_greedy():
    assert choose_top10(APPROX, np.random.default_rng(0), pool_size=1) == 6


def test_top10_frequencies():
    rng = np.random.default_rng(99)
    theta = np.random.default_rng(1).permutation(20).astype(float)
    pool = set(top_pool(theta, 10).tolist())
    draws = np.array([choose_top10(theta, rng) for _ in range(100_000)])
    counts = np.bincount(draws, minlength=20) / draws.size
    assert set(np.flatnonzero(counts).tolist()) == pool
    assert np.all(np.abs(counts[list(pool)] - 0.1) < 0.01)


def test_walkqap_extremes():
    theta = np.arange(30, dtype=float)
    a = [choose_walkqap(theta, r, p=1.0) for r in [np.random.default_rng(3)] for _ in range(200)]
    r2 = np.random.default_rng(3)
    b = [choose_top10(theta, r2) for _ in range(200)]
    assert a == b
    rng = np.random.default_rng(4)
    draws = np.array([choose_walkqap(theta, rng, p=0.0) for _ in range(30_000)])
    counts = np.bincount(draws, minlength=30) / draws.size
    assert np.all(np.abs(counts - 1 / 30) < 0.006)


def test_walkqap_mixture_mass():
    theta = np.arange(50, dtype=float)
    rng = np.random.default_rng(8)
    draws = np.array([choose_walkqap(theta, rng, p=0.95) for _ in range(40_000)])
    outside = np.mean(draws >= 10)
    assert outside == pytest.approx(0.05 * 40 / 50, abs=0.006)


def test_tabu_empty_list_is_greedy():
    state = TabuState(20, f_best=-math.inf)
    fps = {i: i for i in range(10)}
    assert choose_tabu(APPROX, state, 100.0, fps.__getitem__) == choose_greedy(APPROX)
    assert list(state.entries) == [6]


def test_tabu_skips_listed_and_aspires():
    theta = np.array([-5.0, -3.0, 1.0])
    state = TabuState(20, f_best=100.0)
    state.push("a")
    fps = ["a", "b", "c"].__getitem__
    # 100 + 2 * (-5) = 90 does not beat 85, row 0 is tabu, row 1 is next
    state.f_best = 85.0
    assert choose_tabu(theta, state, 100.0, fps) == 1
    # aspiration: 100 - 10 < 95
    state.f_best = 95.0
    assert choose_tabu(theta, state, 100.0, fps) == 0


def test_all_tabu_raises_with_fallback():
    state = TabuState(20, f_best=-math.inf)
    for fp in "abc":
        state.push(fp)
    with pytest.raises(AllMovesTabu) as err:
        choose_tabu([3.0, -1.0, 2.0], state, 0.0, ["a", "b", "c"].__getitem__)
    assert err.value.fallback == 1


def test_tabu_capacity_and_eviction():
    state = TabuState(3)
    for fp in range(4):
        state.push(fp)
    assert len(state) == 3 and 0 not in state and list(state.entries) == [1, 2, 3]


def test_sa_acceptance_rules():
    rng = np.random.default_rng(0)
    assert all(choose_sa([-1.0, 0.0], rng, 1.0) != REJECT for _ in range(200))
    assert all(choose_sa([5.0], rng, 1e-9) == REJECT for _ in range(200))
    with pytest.raises(ValueError):
        choose_sa([1.0], rng, 0.0)


def test_sa_acceptance_frequency():
    rng = np.random.default_rng(42)
    T = 3.0
    accepted = np.mean([choose_sa([T], rng, T) != REJECT for _ in range(100_000)])
    assert accepted == pytest.approx(math.exp(-1), abs=0.01)


def test_temperature_formula():
    cfg = SAConfig()
    T_high, T_low = temperatures_from_samples([10.0], cfg)
    assert T_high == pytest.approx(-10 / math.log(0.8))
    assert T_high == pytest.approx(44.814, abs=1e-3)
    assert temperatures_from_samples([1.0], cfg)[1] == pytest.approx(0.4343, abs=1e-4)
    with pytest.raises(DegenerateSamples):
        temperatures_from_samples([0.0, 0.0], cfg)


def test_temperature_estimation(rng):
    inst = random_instance(rng, 8, high=50)
    Q = build_q_operator(inst)
    T_high, T_low = estimate_temperatures(inst, Q, np.random.default_rng(1))
    assert T_high > T_low > 0
    assert estimate_temperatures(inst, Q, np.random.default_rng(1)) == (T_high, T_low)
    zero = Instance("z", np.zeros((6, 6)), inst.D[:6, :6])
    Qz = build_q_operator(zero)
    assert estimate_temperatures(zero, Qz, rng) == FALLBACK_TEMPERATURES
    with pytest.raises(DegenerateSamples):
        estimate_temperatures(zero, Qz, rng, strict=True)


@given(st.floats(1e-3, 1e3), st.floats(1e-3, 1.0), st.integers(2, 500))
def test_schedule_endpoints_and_ratio(T_high, frac, i_max):
    T_low = T_high * frac
    T = temperature_schedule(T_high, T_low, i_max)
    assert T[0] == T_high and T[-1] == T_low and T.size == i_max
    ratios = T[1:] / T[:-1]
    np.testing.assert_allclose(ratios, ratios[0], rtol=1e-9)
    assert np.all(np.diff(T) <= 0)
    if frac < 0.999:
        assert np.all(np.diff(T) < 0)


def test_heuristics_are_seed_deterministic():
    theta = np.random.default_rng(0).normal(size=45)
    for chooser in (lambda r: choose_top10(theta, r), lambda r: choose_walkqap(theta, r),
                    lambda r: choose_sa(theta, r, 0.5)):
        a = [chooser(np.random.default_rng(11)) for _ in range(5)]
        r = np.random.default_rng(11)
        s1 = [chooser(r) for _ in range(50)]
        r = np.random.default_rng(11)
        s2 = [chooser(r) for _ in range(50)]
        assert s1 == s2 and len(set(a)) == 1
