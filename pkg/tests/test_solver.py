import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hambucket.analysis import DistributionModel, choose_params, pair_survival_count
from hambucket.bitvec import (
    BitVector,
    BlockSpec,
    block_weight,
    make_rng,
    pack_rows,
    random_vector,
)
from hambucket.generator import Instance, gen_instance
from hambucket.solver import (
    AT_MOST,
    EXACT,
    MatchPair,
    SolverParams,
    Strategy,
    bucket_accept,
    deviation,
    naive_count,
    naive_search,
    partition_in_place,
    solve,
    survival_rate_probe,
)

UNIFORM = DistributionModel.uniform()


def tiny_instance():
    l1 = (BitVector.from_bits([0, 0, 0]), BitVector.from_bits([0, 1, 1]))
    l2 = (BitVector.from_bits([0, 0, 1]), BitVector.from_bits([1, 1, 1]))
    return Instance(3, 2, 1, l1, l2, (0, 0), UNIFORM, 0)


def test_naive_search_lists_all_pairs_in_order():
    got = naive_search(tiny_instance())
    assert got == [MatchPair(0, 0, 1), MatchPair(1, 0, 1), MatchPair(1, 1, 1)]
    assert naive_count(tiny_instance()) == 3


def test_naive_search_distance_override():
    assert naive_search(tiny_instance(), gamma_count=3) == [MatchPair(0, 1, 3)]
    assert naive_search(tiny_instance(), gamma_count=2) == []


def test_naive_identical_lists_have_diagonal():
    rng = make_rng(5)
    vs = tuple(random_vector(rng, 16) for _ in range(20))
    inst = Instance(16, 20, 0, vs, vs, None, UNIFORM, 0)
    got = naive_search(inst)
    assert {(m.i, m.j) for m in got} >= {(i, i) for i in range(20)}


def test_strategy_tokens():
    assert Strategy.from_token("exact") == EXACT
    assert Strategy.from_token("dev:2") == deviation(2)
    assert Strategy.from_token("atmost") == AT_MOST
    with pytest.raises(ValueError):
        Strategy.from_token("dev:-1")
    with pytest.raises(ValueError):
        Strategy.from_token("widest")


def test_bucket_accept_rules():
    assert bucket_accept(4, 4, EXACT) and not bucket_accept(5, 4, EXACT)
    assert bucket_accept(5, 4, deviation(1)) and bucket_accept(3, 4, deviation(1))
    assert not bucket_accept(6, 4, deviation(1))
    assert bucket_accept(0, 4, AT_MOST) and bucket_accept(4, 4, AT_MOST)
    assert not bucket_accept(5, 4, AT_MOST)


def test_solver_params_validation():
    good = dict(depth=1, branching=1, permutations=1, delta=0.3,
                strategy=EXACT, naive_threshold=0, stop_on_first=False)
    SolverParams(**good)
    for field, bad in (("depth", 0), ("branching", 0), ("permutations", 0),
                       ("delta", 1.5), ("naive_threshold", -1)):
        with pytest.raises(ValueError):
            SolverParams(**{**good, field: bad})


# --- partition ----------------------------------------------------------------


@given(st.data())
@settings(max_examples=50)
def test_partition_prefix_matches_accept_rule(data):
    d = data.draw(st.integers(4, 100))
    r = data.draw(st.integers(1, min(4, d // 2)))
    spec = BlockSpec(d, r)
    blk = data.draw(st.integers(1, r))
    rng = make_rng(data.draw(st.integers(0, 2**32)))
    vs = [random_vector(rng, d) for _ in range(data.draw(st.integers(1, 30)))]
    n = len(vs)
    lo = data.draw(st.integers(0, n - 1))
    hi = data.draw(st.integers(lo, n))
    z = random_vector(rng, spec.width(blk))
    dc = data.draw(st.integers(0, spec.width(blk)))
    strat = data.draw(st.sampled_from([EXACT, deviation(1), AT_MOST]))

    order = np.arange(n, dtype=np.int64)
    before = order.copy()
    mid = partition_in_place(pack_rows(vs), order, lo, hi, z, spec, blk, dc, strat)

    assert sorted(order[lo:hi]) == sorted(before[lo:hi])
    assert np.array_equal(order[:lo], before[:lo])
    assert np.array_equal(order[hi:], before[hi:])
    for idx in order[lo:mid]:
        assert bucket_accept(block_weight(vs[idx], z, spec, blk), dc, strat)
    for idx in order[mid:hi]:
        assert not bucket_accept(block_weight(vs[idx], z, spec, blk), dc, strat)


def test_partition_is_stable():
    rng = make_rng(8)
    d = 16
    vs = [random_vector(rng, d) for _ in range(40)]
    spec = BlockSpec(d, 2)
    z = random_vector(rng, 8)
    order = np.arange(40, dtype=np.int64)
    mid = partition_in_place(pack_rows(vs), order, 0, 40, z, spec, 1, 4, AT_MOST)
    accepted = [i for i in range(40)
                if bucket_accept(block_weight(vs[i], z, spec, 1), 4, AT_MOST)]
    assert order[:mid].tolist() == accepted
    assert order[mid:].tolist() == [i for i in range(40) if i not in accepted]


def test_partition_rejects_wrong_z_width():
    vs = [BitVector.zeros(8)]
    with pytest.raises(ValueError):
        partition_in_place(pack_rows(vs), np.arange(1), 0, 1,
                           BitVector.zeros(3), BlockSpec(8, 2), 1, 2, EXACT)


# --- solve --------------------------------------------------------------------


def all_params(**over):
    base = dict(depth=1, branching=1, permutations=1, delta=1.0,
                strategy=AT_MOST, naive_threshold=0, stop_on_first=False)
    base.update(over)
    return SolverParams(**base)


def test_degenerate_atmost_equals_naive():
    """delta = block width accepts everything, so the walk is exhaustive."""
    inst = gen_instance(32, 64, 8, UNIFORM, seed=4)
    rep = solve(inst, all_params(), make_rng(0))
    assert [(m.i, m.j) for m in rep.matches] == [(m.i, m.j) for m in naive_search(inst)]
    assert rep.planted_found is True


@given(st.integers(0, 2**32))
@settings(max_examples=15, deadline=None)
def test_solve_is_subset_of_naive(seed):
    inst = gen_instance(32, 96, 6, UNIFORM, seed=seed)
    params = choose_params(32, math.log2(96) / 32, 6 / 32,
                           strategy=deviation(1), branching=128)
    rep = solve(inst, params, make_rng(seed ^ 0xA5A5))
    naive = {(m.i, m.j) for m in naive_search(inst)}
    assert {(m.i, m.j) for m in rep.matches} <= naive
    for m in rep.matches:
        assert m.dist == inst.gamma_count


def test_solve_is_deterministic():
    inst = gen_instance(32, 128, 8, UNIFORM, seed=21)
    params = choose_params(32, 7 / 32, 0.25, strategy=deviation(1))
    a = solve(inst, params, make_rng(77))
    b = solve(inst, params, make_rng(77))
    assert a.matches == b.matches
    assert a.nodes_visited == b.nodes_visited


def test_stop_on_first_returns_verified_subset():
    inst = gen_instance(32, 128, 2, UNIFORM, seed=6)
    base = choose_params(32, 7 / 32, 2 / 32, strategy=deviation(1))
    full = solve(inst, base, make_rng(13))
    early = solve(inst, all_params(strategy=AT_MOST, delta=1.0, stop_on_first=True),
                  make_rng(13))
    assert len(early.matches) >= 1
    assert {(m.i, m.j) for m in early.matches} <= {(m.i, m.j) for m in naive_search(inst)}
    assert len(full.matches) >= len(early.matches) or full.matches == early.matches


def test_planted_recovery_easy_regime():
    for seed in range(5):
        inst = gen_instance(64, 256, 8, UNIFORM, seed=seed)
        params = choose_params(64, 0.125, 0.125, strategy=deviation(1))
        rep = solve(inst, params, make_rng(1000 + seed))
        assert rep.planted_found is True


def test_report_counters():
    inst = gen_instance(32, 64, 4, UNIFORM, seed=3)
    rep = solve(inst, all_params(), make_rng(2))
    assert rep.nodes_visited >= 1
    assert rep.naive_comparisons == 64 * 64
    assert rep.wall_time > 0.0


def test_planted_flag_absent_without_plant():
    rng = make_rng(14)
    vs1 = tuple(random_vector(rng, 16) for _ in range(8))
    vs2 = tuple(random_vector(rng, 16) for _ in range(8))
    inst = Instance(16, 8, 4, vs1, vs2, None, UNIFORM, 0)
    rep = solve(inst, all_params(), make_rng(0))
    assert rep.planted_found is None


# --- survival probe -----------------------------------------------------------


def test_probe_matches_closed_form():
    k, g, dc = 16, 4, 5
    inst = gen_instance(k, 2, g, UNIFORM, seed=5)
    params = all_params(delta=dc / k, strategy=EXACT)
    trials = 10_000
    rate = survival_rate_probe(inst, params, make_rng(17), trials)
    q = pair_survival_count(k, g, dc) / 2.0**k
    sigma = math.sqrt(q * (1 - q) / trials)
    assert abs(rate - q) <= 3 * sigma


def test_probe_infeasible_split_is_zero():
    # odd planted distance cannot give equal weights on both sides
    inst = gen_instance(16, 2, 3, UNIFORM, seed=1)
    assert survival_rate_probe(inst, all_params(delta=0.25, strategy=EXACT),
                               make_rng(3), 2000) == 0.0


def test_probe_requires_planted_pair():
    v = BitVector.zeros(8)
    inst = Instance(8, 1, 0, (v,), (v,), None, UNIFORM, 0)
    with pytest.raises(ValueError):
        survival_rate_probe(inst, all_params(), make_rng(0), 10)
