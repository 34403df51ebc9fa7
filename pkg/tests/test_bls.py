import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from conftest import random_instance
from gtsp_bls import benchmark_instance
from gtsp_bls.bls import (
    BlsParams,
    BlsState,
    HistoryMatrix,
    PerturbationKind,
    bls_run,
    bls_search,
    choose_perturbation_kind,
    descend,
    local_optimum,
    perturb,
    probability_P,
    sample_candidates,
)
from gtsp_bls.tour import Tour, cluster_optimization, delta_two_opt, semi_random_construction, validate


def exhaustive_two_opt_min(t, inst):
    m = t.m
    return min(delta_two_opt(t, x, y, inst) for x in range(m) for y in range(x + 1, m) if (x, y) != (0, m - 1))


# --- probability -------------------------------------------------------------

def test_probability_values():
    assert probability_P(0, 10, 0.75) == 1.0
    assert probability_P(100, 10, 0.75) == 0.75
    assert abs(probability_P(2, 10, 0.75) - math.exp(-0.2)) < 1e-12


def test_probability_never_below_floor():
    for omega in range(0, 101):
        assert probability_P(omega, 10, 0.75) >= 0.75


def test_kind_frequencies():
    params = BlsParams(P0=0.5, Q=0.7, T=10)
    rng = np.random.default_rng(0)
    counts = {k: 0 for k in PerturbationKind}
    for _ in range(20000):
        counts[choose_perturbation_kind(1000, params, rng)] += 1
    assert abs(counts[PerturbationKind.DIRECTED] / 20000 - 0.5) < 0.02
    assert abs(counts[PerturbationKind.RECENCY] / 20000 - 0.35) < 0.02
    assert abs(counts[PerturbationKind.RANDOM] / 20000 - 0.15) < 0.02


# --- params ------------------------------------------------------------------

def test_resolve_defaults():
    p = BlsParams().resolve(40)
    assert (p.Lmax, p.gamma, p.N) == (16, 40, 40)
    assert BlsParams().resolve(10).Lmax == 6


@pytest.mark.parametrize("kw", [dict(L0=0), dict(L0=5, Lmax=4), dict(T=0), dict(P0=0.0), dict(P0=1.5),
                                dict(Q=-0.1), dict(desc_max=0), dict(N=0), dict(gamma=0)])
def test_invalid_params(kw):
    with pytest.raises(ValueError):
        BlsParams(**kw).check()


# --- descent ---------------------------------------------------------------

def test_descent_reaches_two_opt_optimum():
    rng = np.random.default_rng(1)
    inst = benchmark_instance("20kroA100")
    for _ in range(10):
        t = semi_random_construction(inst, rng)
        before = t.cost
        state = BlsState()
        descend(t, HistoryMatrix(inst.m), state, inst)
        validate(t, inst)
        assert t.cost <= before
        assert exhaustive_two_opt_min(t, inst) >= 0


def test_descent_stamps_history_and_counts_iterations():
    rng = np.random.default_rng(2)
    inst = benchmark_instance("14st70")
    t = semi_random_construction(inst, rng)
    H = HistoryMatrix(inst.m)
    state = BlsState(iter=1)
    descend(t, H, state, inst)
    assert state.iter > 1
    assert H.stamps.max() == state.iter - 1
    assert np.array_equal(H.stamps, H.stamps.T)


def test_local_optimum_stable_under_co():
    rng = np.random.default_rng(3)
    inst = benchmark_instance("16eil76")
    t = semi_random_construction(inst, rng)
    local_optimum(t, HistoryMatrix(inst.m), BlsState(), inst)
    assert exhaustive_two_opt_min(t, inst) >= 0
    assert cluster_optimization(t.order, inst).cost == t.cost


# --- candidate sets ----------------------------------------------------------

def _setup(seed, m):
    rng = np.random.default_rng(seed)
    inst = random_instance(rng, int(rng.integers(m, 3 * m + 1)), m)
    t = semi_random_construction(inst, rng)
    H = HistoryMatrix(m)
    for u in range(m):
        for v in range(u + 1, m):
            H.stamp(u, v, int(rng.integers(0, 12)))
    it = int(rng.integers(5, 20))
    best = t.cost + int(rng.integers(-30, 5))
    state = BlsState(iter=it, best_cost=best)
    return inst, t, H, state, rng


@pytest.mark.parametrize("seed", range(40))
def test_candidate_sets_match_brute_force(seed):
    m = 3 + seed % 4
    inst, t, H, state, rng = _setup(seed, m)
    params = BlsParams(gamma=int(rng.integers(1, 8)), exhaustive=True).resolve(m)
    Hl = H.stamps.tolist()
    got = set(sample_candidates(PerturbationKind.DIRECTED, t, H, state, params, inst, rng))
    want = oracles.directed_set(inst.dist, t.order, t.pick, Hl, state.iter, params.gamma, state.best_cost)
    if not want:
        # nothing admissible: fall back to the least-degrading pairs overall
        want = oracles.directed_set(inst.dist, t.order, t.pick, Hl, 10**9, 0, 0)
    assert got == want
    got = set(sample_candidates(PerturbationKind.RECENCY, t, H, state, params, inst, rng))
    assert got == oracles.recency_set(Hl, m)
    got = set(sample_candidates(PerturbationKind.RANDOM, t, H, state, params, inst, rng))
    assert got == {(u, v) for u in range(m) for v in range(u + 1, m)}


def test_sampled_candidates_are_valid_pairs():
    inst, t, H, state, rng = _setup(99, 12)
    params = BlsParams().resolve(12)
    for kind in PerturbationKind:
        for _ in range(50):
            moves = sample_candidates(kind, t, H, state, params, inst, rng)
            assert moves
            assert all(0 <= u < 12 and 0 <= v < 12 and u != v for u, v in moves)


def test_perturb_updates_state():
    inst, t, H, state, rng = _setup(5, 8)
    params = BlsParams().resolve(8)
    it = state.iter
    perturb(t, 4, H, state, params, inst, rng)
    validate(t, inst)
    assert state.iter == it + 4
    assert state.jumps == 4
    assert H.stamps.max() == it + 3


def test_perturb_needs_positive_strength():
    inst, t, H, state, rng = _setup(5, 8)
    with pytest.raises(ValueError):
        perturb(t, 0, H, state, BlsParams().resolve(8), inst, rng)


# --- full search ---------------------------------------------------------------

def check_trace(trace, params):
    p = params
    prev = None
    for rec in trace:
        assert p.L0 <= rec["L"] <= p.Lmax
        assert rec["omega"] <= p.T
        if rec["improved"]:
            assert rec["omega"] == 0
        if prev is not None:
            assert rec["c_p"] == prev["cost"]
            assert rec["L_before"] == prev["L"]
            assert rec["best"] <= prev["best"]
        if rec["strong"]:
            assert rec["omega"] == 0
            assert rec["L"] == rec["L_before"]
            assert not rec["improved"]
            assert prev is not None and prev["omega"] == p.T
        elif rec["cost"] == rec["c_p"]:
            assert rec["L"] == min(rec["L_before"] + 1, p.Lmax)
        else:
            assert rec["L"] == p.L0
        if not rec["improved"] and not rec["strong"] and prev is not None:
            # omega grows by one, or restarts when a jump found a new best
            assert rec["omega"] in (prev["omega"] + 1, 1)
        prev = rec


def test_trace_rules():
    inst = benchmark_instance("20kroA100").with_best_known(None)
    params = BlsParams(desc_max=150)
    trace = []
    rng = np.random.default_rng(4)
    t0 = semi_random_construction(inst, rng)
    best, state = bls_search(t0, params, inst, rng, trace=trace)
    assert len(trace) == 150 == state.desc
    check_trace(trace, params.resolve(inst.m))
    assert any(r["strong"] for r in trace)
    validate(best, inst)
    assert best.cost <= min(r["best"] for r in trace)
    assert exhaustive_two_opt_min(best, inst) >= 0


def test_bls_stops_at_target():
    inst = benchmark_instance("11eil51")
    rng = np.random.default_rng(5)
    trace = []
    best, state = bls_search(semi_random_construction(inst, rng), BlsParams(desc_max=5000), inst, rng, trace=trace)
    assert best.cost == 174
    assert state.desc < 5000


def test_bls_respects_stop():
    inst = benchmark_instance("20kroA100").with_best_known(None)
    rng = np.random.default_rng(6)
    best, state = bls_search(semi_random_construction(inst, rng), BlsParams(desc_max=1000), inst, rng,
                             stop=lambda: True)
    assert state.desc == 1
    validate(best, inst)


def test_bls_run_never_worse():
    inst = benchmark_instance("14st70").with_best_known(None)
    rng = np.random.default_rng(7)
    t0 = semi_random_construction(inst, rng)
    assert bls_run(t0, BlsParams(desc_max=20), inst, rng).cost <= t0.cost


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(2, 8))
def test_bls_on_random_small_instances(seed, m):
    rng = np.random.default_rng(seed)
    inst = random_instance(rng, int(rng.integers(m, 2 * m + 1)), m)
    t0 = semi_random_construction(inst, rng)
    trace = []
    best, _ = bls_search(t0, BlsParams(desc_max=15), inst, rng, trace=trace)
    validate(best, inst)
    assert best.cost <= t0.cost
    check_trace(trace, BlsParams(desc_max=15).resolve(m))
    if m <= 6:
        assert best.cost >= oracles.exact_gtsp(inst.dist, [c.tolist() for c in inst.members])
