import numpy as np
import pytest

import ccpivot as cc
from ccpivot.oracle import _brute_force_rgs, _brute_force_subset_dp

BELL = [1, 1, 2, 5, 15, 52, 203, 877, 4140, 21147, 115975]


def k3(labels_ut):
    m = np.zeros((3, 3), dtype=np.int8)
    (m[0, 1], m[0, 2], m[1, 2]) = labels_ut
    m += m.T
    return cc.Instance.complete(m)


@pytest.mark.parametrize("n", range(1, 11))
def test_partition_counts_are_bell_numbers(n):
    count = sum(1 for _ in cc.partitions(n))
    assert count == BELL[n]


def test_partitions_distinct_and_canonical():
    seen = set()
    for a in cc.partitions(5):
        key = tuple(a.tolist())
        assert key not in seen
        seen.add(key)
        assert np.array_equal(cc.Clustering(a).assignment, a)  # already canonical


def test_brute_force_bad_triangle():
    _c, cost = cc.brute_force_opt(k3((1, 1, -1)))
    assert cost == 1.0


def test_brute_force_all_minus_gives_singletons():
    c, cost = cc.brute_force_opt(k3((-1, -1, -1)))
    assert cost == 0.0
    assert c == cc.Clustering.singletons(3)


def test_brute_force_gap_ti_single_cluster():
    inst = cc.gen_gap_triangle_ineq(4)
    c, cost = cc.brute_force_opt(inst)
    assert cost == pytest.approx(40.0 / 3.0)
    assert c == cc.Clustering.single_cluster(8)


def test_brute_force_matches_exhaustive_scan():
    inst = cc.gen_complete_random(7, 0.5, seed=3)
    best = min(cc.clustering_cost(inst, cc.Clustering(a)) for a in cc.partitions(7))
    _c, cost = cc.brute_force_opt(inst)
    assert cost == pytest.approx(best)


@pytest.mark.parametrize("n,seed", [(8, 1), (9, 2), (10, 3), (11, 4)])
def test_rgs_and_subset_dp_agree(n, seed, monkeypatch):
    monkeypatch.setenv("CC_MAX_BRUTE_N", "14")
    inst = cc.gen_complete_random(n, 0.5, seed)
    c1, v1 = _brute_force_rgs(inst)
    c2, v2 = _brute_force_subset_dp(inst)
    assert v1 == pytest.approx(v2, abs=1e-9)
    assert cc.clustering_cost(inst, c1) == pytest.approx(v1)
    assert cc.clustering_cost(inst, c2) == pytest.approx(v2)


def test_subset_dp_weighted_agrees():
    inst = cc.gen_weighted_random(8, seed=6)
    _c1, v1 = _brute_force_rgs(inst)
    _c2, v2 = _brute_force_subset_dp(inst)
    assert v1 == pytest.approx(v2, abs=1e-9)


def test_cap_enforced(monkeypatch):
    monkeypatch.delenv("CC_MAX_BRUTE_N", raising=False)
    inst = cc.gen_complete_random(14, 0.5, seed=1)
    with pytest.raises(ValueError):
        cc.brute_force_opt(inst)


def test_integrality_ratio_conventions():
    allp = cc.gen_complete_random(4, 1.0, seed=1)
    r = cc.integrality_ratio(allp)
    assert r["opt"] == 0.0 and r["lp"] == pytest.approx(0.0, abs=1e-9)
    assert r["ratio"] == 1.0


def test_integrality_ratio_bad_triangle_is_one():
    # objective >= x_bc + (1 - x_bc) = 1 by the triangle constraint, and
    # x = 0 attains it, so LP optimum = OPT = 1 and the ratio is exactly 1
    r = cc.integrality_ratio(k3((1, 1, -1)))
    assert r["opt"] == pytest.approx(1.0)
    assert r["lp"] == pytest.approx(1.0, abs=1e-9)
    assert r["ratio"] == pytest.approx(1.0, abs=1e-6)


def test_integrality_ratio_gap_ti():
    inst = cc.gen_gap_triangle_ineq(4)
    r = cc.integrality_ratio(inst)
    assert r["lp"] <= 12.0 + 1e-6
    assert r["ratio"] >= 10.0 / 9.0 - 1e-6


def test_exact_step_cost_trivial_all_plus():
    inst = cc.gen_complete_random(4, 1.0, seed=1)
    x = cc.LpSolution.constant(4, 0.0)
    r = cc.exact_expected_step_cost(inst, x, cc.get_scheme("complete206"))
    assert r["e_alg_0"] == pytest.approx(0.0)


def test_exact_step_cost_n2_closed_form():
    # with two vertices the pivot is an endpoint, so p_uu = 0 drops one factor:
    # the pair is violated (and removed) exactly when the other vertex stays out
    inst = cc.Instance.complete(np.array([[0, 1], [1, 0]], dtype=np.int8))
    x = cc.LpSolution.from_matrix(np.array([[0.0, 0.4], [0.4, 0.0]]))
    r = cc.exact_expected_step_cost(inst, x, cc.get_scheme("acn_linear"))
    assert r["e_alg_0"] == pytest.approx(0.4)
    assert r["e_lp_0"] == pytest.approx(0.4)
    # the distinct-pivot closed forms themselves give 0.48 / 0.336
    assert cc.edge_cost_given_pivot("+", 0.4, 0.4) == pytest.approx(0.48)
    assert cc.edge_lp_given_pivot("+", 0.4, 0.4, 0.4) == pytest.approx(0.336)


@pytest.mark.parametrize("seed", [5, 6, 7])
def test_enumeration_matches_pairwise_formula(seed):
    inst = cc.gen_complete_random(3, 0.5, seed)
    x, _ = cc.solve_relaxation(inst)
    s = cc.get_scheme("complete206")
    enum = cc.exact_expected_step_cost(inst, x, s)
    formula = cc.step_cost_formula(inst, x, s)
    assert enum["e_alg_0"] == pytest.approx(formula["e_alg_0"], abs=1e-12)
    assert enum["e_lp_0"] == pytest.approx(formula["e_lp_0"], abs=1e-12)


def test_weighted_enumeration_matches_mixture_formula():
    inst = cc.gen_weighted_random(3, seed=4)
    x = cc.LpSolution.constant(3, 0.5)
    s = cc.get_scheme("weighted_ti_150")
    enum = cc.exact_expected_step_cost(inst, x, s)
    formula = cc.step_cost_formula(inst, x, s)
    assert enum["e_alg_0"] == pytest.approx(formula["e_alg_0"], abs=1e-12)
    assert enum["e_lp_0"] == pytest.approx(formula["e_lp_0"], abs=1e-12)


def test_triple_sum_upper_bounds_enumeration():
    # the self-loop terms make the ordered-triple bound an overestimate
    inst = cc.gen_complete_random(5, 0.5, seed=9)
    x = cc.LpSolution.constant(5, 0.5)
    s = cc.get_scheme("complete206")
    enum = cc.exact_expected_step_cost(inst, x, s)
    si = cc.step_inequality_check(inst, x, s, 2.06)
    assert si.lhs >= enum["e_alg_0"] - 1e-12
    assert si.rhs / 2.06 == pytest.approx(enum["e_lp_0"], abs=1e-9)


def test_opt_below_every_rounding():
    inst = cc.gen_complete_random(7, 0.5, seed=12)
    x, _ = cc.solve_relaxation(inst)
    _c, opt = cc.brute_force_opt(inst)
    s = cc.get_scheme("complete206")
    for seed in range(10):
        c, _trace = cc.pivot_round(inst, x, s, seed)
        assert opt <= cc.clustering_cost(inst, c) + 1e-12
    d = cc.derandomize_round(inst, x, s, 2.06)
    assert opt <= cc.clustering_cost(inst, d) + 1e-12


def test_lp_below_opt_small_instances():
    for seed in range(6):
        inst = cc.gen_complete_random(6 + seed % 3, 0.5, seed)
        _x, stats = cc.solve_relaxation(inst)
        _c, opt = cc.brute_force_opt(inst)
        assert stats.objective <= opt + 1e-6
