from itertools import combinations

import numpy as np
import pytest

from sepnode.bench.metrics import modularity, nmi
from sepnode.estimate import perfect_estimator
from sepnode.graph import Graph, Partition, connected_components
from sepnode.pipeline import (
    DegenerateSeparation,
    DetectConfig,
    clamped_modularity_assign,
    detect,
    greedy_assign,
    validate_separation_set,
)
from sepnode.qubo import (
    build_separation_qubo,
    modularity_qubo_onehot,
    onehot_penalty_bound,
    separation_penalty,
)
from sepnode.solve import AnnealSchedule, exhaustive

from conftest import planted_graph

FAST = AnnealSchedule(sweeps=200, restarts=5)


def two_cliques(size=5):
    a = list(combinations(range(size), 2))
    b = [(u + size, v + size) for u, v in a]
    g = Graph.from_edges(2 * size, a + b + [(size - 1, size)])
    return g, Partition((0,) * size + (1,) * size)


def test_validate_examples(triangle):
    truth = Partition((0, 0, 1))
    res = validate_separation_set(triangle, truth, {2})
    assert res.is_valid and res.is_injective
    # community {2} keeps no non-separation node, so it is never detected
    assert not res.is_surjective
    assert res.cores == (frozenset({0, 1}),)
    assert res.refinement == (0,)
    res = validate_separation_set(triangle, truth, set())
    assert not res.is_valid and res.refinement == (None,)
    res = validate_separation_set(triangle, truth, {0, 1, 2})
    assert res.is_valid and res.is_injective and not res.is_surjective
    assert res.cores == ()


def test_validate_two_cores_same_community():
    g = Graph.from_edges(4, [(0, 1), (1, 2), (2, 3)])
    res = validate_separation_set(g, Partition((0, 0, 0, 0)), {1})
    assert res.is_valid and not res.is_injective and res.is_surjective


def test_non_surjective_minimum_is_flagged():
    # community {3} sits between two triangles and touches only other communities
    g = Graph.from_edges(7, [(0, 1), (1, 2), (0, 2), (2, 3), (3, 4), (4, 5), (5, 6), (4, 6)])
    truth = Partition((0, 0, 0, 1, 2, 2, 2))
    q = build_separation_qubo(g, perfect_estimator(g, truth))
    res = exhaustive(q)
    sep = {v for v in range(g.n) if res.best_x[v] == 0}
    assert sep == {3}
    check = validate_separation_set(g, truth, sep)
    assert check.is_valid and not check.is_surjective and not check.is_bijective
    surjective_min = min(
        len(s)
        for r in range(g.n + 1)
        for s in combinations(range(g.n), r)
        if validate_separation_set(g, truth, s).is_surjective
    )
    assert surjective_min == 2 > len(sep)


def test_greedy_prefers_larger_count():
    # s = 4 has two edges into core {0, 1} and one into core {2, 3}
    g = Graph.from_edges(5, [(0, 1), (2, 3), (4, 0), (4, 1), (4, 2)])
    part = greedy_assign(g, [{0, 1}, {2, 3}], {4})
    assert part[4] == part[0]


def test_greedy_chain_updates_counts():
    # core A = {0, 1, 2}, core B = {5, 6}; chain A - s1(3) - s2(4) - B
    # s1 has two edges into A so goes first; s2 then sees one edge to A (via s1) and one to B
    g = Graph.from_edges(7, [(0, 1), (1, 2), (5, 6), (3, 0), (3, 1), (3, 4), (4, 5)])
    stats = {}
    part = greedy_assign(g, [{0, 1, 2}, {5, 6}], {3, 4}, stats)
    assert part[3] == part[0]
    # tie between A (through s1) and B: lowest community id wins
    assert part[4] == part[0]
    assert stats["greedy_rounds"] == 2


def test_greedy_tie_goes_to_lowest_community():
    g = Graph.from_edges(5, [(0, 1), (2, 3), (4, 0), (4, 2)])
    part = greedy_assign(g, [{2, 3}, {0, 1}], {4})
    assert part[4] == part[2] == 0


def test_greedy_leftover_components_become_communities():
    g = Graph.from_edges(6, [(0, 1), (2, 3), (4, 5)])
    part = greedy_assign(g, [{0, 1}], {2, 3, 4, 5})
    assert part.k == 3
    assert part[2] == part[3] != part[4] == part[5]


@pytest.mark.parametrize("seed", range(5))
def test_greedy_counters_bounded(seed):
    rng = np.random.default_rng(seed)
    g, truth = planted_graph(rng, 30, 3)
    sep = set(int(v) for v in rng.choice(30, size=10, replace=False))
    cores = connected_components(g, set(range(30)) - sep)
    stats = {}
    greedy_assign(g, cores, sep, stats)
    assert stats["greedy_updates"] <= sum(int(g.degrees[s]) for s in sep)
    assert stats["greedy_rounds"] <= len(sep)


def test_greedy_rejects_overlap():
    g = Graph.from_edges(3, [(0, 1), (1, 2)])
    with pytest.raises(ValueError):
        greedy_assign(g, [{0, 1}], {1, 2})


def test_clamped_empty_sep_set():
    g, truth = two_cliques()
    part = clamped_modularity_assign(g, truth.communities(), set(), FAST)
    assert part == truth


def test_clamped_single_node_agrees_with_greedy():
    # node 8 has three edges into clique {0..3} and one into clique {4..7}
    a = list(combinations(range(4), 2))
    b = [(u + 4, v + 4) for u, v in a]
    g = Graph.from_edges(9, a + b + [(8, 0), (8, 1), (8, 2), (8, 4)])
    cores = [set(range(4)), set(range(4, 8))]
    stats = {}
    clamped = clamped_modularity_assign(g, cores, {8}, FAST, stats=stats)
    assert clamped == greedy_assign(g, cores, {8})
    assert clamped[8] == 0
    assert stats["clamped_vars"] == 2


@pytest.mark.parametrize("seed", range(4))
def test_auto_penalty_keeps_optimum_one_hot(seed):
    rng = np.random.default_rng(seed)
    g, truth = planted_graph(rng, 9, 2)
    if g.m == 0:
        pytest.skip("edgeless draw")
    clamp = {0: truth[0], 8: 1 - truth[0]} if truth[0] != truth[8] else {0: 0}
    lam = 1.0001 * onehot_penalty_bound(g)
    q = modularity_qubo_onehot(g, 2, clamp, lam)
    best = exhaustive(q).best_x.reshape(-1, 2)
    assert (best.sum(axis=1) == 1).all()


def test_clamped_needs_cores():
    g, _ = two_cliques()
    with pytest.raises(ValueError):
        clamped_modularity_assign(g, [], set(range(g.n)))


def test_detect_two_cliques_nu():
    g, truth = two_cliques()
    out = detect(g, DetectConfig(schedule=FAST))
    assert out.partition.communities() == truth.communities()
    best = max(
        modularity(g, Partition.from_labels([(mask >> v) & 1 for v in range(g.n)]))
        for mask in range(1, 1 << (g.n - 1))
    )
    assert modularity(g, out.partition) == pytest.approx(best)


@pytest.mark.parametrize("seed", range(6))
def test_detect_perfect_exhaustive_is_valid(seed):
    rng = np.random.default_rng(seed)
    g, truth = planted_graph(rng, int(rng.integers(6, 15)), 3)
    cfg = DetectConfig(estimator="perfect", solver="exhaustive")
    try:
        out = detect(g, cfg, truth)
    except DegenerateSeparation:
        pytest.skip("every edge crosses communities")
    labels = perfect_estimator(g, truth)
    x = [0 if v in out.sep_set else 1 for v in range(g.n)]
    assert separation_penalty(g, labels, x) == 0
    assert validate_separation_set(g, truth, out.sep_set).is_valid


def test_detect_single_community():
    g, _ = two_cliques()
    truth = Partition((0,) * g.n)
    out = detect(g, DetectConfig(estimator="perfect", schedule=FAST), truth)
    assert out.sep_set == () and out.partition.k == 1


def test_detect_degenerate_all_separation():
    g = Graph.from_edges(4, [(0, 1), (1, 2), (2, 3)])
    truth = Partition((0, 1, 2, 3))
    with pytest.raises(DegenerateSeparation) as info:
        detect(g, DetectConfig(estimator="perfect", schedule=FAST), truth)
    assert len(info.value.sep_set) == 2
    assert info.value.stats["separation_edges"] == 3


@pytest.mark.parametrize("assign", ["greedy", "clamped"])
def test_detect_deterministic_and_covering(assign):
    rng = np.random.default_rng(7)
    g, truth = planted_graph(rng, 40, 3, 0.6, 0.05)
    cfg = DetectConfig(
        assign=assign,
        penalty_weight="auto",
        schedule=AnnealSchedule(sweeps=3000 if assign == "clamped" else 200, restarts=3, seed=4),
    )
    a, b = detect(g, cfg), detect(g, cfg)
    assert a.partition == b.partition and a.sep_set == b.sep_set
    assert a.partition.n == g.n
    for core in connected_components(g, set(range(g.n)) - set(a.sep_set)):
        assert len({a.partition[v] for v in core}) == 1
    assert nmi(a.partition, truth) > 0.8
    data = a.to_dict()
    assert data["config"]["schedule"]["seed"] == 4
    assert sorted(int(k) for k in data["partition"]) == list(range(g.n))


def test_detect_rejects_unknown_assign():
    g, _ = two_cliques()
    with pytest.raises(ValueError):
        detect(g, DetectConfig(assign="magic"))
