import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from mwconsensus.clustering import (
    edge_sum,
    edges_between,
    enumerate_paths,
    find_clusters,
    membership_test,
    merge_by_edge_sum,
    path_nullspace,
    positive_tree_partition,
    predict_consensus,
    vertex_joins_cluster,
)
from mwconsensus.errors import NotAPath, PathBudgetWarning
from mwconsensus.generators import random_graph, random_weight
from mwconsensus.graph import MatrixWeight, build_graph
from mwconsensus.subspace import span, zero

e1, e2, e3 = np.eye(3)


def same(a, b):
    return np.max(np.abs(a.projector - b.projector)) <= 1e-9


def test_example1_trees(example1):
    assert positive_tree_partition(example1).as_lists() == [[1, 4], [2], [3]]


def test_case1_trees(case1):
    part = positive_tree_partition(case1.graph())
    assert part.as_lists() == [[1, 2, 3], [4, 5], [6], [7, 8, 9]]
    for tree, used in zip(part.trees, part.tree_edges):
        assert len(used) == len(tree) - 1


def test_definite_connected_graph_is_one_tree(rng):
    g = build_graph(4, 2, [(1, 2, np.eye(2)), (2, 3, np.eye(2)), (2, 4, np.eye(2)), (3, 4, np.diag([1.0, 0.0]))])
    assert positive_tree_partition(g).as_lists() == [[1, 2, 3, 4]]


def test_example1_paths(example1):
    assert enumerate_paths(example1, 2, {1, 4}).paths == ((2, 1), (2, 3, 1))
    assert enumerate_paths(example1, 3, {1, 2, 4}).paths == ((3, 1), (3, 2))


def test_single_route_gives_one_path():
    g = build_graph(3, 2, [(1, 2, np.eye(2)), (2, 3, np.diag([1.0, 0.0]))])
    assert enumerate_paths(g, 3, {1, 2}).paths == ((3, 2),)


def test_source_in_target_rejected(example1):
    with pytest.raises(ValueError):
        enumerate_paths(example1, 1, {1, 4})


def test_path_family_invariants(rng):
    g = random_graph(rng, 7, 2, edge_prob=0.6)
    fam = enumerate_paths(g, 1, {6, 7})
    assert fam.paths
    for p in fam.paths:
        assert p[0] == 1 and p[-1] in {6, 7}
        assert len(set(p)) == len(p)
        assert not set(p[:-1]) & {6, 7}
        assert all(g.has_edge(a, b) for a, b in zip(p, p[1:]))


def test_path_budget_truncates():
    g = build_graph(6, 1, [(i, j, [[1.0]]) for i in range(1, 7) for j in range(i + 1, 7)])
    with pytest.warns(PathBudgetWarning):
        fam = enumerate_paths(g, 1, {6}, max_paths=5)
    assert fam.truncated and len(fam.paths) == 5


def test_example1_path_nullspaces(example1):
    assert same(path_nullspace(example1, [2, 1]), span([e1]))
    assert same(path_nullspace(example1, [2, 3, 1]), span([e2, e3]))
    assert same(path_nullspace(example1, [1, 4]), zero(3))


def test_path_nullspace_rejects_non_paths(example1):
    with pytest.raises(NotAPath):
        path_nullspace(example1, [2, 4])
    with pytest.raises(NotAPath):
        path_nullspace(example1, [1, 2, 1])


def test_example1_membership(example1):
    assert vertex_joins_cluster(example1, 2, {1, 4})
    res = membership_test(example1, 3, {1, 2, 4})
    assert not res.joins
    assert same(res.intersection, span([e2]))


def test_definite_edge_joins():
    g = build_graph(3, 2, [(1, 2, np.diag([1.0, 0.0])), (2, 3, np.eye(2))])
    assert vertex_joins_cluster(g, 3, {2})


def test_no_path_means_no_join():
    g = build_graph(3, 2, [(1, 2, np.eye(2))])
    assert not vertex_joins_cluster(g, 3, {1, 2})


def test_pruned_membership_matches_full_enumeration(rng):
    for _ in range(40):
        g = random_graph(rng, 6, 2)
        target = {1, 2}
        for v in range(3, 7):
            fam = enumerate_paths(g, v, target)
            full = None
            for ns in fam.path_nullspaces:
                full = ns if full is None else full.intersect(ns)
            expected = full is not None and full.dim == 0
            assert membership_test(g, v, target).joins == expected


def test_case2_edge_sums(case2):
    g = case2.graph()
    assert merge_by_edge_sum(g, {1, 2, 3}, {7, 8, 9})
    assert edges_between(g, {1, 2, 3}, {7, 8, 9}) == [(1, 7), (2, 8)]
    assert MatrixWeight.from_array(edge_sum(g, [(1, 4), (1, 7)]), tol=g.tol).is_definite
    assert merge_by_edge_sum(g, {1, 2, 3, 7, 8, 9}, {4, 5})


def test_edge_sum_needs_edges(example1):
    assert not merge_by_edge_sum(example1, {3}, set())
    g = build_graph(4, 2, [(1, 2, np.eye(2)), (3, 4, np.eye(2))])
    assert not merge_by_edge_sum(g, {1, 2}, {3, 4})


def test_example1_clusters(example1):
    part = find_clusters(example1)
    assert part.as_sets() == {frozenset({1, 2, 4}), frozenset({3})}
    assert not part.spanning and not predict_consensus(example1)
    assert part.steps[0].rule == "path_test" and part.steps[0].witness == 2


def test_case1_clusters(case1):
    part = find_clusters(case1.graph())
    assert part.clusters == ((1, 2, 3), (4, 5, 6), (7, 8, 9))
    (step,) = part.steps
    assert step.rule == "edge_sum" and step.edges == ((4, 6), (5, 6))


def test_case2_clusters(case2):
    part = find_clusters(case2.graph())
    assert part.spanning and predict_consensus(case2.graph())
    first = part.steps[0]
    assert first.rule == "edge_sum" and first.edges == ((1, 7), (2, 8))
    assert len(part.steps) == 3
    assert part.provenance(range(1, 10)) == list(part.steps)


def test_positive_spanning_tree_predicts_consensus(rng):
    edges = [(i, i + 1, random_weight(rng, 3, "definite")) for i in range(1, 6)]
    edges.append((1, 6, random_weight(rng, 3, "rank1")))
    assert predict_consensus(build_graph(6, 3, edges))


graphs = st.builds(
    lambda seed, n, d: random_graph(np.random.default_rng(seed), n, d),
    st.integers(0, 2**32 - 1), st.integers(1, 7), st.integers(1, 3),
)


@settings(max_examples=100, deadline=None)
@given(graphs)
def test_partition_properties(g):
    trees = positive_tree_partition(g)
    covered = [v for t in trees.trees for v in t]
    assert sorted(covered) == list(g.vertices)
    part = find_clusters(g)
    assert sorted(v for c in part.clusters for v in c) == list(g.vertices)
    # a positive tree is never split
    for t in trees.trees:
        assert len({part.label_of(v) for v in t}) == 1
    # each merge removes exactly one cluster
    assert len(part.steps) == len(trees.trees) - len(part.clusters)


@settings(max_examples=60, deadline=None)
@given(graphs, st.integers(0, 2**32 - 1))
def test_partition_invariant_under_edge_order(g, seed):
    items = list(zip(g.edges, g.weights))
    np.random.default_rng(seed).shuffle(items)
    shuffled = build_graph(g.n, g.d, [(j, i, w.entries) for (i, j), w in items])
    assert {frozenset(t) for t in positive_tree_partition(shuffled).trees} == set(positive_tree_partition(g).trees)
    assert find_clusters(shuffled).as_sets() == find_clusters(g).as_sets()


@settings(max_examples=100, deadline=None)
@given(graphs)
def test_definite_edge_sum_implies_join(g):
    for v in g.vertices:
        for target in (set(g.vertices) - {v},):
            if not target:
                continue
            if merge_by_edge_sum(g, {v}, target):
                assert vertex_joins_cluster(g, v, target)


@settings(max_examples=100, deadline=None)
@given(graphs)
def test_never_over_merges(g):
    """Spanning cluster implies spectral consensus: merges are sound."""
    from mwconsensus.spectral import analyze_spectrum
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", PathBudgetWarning)
        part = find_clusters(g)
    if part.spanning:
        assert analyze_spectrum(g).consensus_predicted


def test_known_under_merge():
    """The merge tests are sufficient, not necessary: a rigid rank-one K4 stays split."""
    from conftest import under_merge_edges
    from mwconsensus.spectral import analyze_spectrum
    g = build_graph(4, 2, under_merge_edges())
    assert analyze_spectrum(g).consensus_predicted
    part = find_clusters(g)
    assert part.clusters == ((1,), (2,), (3,), (4,)) and not part.truncated
