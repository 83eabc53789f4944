"""Graph-theoretic cluster analysis.

The pipeline is: split the vertices into positive trees (components of the
positive-definite edges), then grow clusters by merging whenever a path
test or an edge-sum test proves two clusters share their equilibrium.

Both merge tests are sufficient conditions, so the result can only
under-merge. Compare against :func:`mwconsensus.spectral.analyze_spectrum`
to detect that.
"""
from __future__ import annotations

import warnings
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .errors import NotAPath, PathBudgetWarning
from .graph import EdgeKind, MatrixWeightedGraph, MatrixWeight
from .subspace import RANK_TOL, Subspace, zero

MAX_PATHS = 10_000


def _edge(i: int, j: int) -> tuple:
    return (i, j) if i < j else (j, i)


@dataclass(frozen=True)
class PositiveTreePartition:
    """Vertex sets joined by positive-definite edges, each with a BFS spanning tree."""

    trees: tuple
    tree_edges: tuple

    def tree_of(self, v: int) -> frozenset:
        for t in self.trees:
            if v in t:
                return t
        raise KeyError(v)

    def as_lists(self) -> list:
        return [sorted(t) for t in self.trees]


def positive_tree_partition(g: MatrixWeightedGraph) -> PositiveTreePartition:
    seen = set()
    trees, tree_edges = [], []
    for s in g.vertices:
        if s in seen:
            continue
        members, used = [s], []
        seen.add(s)
        queue = deque([s])
        while queue:
            u = queue.popleft()
            for w in g.neighbors(u):
                if w not in seen and g.weight(u, w).is_definite:
                    seen.add(w)
                    members.append(w)
                    used.append(_edge(u, w))
                    queue.append(w)
        trees.append(frozenset(members))
        tree_edges.append(tuple(sorted(used)))
    return PositiveTreePartition(tuple(trees), tuple(tree_edges))


@dataclass(frozen=True)
class PathFamily:
    source: int
    target: frozenset
    paths: tuple
    path_nullspaces: tuple
    truncated: bool = False


def _walk(g: MatrixWeightedGraph, source: int, target: frozenset, tol: float):
    """Depth-first simple paths from ``source`` that stop at the first target vertex.

    Yields ``(path, nullspace)``; the nullspace is accumulated along the way.
    """
    path = [source]
    on_path = {source}

    def rec(u, ns):
        for w in g.neighbors(u):
            if w in on_path:
                continue
            ns2 = ns.sum(g.weight(u, w).nullspace, tol)
            if w in target:
                yield tuple(path) + (w,), ns2
            else:
                path.append(w)
                on_path.add(w)
                yield from rec(w, ns2)
                path.pop()
                on_path.discard(w)

    yield from rec(source, zero(g.d))


def enumerate_paths(
    g: MatrixWeightedGraph, source: int, target, max_paths: int = MAX_PATHS, tol: float = RANK_TOL
) -> PathFamily:
    """All loop-free paths from ``source`` into ``target`` whose interior avoids ``target``."""
    target = frozenset(target)
    if source in target:
        raise ValueError(f"source {source} lies inside the target set")
    paths, spaces = [], []
    truncated = False
    for p, ns in _walk(g, source, target, tol):
        if len(paths) >= max_paths:
            truncated = True
            warnings.warn(f"path enumeration from {source} stopped at {max_paths} paths", PathBudgetWarning, stacklevel=2)
            break
        paths.append(p)
        spaces.append(ns)
    return PathFamily(source, target, tuple(paths), tuple(spaces), truncated)


def path_nullspace(g: MatrixWeightedGraph, path, tol: float = RANK_TOL) -> Subspace:
    """Sum of the edge-weight nullspaces along ``path``."""
    path = list(path)
    if len(set(path)) != len(path):
        raise NotAPath(f"{path} repeats a vertex")
    ns = zero(g.d)
    for u, w in zip(path, path[1:]):
        if not g.has_edge(u, w):
            raise NotAPath(f"{u} and {w} are not adjacent")
        ns = ns.sum(g.weight(u, w).nullspace, tol)
    return ns


@dataclass(frozen=True)
class Membership:
    """Outcome of testing whether ``vertex`` shares the equilibrium of ``cluster``."""

    vertex: int
    cluster: frozenset
    joins: bool
    truncated: bool
    paths_checked: int
    intersection: Subspace | None
    edges: tuple


def _covers(a: Subspace, b: Subspace, tol: float) -> bool:
    """True if b is contained in a."""
    return a.dim >= b.dim and a.sum(b, tol).dim == a.dim


def membership_test(
    g: MatrixWeightedGraph, v: int, cluster, max_paths: int = MAX_PATHS, tol: float = RANK_TOL
) -> Membership:
    """Intersect path nullspaces from ``v`` into ``cluster`` until the intersection is {0}.

    A partial path whose accumulated nullspace already contains the running
    intersection is not extended: every completion of it would leave the
    intersection unchanged.
    """
    cluster = frozenset(cluster)
    if v in cluster:
        raise ValueError(f"vertex {v} already belongs to the cluster")
    state = {"inter": None, "count": 0, "truncated": False}
    used = set()
    on_path = {v}

    def rec(u, ns, edges):
        for w in g.neighbors(u):
            if w in on_path:
                continue
            e = _edge(u, w)
            ns2 = ns.sum(g.weight(u, w).nullspace, tol)
            inter = state["inter"]
            if inter is not None and _covers(ns2, inter, tol):
                continue
            if w in cluster:
                if state["count"] >= max_paths:
                    state["truncated"] = True
                    return True
                state["count"] += 1
                used.update(edges)
                used.add(e)
                state["inter"] = ns2 if inter is None else inter.intersect(ns2, tol)
                if state["inter"].dim == 0:
                    return True
            else:
                on_path.add(w)
                stop = rec(w, ns2, edges + (e,))
                on_path.discard(w)
                if stop:
                    return True
        return False

    rec(v, zero(g.d), ())
    inter = state["inter"]
    joins = inter is not None and inter.dim == 0
    return Membership(v, cluster, joins, state["truncated"] and not joins, state["count"], inter, tuple(sorted(used)))


def vertex_joins_cluster(
    g: MatrixWeightedGraph, v: int, cluster, max_paths: int = MAX_PATHS, tol: float = RANK_TOL
) -> bool:
    res = membership_test(g, v, cluster, max_paths, tol)
    if res.truncated:
        warnings.warn(
            f"vertex {v}: path budget {max_paths} exhausted with a nonzero intersection; answering False",
            PathBudgetWarning,
            stacklevel=2,
        )
    return res.joins


def edges_between(g: MatrixWeightedGraph, c1, c2) -> list:
    c1, c2 = set(c1), set(c2)
    return [e for e in g.edges if (e[0] in c1 and e[1] in c2) or (e[0] in c2 and e[1] in c1)]


def edge_sum(g: MatrixWeightedGraph, edges) -> np.ndarray:
    total = np.zeros((g.d, g.d))
    for e in edges:
        total += g.weight(*e).entries
    return total


def merge_by_edge_sum(g: MatrixWeightedGraph, c1, c2) -> bool:
    """True iff the weights of all edges between c1 and c2 sum to a positive-definite matrix."""
    between = edges_between(g, c1, c2)
    if not between:
        return False
    return MatrixWeight.from_array(edge_sum(g, between), tol=g.tol).kind is EdgeKind.POSITIVE_DEFINITE


@dataclass(frozen=True)
class MergeStep:
    """One merge step of find_clusters: ``absorbed`` joined ``into``.

    ``rule`` is ``"edge_sum"`` (the summed weights of ``edges`` are positive
    definite) or ``"path_test"`` (vertex ``witness`` in ``absorbed`` has
    path nullspaces into ``into`` with trivial intersection; ``edges`` are
    the edges on the paths that were checked).
    """

    into: tuple
    absorbed: tuple
    rule: str
    edges: tuple
    witness: int | None = None
    paths_checked: int = 0

    def as_dict(self) -> dict:
        return {
            "into": list(self.into),
            "absorbed": list(self.absorbed),
            "rule": self.rule,
            "edges": [list(e) for e in self.edges],
            "witness": self.witness,
            "paths_checked": self.paths_checked,
        }


@dataclass(frozen=True)
class ClusterPartition:
    n: int
    clusters: tuple
    trees: PositiveTreePartition
    steps: tuple = ()
    truncated: tuple = field(default=())

    @property
    def spanning(self) -> bool:
        return len(self.clusters) == 1 and len(self.clusters[0]) == self.n

    def label_of(self, v: int) -> int:
        for k, c in enumerate(self.clusters):
            if v in c:
                return k
        raise KeyError(v)

    def as_sets(self) -> set:
        return {frozenset(c) for c in self.clusters}

    def provenance(self, cluster) -> list:
        """Merge steps whose result lies inside ``cluster``."""
        c = set(cluster)
        return [s for s in self.steps if set(s.into) | set(s.absorbed) <= c]


def find_clusters(g: MatrixWeightedGraph, max_paths: int = MAX_PATHS, tol: float = RANK_TOL) -> ClusterPartition:
    """Start from positive trees and merge until a full sweep finds nothing.

    Clusters are visited in order of their smallest vertex and the sweep
    restarts after every merge. For each ordered pair (C_m, C_l) the cheap
    edge-sum test runs first, then the path test for each vertex of C_l
    against C_m.
    """
    trees = positive_tree_partition(g)
    clusters = [frozenset(t) for t in trees.trees]
    steps = []
    cache = {}
    truncated = set()

    def test(v, target):
        key = (v, target)
        if key not in cache:
            cache[key] = membership_test(g, v, target, max_paths, tol)
        return cache[key]

    def by_edge_sum(cm, cl):
        between = edges_between(g, cm, cl)
        if between and MatrixWeight.from_array(edge_sum(g, between), tol=g.tol).is_definite:
            return MergeStep(tuple(sorted(cm)), tuple(sorted(cl)), "edge_sum", tuple(between))
        return None

    def by_paths(cm, cl):
        for i in sorted(cl):
            res = test(i, cm)
            if res.joins:
                return MergeStep(tuple(sorted(cm)), tuple(sorted(cl)), "path_test", res.edges, i, res.paths_checked)
            if res.truncated:
                truncated.add((i, tuple(sorted(cm))))
        return None

    def sweep(rule):
        order = sorted(clusters, key=min)
        for cm in order:
            for cl in order:
                if cl is not cm:
                    step = rule(cm, cl)
                    if step is not None:
                        return cm, cl, step
        return None

    while True:
        found = sweep(by_edge_sum) or sweep(by_paths)
        if found is None:
            break
        cm, cl, step = found
        clusters = [c for c in clusters if c is not cm and c is not cl] + [cm | cl]
        steps.append(step)

    if truncated:
        warnings.warn(f"{len(truncated)} membership queries hit the path budget", PathBudgetWarning, stacklevel=2)
    final = tuple(tuple(sorted(c)) for c in sorted(clusters, key=min))
    return ClusterPartition(g.n, final, trees, tuple(steps), tuple(sorted(truncated)))


def predict_consensus(g: MatrixWeightedGraph, max_paths: int = MAX_PATHS) -> bool:
    return find_clusters(g, max_paths).spanning
