"""Random matrix-weighted graphs for randomized cross-checks."""
from __future__ import annotations

import numpy as np

from .graph import MatrixWeightedGraph, build_graph

WEIGHT_KINDS = ("definite", "semidefinite", "rank1")


def random_weight(rng: np.random.Generator, d: int, kind: str) -> np.ndarray:
    """Random d x d PSD weight.

    ``definite`` has full rank, ``rank1`` has rank one, and ``semidefinite``
    has a rank drawn uniformly from 1..d-1 (rank one when d <= 2). For d = 1
    every kind yields a positive scalar.
    """
    if d == 1:
        return np.array([[rng.uniform(0.5, 2.0)]])
    if kind == "definite":
        rank = d
    elif kind == "rank1":
        rank = 1
    elif kind == "semidefinite":
        rank = int(rng.integers(1, d))
    else:
        raise ValueError(f"unknown weight kind {kind!r}")
    q, _ = np.linalg.qr(rng.standard_normal((d, d)))
    basis = q[:, :rank]
    gains = rng.uniform(0.5, 2.0, size=rank)
    w = (basis * gains) @ basis.T
    return (w + w.T) / 2


def random_graph(
    rng: np.random.Generator,
    n: int,
    d: int,
    edge_prob: float = 0.5,
    kind_probs=(1 / 3, 1 / 3, 1 / 3),
) -> MatrixWeightedGraph:
    """Random graph on n vertices: a random spanning tree plus G(n, p) extra edges.

    Each edge weight kind is drawn from ``WEIGHT_KINDS`` with ``kind_probs``.
    """
    pairs = set()
    order = rng.permutation(n) + 1
    for k in range(1, n):
        a, b = int(order[k]), int(order[rng.integers(0, k)])
        pairs.add((min(a, b), max(a, b)))
    for i in range(1, n + 1):
        for j in range(i + 1, n + 1):
            if rng.random() < edge_prob:
                pairs.add((i, j))
    edges = []
    for i, j in sorted(pairs):
        kind = WEIGHT_KINDS[rng.choice(len(WEIGHT_KINDS), p=kind_probs)]
        edges.append((i, j, random_weight(rng, d, kind)))
    return build_graph(n, d, edges)
