"""Matrix-weighted graphs and their structural matrices.

Vertices are labelled ``1..n`` throughout the public API. Vertex ``i``
occupies rows ``(i-1)*d : i*d`` of every stacked vector and block matrix.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import (
    AsymmetricWeight,
    DimensionMismatch,
    DuplicateEdge,
    NotPositiveSemidefinite,
    SelfLoop,
    ZeroWeight,
)
from .subspace import Subspace

PSD_TOL = 1e-9
SYM_TOL = 1e-12


class EdgeKind(enum.Enum):
    POSITIVE_DEFINITE = "positive_definite"
    POSITIVE_SEMIDEFINITE = "positive_semidefinite"
    ZERO = "zero"


@dataclass(frozen=True, eq=False)
class MatrixWeight:
    """A validated d x d symmetric positive-semidefinite edge weight.

    Build with :meth:`from_array`. When the weight is semidefinite, the
    eigenvalues that fall inside the tolerance band are set to exactly zero
    so that the stored matrix has the rank it was classified with.
    """

    entries: np.ndarray
    kind: EdgeKind
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    tol: float = PSD_TOL

    @classmethod
    def from_array(cls, a, tol: float = PSD_TOL, sym_tol: float = SYM_TOL) -> "MatrixWeight":
        a = np.atleast_2d(np.asarray(a, dtype=float))
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise DimensionMismatch(f"weight must be square, got shape {a.shape}")
        if not np.all(np.isfinite(a)):
            raise NotPositiveSemidefinite("weight has non-finite entries")
        asym = float(np.max(np.abs(a - a.T), initial=0.0))
        if asym > sym_tol:
            raise AsymmetricWeight(f"|A - A^T| = {asym:.3g} exceeds {sym_tol:g}")
        a = (a + a.T) / 2
        if not np.any(a):
            return cls(_freeze(a), EdgeKind.ZERO, _freeze(np.zeros(len(a))), _freeze(np.eye(len(a))), tol)
        w, v = np.linalg.eigh(a)
        scale = max(1.0, float(np.max(np.abs(w))))
        if w[0] < -tol * scale:
            raise NotPositiveSemidefinite(f"smallest eigenvalue {w[0]:.6g} below -{tol:g}*{scale:.6g}")
        if w[0] > tol * scale:
            return cls(_freeze(a), EdgeKind.POSITIVE_DEFINITE, _freeze(w), _freeze(v), tol)
        small = w <= tol * scale
        if np.any(w[small] != 0.0):
            w = np.where(small, 0.0, w)
            a = (v * w) @ v.T
            a = (a + a.T) / 2
        return cls(_freeze(a), EdgeKind.POSITIVE_SEMIDEFINITE, _freeze(w), _freeze(v), tol)

    @property
    def d(self) -> int:
        return self.entries.shape[0]

    @property
    def is_definite(self) -> bool:
        return self.kind is EdgeKind.POSITIVE_DEFINITE

    @cached_property
    def nullspace(self) -> Subspace:
        if self.kind is EdgeKind.POSITIVE_DEFINITE:
            return Subspace(self.d, np.zeros((self.d, 0)))
        scale = max(1.0, float(np.max(np.abs(self.eigenvalues), initial=0.0)))
        return Subspace(self.d, self.eigenvectors[:, self.eigenvalues <= self.tol * scale])


def _freeze(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


def classify_edge(w: MatrixWeight) -> EdgeKind:
    return w.kind


def classify_matrix(a, tol: float = PSD_TOL) -> EdgeKind:
    """Classify a raw symmetric PSD matrix (e.g. a sum of edge weights)."""
    return MatrixWeight.from_array(a, tol=tol).kind


@dataclass(frozen=True, eq=False)
class MatrixWeightedGraph:
    """Undirected graph with one d x d PSD weight per edge.

    ``edges`` holds ``(i, j)`` with ``i < j`` in lexicographic order; that is
    also the row order of the incidence matrix, with ``i`` as the tail.
    """

    n: int
    d: int
    edges: tuple
    weights: tuple
    tol: float = PSD_TOL
    _index: dict = field(init=False, repr=False, compare=False)
    _neighbors: tuple = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "_index", {e: k for k, e in enumerate(self.edges)})
        nbrs = [[] for _ in range(self.n + 1)]
        for i, j in self.edges:
            nbrs[i].append(j)
            nbrs[j].append(i)
        object.__setattr__(self, "_neighbors", tuple(tuple(sorted(x)) for x in nbrs))

    @property
    def m(self) -> int:
        return len(self.edges)

    @property
    def vertices(self) -> range:
        return range(1, self.n + 1)

    def neighbors(self, i: int) -> tuple:
        return self._neighbors[i]

    def has_edge(self, i: int, j: int) -> bool:
        return (min(i, j), max(i, j)) in self._index

    def weight(self, i: int, j: int) -> MatrixWeight:
        return self.weights[self._index[(min(i, j), max(i, j))]]

    def edge_kinds(self) -> dict:
        return {e: w.kind for e, w in zip(self.edges, self.weights)}

    def __repr__(self):
        return f"MatrixWeightedGraph(n={self.n}, d={self.d}, m={self.m})"


def build_graph(n: int, d: int, weighted_edges, tol: float = PSD_TOL, sym_tol: float = SYM_TOL) -> MatrixWeightedGraph:
    """Validate ``(i, j, matrix)`` triples into a :class:`MatrixWeightedGraph`."""
    if n < 1 or d < 1:
        raise DimensionMismatch(f"need n >= 1 and d >= 1, got n={n}, d={d}")
    found = {}
    for item in weighted_edges:
        i, j, a = item
        i, j = int(i), int(j)
        if not (1 <= i <= n and 1 <= j <= n):
            raise DimensionMismatch(f"edge ({i}, {j}) references a vertex outside 1..{n}")
        if i == j:
            raise SelfLoop(f"self-loop at vertex {i}")
        key = (min(i, j), max(i, j))
        if key in found:
            raise DuplicateEdge(f"edge {key} given more than once")
        a = np.atleast_2d(np.asarray(a, dtype=float))
        if a.shape != (d, d):
            raise DimensionMismatch(f"weight of edge {key} has shape {a.shape}, expected ({d}, {d})")
        try:
            w = MatrixWeight.from_array(a, tol=tol, sym_tol=sym_tol)
        except (AsymmetricWeight, NotPositiveSemidefinite) as exc:
            raise type(exc)(f"edge {key}: {exc}") from None
        if w.kind is EdgeKind.ZERO:
            raise ZeroWeight(f"edge {key} has an all-zero weight; omit the edge instead")
        found[key] = w
    edges = tuple(sorted(found))
    return MatrixWeightedGraph(n, d, edges, tuple(found[e] for e in edges), tol)


def _blk(i: int, d: int) -> slice:
    return slice((i - 1) * d, i * d)


def adjacency_matrix(g: MatrixWeightedGraph) -> np.ndarray:
    a = np.zeros((g.n * g.d, g.n * g.d))
    for (i, j), w in zip(g.edges, g.weights):
        a[_blk(i, g.d), _blk(j, g.d)] = w.entries
        a[_blk(j, g.d), _blk(i, g.d)] = w.entries
    return a


def degree_matrix(g: MatrixWeightedGraph) -> np.ndarray:
    deg = np.zeros((g.n * g.d, g.n * g.d))
    for (i, j), w in zip(g.edges, g.weights):
        deg[_blk(i, g.d), _blk(i, g.d)] += w.entries
        deg[_blk(j, g.d), _blk(j, g.d)] += w.entries
    return deg


def laplacian(g: MatrixWeightedGraph) -> np.ndarray:
    """L = D - A assembled block by block."""
    return degree_matrix(g) - adjacency_matrix(g)


def incidence_matrix(g: MatrixWeightedGraph) -> np.ndarray:
    """m x n incidence matrix; row k is +1 at the tail (smaller vertex), -1 at the head."""
    h = np.zeros((g.m, g.n))
    for k, (i, j) in enumerate(g.edges):
        h[k, i - 1] = 1.0
        h[k, j - 1] = -1.0
    return h


def laplacian_from_incidence(g: MatrixWeightedGraph) -> np.ndarray:
    """L = (H kron I_d)^T blkdiag(A_k) (H kron I_d)."""
    if g.m == 0:
        return np.zeros((g.n * g.d, g.n * g.d))
    hbar = np.kron(incidence_matrix(g), np.eye(g.d))
    blocks = np.zeros((g.m * g.d, g.m * g.d))
    for k, w in enumerate(g.weights):
        blocks[k * g.d:(k + 1) * g.d, k * g.d:(k + 1) * g.d] = w.entries
    return hbar.T @ blocks @ hbar


def quadratic_form(g: MatrixWeightedGraph, v) -> float:
    """Edge sum of (v_i - v_j)^T A_ij (v_i - v_j)."""
    v = np.asarray(v, dtype=float).ravel()
    if v.shape[0] != g.n * g.d:
        raise DimensionMismatch(f"vector has length {v.shape[0]}, expected {g.n * g.d}")
    blocks = v.reshape(g.n, g.d)
    total = 0.0
    for (i, j), w in zip(g.edges, g.weights):
        diff = blocks[i - 1] - blocks[j - 1]
        total += float(diff @ w.entries @ diff)
    return total


def consensus_basis(n: int, d: int) -> np.ndarray:
    """The dn x d matrix 1_n kron I_d."""
    return np.kron(np.ones((n, 1)), np.eye(d))


def average(x, n: int, d: int) -> np.ndarray:
    return np.asarray(x, dtype=float).reshape(n, d).mean(axis=0)
