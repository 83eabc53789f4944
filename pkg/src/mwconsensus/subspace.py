"""Linear subspaces of R^d held as orthonormal bases.

All rank decisions use one relative tolerance, ``RANK_TOL``, scaled by
``max(1, largest singular value)``. Subspaces are compared through their
orthogonal projectors since bases are not unique.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import reduce

import numpy as np

from .errors import AmbientMismatch

RANK_TOL = 1e-9


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


def _column_space(m: np.ndarray, tol: float) -> np.ndarray:
    """Orthonormal basis for range(m) by SVD."""
    if m.size == 0:
        return np.zeros((m.shape[0], 0))
    u, s, _ = np.linalg.svd(m, full_matrices=False)
    cutoff = tol * max(1.0, s[0] if s.size else 0.0)
    return u[:, s > cutoff]


@dataclass(frozen=True, eq=False)
class Subspace:
    """Subspace of R^ambient spanned by the orthonormal columns of ``basis``."""

    ambient: int
    basis: np.ndarray

    def __post_init__(self):
        b = np.asarray(self.basis, dtype=float).reshape(self.ambient, -1)
        object.__setattr__(self, "basis", _frozen(b))

    @property
    def dim(self) -> int:
        return self.basis.shape[1]

    @property
    def projector(self) -> np.ndarray:
        return self.basis @ self.basis.T

    def _check(self, other: "Subspace") -> None:
        if self.ambient != other.ambient:
            raise AmbientMismatch(f"ambient dimensions differ: {self.ambient} vs {other.ambient}")

    def sum(self, other: "Subspace", tol: float = RANK_TOL) -> "Subspace":
        self._check(other)
        return Subspace(self.ambient, _column_space(np.hstack([self.basis, other.basis]), tol))

    def intersect(self, other: "Subspace", tol: float = RANK_TOL) -> "Subspace":
        self._check(other)
        if self.dim == 0 or other.dim == 0:
            return zero(self.ambient)
        eye = np.eye(self.ambient)
        stacked = np.vstack([eye - self.projector, eye - other.projector])
        return Subspace(self.ambient, _kernel(stacked, tol))

    def contains(self, v, tol: float = 1e-9) -> bool:
        v = np.asarray(v, dtype=float).ravel()
        if v.shape[0] != self.ambient:
            raise AmbientMismatch(f"vector of length {v.shape[0]} in R^{self.ambient}")
        return self.residual(v) <= tol * max(np.linalg.norm(v), 1.0)

    def residual(self, v) -> float:
        """Distance from ``v`` to the subspace."""
        v = np.asarray(v, dtype=float).ravel()
        return float(np.linalg.norm(v - self.basis @ (self.basis.T @ v)))

    def same_as(self, other: "Subspace", tol: float = 1e-9) -> bool:
        self._check(other)
        return self.dim == other.dim and np.max(np.abs(self.projector - other.projector), initial=0.0) <= tol

    def __repr__(self):
        return f"Subspace(ambient={self.ambient}, dim={self.dim})"


def _kernel(m: np.ndarray, tol: float) -> np.ndarray:
    """Orthonormal basis for the right nullspace of ``m``."""
    n = m.shape[1]
    _, s, vt = np.linalg.svd(m, full_matrices=True)
    cutoff = tol * max(1.0, s[0] if s.size else 0.0)
    rank = int(np.count_nonzero(s > cutoff))
    return vt[rank:].T.reshape(n, n - rank)


def zero(ambient: int) -> Subspace:
    return Subspace(ambient, np.zeros((ambient, 0)))


def full(ambient: int) -> Subspace:
    return Subspace(ambient, np.eye(ambient))


def span(vectors, ambient: int | None = None, tol: float = RANK_TOL) -> Subspace:
    """Subspace spanned by ``vectors`` (rows)."""
    vecs = np.atleast_2d(np.asarray(vectors, dtype=float))
    if ambient is None:
        ambient = vecs.shape[1]
    if vecs.size == 0:
        return zero(ambient)
    if vecs.shape[1] != ambient:
        raise AmbientMismatch(f"vectors of length {vecs.shape[1]} in R^{ambient}")
    return Subspace(ambient, _column_space(vecs.T, tol))


def nullspace_of(m, tol: float = RANK_TOL) -> Subspace:
    """Nullspace of a symmetric positive-semidefinite matrix.

    Eigenvectors whose eigenvalues are at most ``tol * max(1, |lambda|_max)``.
    """
    m = np.asarray(m, dtype=float)
    w, v = np.linalg.eigh((m + m.T) / 2)
    scale = max(1.0, float(np.max(np.abs(w), initial=0.0)))
    return Subspace(m.shape[0], v[:, w <= tol * scale])


def subspace_sum(*spaces: Subspace, tol: float = RANK_TOL) -> Subspace:
    return reduce(lambda a, b: a.sum(b, tol), spaces)


def intersect(*spaces: Subspace, tol: float = RANK_TOL) -> Subspace:
    return reduce(lambda a, b: a.intersect(b, tol), spaces)


def dimension(s: Subspace) -> int:
    return s.dim


def contains(s: Subspace, v, tol: float = 1e-9) -> bool:
    return s.contains(v, tol)
