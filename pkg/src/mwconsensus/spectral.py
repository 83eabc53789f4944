"""Eigen-analysis of the matrix-weighted Laplacian."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import EigensolverFailure, NotConsensusGraph
from .graph import MatrixWeightedGraph, consensus_basis, laplacian
from .subspace import RANK_TOL, Subspace


@dataclass(frozen=True, eq=False)
class SpectralReport:
    eigenvalues: np.ndarray
    nullspace_dim: int
    lambda_d_plus_1: float
    consensus_predicted: bool
    nullspace_basis: np.ndarray
    threshold: float
    d: int

    def as_dict(self, with_basis: bool = False) -> dict:
        out = {
            "eigenvalues": [float(x) for x in self.eigenvalues],
            "nullspace_dim": self.nullspace_dim,
            "lambda_d_plus_1": self.lambda_d_plus_1,
            "consensus_predicted": self.consensus_predicted,
            "zero_threshold": self.threshold,
        }
        if with_basis:
            out["nullspace_basis"] = self.nullspace_basis.tolist()
        return out


def _eigh(lap: np.ndarray):
    try:
        return np.linalg.eigh((lap + lap.T) / 2)
    except np.linalg.LinAlgError as exc:
        raise EigensolverFailure(str(exc)) from exc


def analyze_spectrum(g: MatrixWeightedGraph, tol: float = RANK_TOL) -> SpectralReport:
    """Full eigendecomposition of L and the nullspace consensus test.

    Eigenvalues at or below ``tol * max(1, lambda_max)`` count as zero.
    Consensus is predicted iff exactly ``d`` eigenvalues are zero.
    """
    w, v = _eigh(laplacian(g))
    threshold = tol * max(1.0, float(w[-1]) if w.size else 0.0)
    zero = w <= threshold
    k = int(np.count_nonzero(zero))
    positive = w[~zero]
    return SpectralReport(
        eigenvalues=w,
        nullspace_dim=k,
        lambda_d_plus_1=float(positive[0]) if positive.size else 0.0,
        consensus_predicted=(k == g.d),
        nullspace_basis=v[:, zero],
        threshold=threshold,
        d=g.d,
    )


def laplacian_nullspace(g: MatrixWeightedGraph, tol: float = RANK_TOL) -> Subspace:
    """N(L) as a subspace of R^{dn}; always contains 1_n kron I_d."""
    rep = analyze_spectrum(g, tol)
    ns = Subspace(g.n * g.d, rep.nullspace_basis)
    ones = consensus_basis(g.n, g.d)
    gap = np.max(np.abs(ns.projector @ ones - ones), initial=0.0)
    if gap > 1e-8:
        raise EigensolverFailure(f"computed nullspace misses the consensus space (gap {gap:.3g})")
    return ns


def convergence_rate(g: MatrixWeightedGraph, tol: float = RANK_TOL) -> float:
    """lambda_{d+1}(L), the guaranteed exponential rate of disagreement decay."""
    rep = analyze_spectrum(g, tol)
    if not rep.consensus_predicted:
        raise NotConsensusGraph(
            f"dim N(L) = {rep.nullspace_dim} > d = {g.d}; the rate index is defined only for consensus graphs"
        )
    return rep.lambda_d_plus_1
