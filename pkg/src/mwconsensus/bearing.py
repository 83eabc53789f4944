"""Bearing-based formation control as matrix-weighted consensus.

Each edge carries the projector ``P = I - g g^T`` onto the orthogonal
complement of the desired bearing ``g``. The resulting Laplacian is the
bearing Laplacian, and the ordinary consensus simulation drives the
formation into its nullspace.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dynamics import SimulationConfig, Trajectory, simulate
from .errors import DimensionMismatch, InconsistentBearings, NotUnitVector, ValidationError
from .graph import MatrixWeight, MatrixWeightedGraph, build_graph, laplacian

UNIT_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class BearingSpec:
    """Desired unit bearings keyed by ``(i, j)`` with ``i < j``; ``g_ji = -g_ij`` is implied."""

    n: int
    d: int
    bearings: dict

    @classmethod
    def from_bearings(cls, n: int, d: int, items) -> "BearingSpec":
        """Build from ``(i, j, g)`` triples; either or both directions may be given."""
        out = {}
        for i, j, gv in items:
            i, j = int(i), int(j)
            gv = np.asarray(gv, dtype=float).ravel()
            if gv.shape != (d,):
                raise DimensionMismatch(f"bearing ({i}, {j}) has length {gv.size}, expected {d}")
            if abs(np.linalg.norm(gv) - 1.0) > UNIT_TOL:
                raise NotUnitVector(f"bearing ({i}, {j}) has norm {np.linalg.norm(gv):.12g}")
            key, val = ((i, j), gv) if i < j else ((j, i), -gv)
            if key in out and np.max(np.abs(out[key] - val)) > UNIT_TOL:
                raise InconsistentBearings(f"bearings for {key} are not opposite in the two directions")
            out[key] = val
        return cls(n, d, dict(sorted(out.items())))

    @classmethod
    def from_positions(cls, positions, edges) -> "BearingSpec":
        """g*_ij = (p_j - p_i) / |p_j - p_i| for every listed edge."""
        p = np.asarray(positions, dtype=float)
        n, d = p.shape
        items = []
        for i, j in edges:
            diff = p[j - 1] - p[i - 1]
            dist = np.linalg.norm(diff)
            if dist == 0.0:
                raise ValidationError(f"target positions of {i} and {j} coincide")
            items.append((i, j, diff / dist))
        return cls.from_bearings(n, d, items)


def projection_weight(gstar) -> MatrixWeight:
    """P = I - g g^T for a unit vector g."""
    gv = np.asarray(gstar, dtype=float).ravel()
    if abs(np.linalg.norm(gv) - 1.0) > UNIT_TOL:
        raise NotUnitVector(f"bearing has norm {np.linalg.norm(gv):.12g}")
    return MatrixWeight.from_array(np.eye(gv.size) - np.outer(gv, gv))


def bearing_laplacian(spec: BearingSpec) -> MatrixWeightedGraph:
    """Matrix-weighted graph whose Laplacian is the bearing Laplacian L_B."""
    return build_graph(
        spec.n, spec.d, [(i, j, projection_weight(gv).entries) for (i, j), gv in spec.bearings.items()]
    )


def bearing_residuals(spec: BearingSpec, p) -> dict:
    """Per edge, |P_g (p_j - p_i)| / max(|p_j - p_i|, 1)."""
    pts = np.asarray(p, dtype=float).reshape(spec.n, spec.d)
    out = {}
    for (i, j), gv in spec.bearings.items():
        diff = pts[j - 1] - pts[i - 1]
        perp = diff - gv * (gv @ diff)
        out[(i, j)] = float(np.linalg.norm(perp) / max(np.linalg.norm(diff), 1.0))
    return out


@dataclass(frozen=True, eq=False)
class FormationResult:
    trajectory: Trajectory
    residuals: dict
    laplacian_residual: float
    tol: float

    @property
    def ok(self) -> bool:
        return bool(max(self.residuals.values(), default=0.0) <= self.tol and self.laplacian_residual <= self.tol)


def formation_converges_to(
    spec: BearingSpec, x0, cfg: SimulationConfig = SimulationConfig(), tol: float = 1e-6
) -> FormationResult:
    """Simulate the bearing control law and check that the final formation lies in N(L_B)."""
    g = bearing_laplacian(spec)
    traj = simulate(g, x0, cfg)
    final = traj.final_state
    return FormationResult(
        traj,
        bearing_residuals(spec, final),
        float(np.linalg.norm(laplacian(g) @ final)),
        tol,
    )


def square_spec(side: float = 1.0, diagonal: tuple = (1, 3)) -> BearingSpec:
    """Unit square 1-2-3-4 in the plane with its four sides and one diagonal."""
    pos = side * np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]])
    edges = [(1, 2), (2, 3), (3, 4), (1, 4), diagonal]
    return BearingSpec.from_positions(pos, edges)
