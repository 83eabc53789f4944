"""Simulation of x' = -L x and checks on the resulting trajectories."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.cluster.hierarchy import fcluster, linkage

from .clustering import MAX_PATHS, enumerate_paths
from .errors import DimensionMismatch, NotConsensusGraph, NotConverged, StepTooLarge
from .graph import MatrixWeightedGraph, laplacian
from .spectral import analyze_spectrum
from .subspace import intersect

CONVERGENCE_TOL = 1e-9
GROUP_TOL = 1e-5
DEFAULT_HORIZON = 5000.0


@dataclass(frozen=True)
class SimulationConfig:
    """Integrator settings.

    ``step=None`` picks ``0.5 / lambda_max(L)``. Any step above
    ``1 / lambda_max`` (half of the ``2 / lambda_max`` bound) is rejected.
    The run stops early once ``|x(t+h) - x(t)| / h <= convergence_tol``.
    """

    step: float | None = None
    horizon: float = DEFAULT_HORIZON
    convergence_tol: float = CONVERGENCE_TOL
    record_stride: int = 1

    def __post_init__(self):
        if self.step is not None and self.step <= 0:
            raise ValueError("step must be positive")
        if self.horizon < 0:
            raise ValueError("horizon must be non-negative")
        if self.record_stride < 1:
            raise ValueError("record_stride must be >= 1")


@dataclass(frozen=True, eq=False)
class Trajectory:
    n: int
    d: int
    times: np.ndarray
    states: np.ndarray
    converged: bool
    step: float

    @property
    def final_state(self) -> np.ndarray:
        return self.states[-1]

    def agent(self, i: int) -> np.ndarray:
        """States of vertex ``i`` (1-based) over time, shape (samples, d)."""
        return self.states[:, (i - 1) * self.d:i * self.d]

    @property
    def initial_average(self) -> np.ndarray:
        return self.states[0].reshape(self.n, self.d).mean(axis=0)

    def to_csv(self) -> str:
        header = ["t"] + [f"x{i}_{k}" for i in range(1, self.n + 1) for k in range(1, self.d + 1)]
        lines = [",".join(header)]
        for t, x in zip(self.times, self.states):
            lines.append(",".join(f"{v:.17g}" for v in (t, *x)))
        return "\n".join(lines) + "\n"


def stability_bound(lap: np.ndarray) -> float:
    lam_max = float(np.linalg.eigvalsh((lap + lap.T) / 2)[-1]) if lap.size else 0.0
    return np.inf if lam_max <= 0 else 2.0 / lam_max


def simulate(g: MatrixWeightedGraph, x0, cfg: SimulationConfig = SimulationConfig()) -> Trajectory:
    """Classical RK4 with a fixed step; records every ``record_stride`` steps plus the last state."""
    dn = g.n * g.d
    x = np.asarray(x0, dtype=float).ravel().copy()
    if x.shape[0] != dn:
        raise DimensionMismatch(f"x0 has length {x.shape[0]}, expected {dn}")
    lap = laplacian(g)
    bound = stability_bound(lap)
    cap = 0.5 * bound
    if cfg.step is None:
        h = 0.5 * cap if np.isfinite(cap) else 0.1
    else:
        h = cfg.step
        if h > cap:
            raise StepTooLarge(f"step {h:g} exceeds {cap:g} (half of the stability bound 2/lambda_max)")
    steps = int(np.floor(cfg.horizon / h + 1e-9)) if cfg.horizon > 0 else 0

    times, states = [0.0], [x.copy()]
    converged = False
    k = 0
    while k < steps:
        k1 = -lap @ x
        k2 = -lap @ (x + 0.5 * h * k1)
        k3 = -lap @ (x + 0.5 * h * k2)
        k4 = -lap @ (x + h * k3)
        nxt = x + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        k += 1
        change = np.linalg.norm(nxt - x) / h
        x = nxt
        if change <= cfg.convergence_tol:
            converged = True
        if k % cfg.record_stride == 0 or converged or k == steps:
            times.append(k * h)
            states.append(x.copy())
        if converged:
            break
    return Trajectory(g.n, g.d, np.array(times), np.array(states), converged, h)


def check_average_invariance(traj: Trajectory) -> float:
    """max_t |xbar(t) - xbar(0)|."""
    avgs = traj.states.reshape(len(traj.times), traj.n, traj.d).mean(axis=1)
    return float(np.max(np.linalg.norm(avgs - avgs[0], axis=1), initial=0.0))


def lyapunov_increase(traj: Trajectory) -> float:
    """Largest increase of V = |x|^2 / 2 between consecutive samples (<= 0 when monotone)."""
    v = 0.5 * np.sum(traj.states**2, axis=1)
    if len(v) < 2:
        return 0.0
    return float(np.max(np.diff(v)))


def detect_clusters_from_states(final, d: int, group_tol: float = GROUP_TOL) -> tuple:
    """Group agents by the transitive closure of |x_i - x_j| <= group_tol.

    Returns sorted tuples of 1-based vertex labels, ordered by smallest member.
    """
    pts = np.asarray(final, dtype=float).reshape(-1, d)
    n = len(pts)
    if n == 1:
        return ((1,),)
    labels = fcluster(linkage(pts, method="single"), t=group_tol, criterion="distance")
    groups = {}
    for v, lab in enumerate(labels, start=1):
        groups.setdefault(lab, []).append(v)
    return tuple(sorted((tuple(grp) for grp in groups.values()), key=min))


def cluster_states(final, d: int, clusters) -> np.ndarray:
    """Mean final state of each cluster, shape (q, d)."""
    pts = np.asarray(final, dtype=float).reshape(-1, d)
    return np.array([pts[[v - 1 for v in c]].mean(axis=0) for c in clusters])


@dataclass(frozen=True, eq=False)
class PairConstraint:
    clusters: tuple
    paths: int
    nullspace_dim: int
    residual: float


@dataclass(frozen=True, eq=False)
class EquilibriumReport:
    clusters: tuple
    cluster_states: np.ndarray
    average_residual: float
    pair_constraints: tuple

    @property
    def max_pair_residual(self) -> float:
        return max((p.residual for p in self.pair_constraints), default=0.0)

    def as_dict(self) -> dict:
        return {
            "clusters": [list(c) for c in self.clusters],
            "cluster_states": self.cluster_states.tolist(),
            "average_residual": self.average_residual,
            "pair_constraints": [
                {"clusters": [list(c) for c in p.clusters], "paths": p.paths, "nullspace_dim": p.nullspace_dim, "residual": p.residual}
                for p in self.pair_constraints
            ],
        }


def verify_equilibrium_constraints(
    g: MatrixWeightedGraph, clusters, states, xbar0, max_paths: int = MAX_PATHS
) -> EquilibriumReport:
    """Residuals of the cluster-level equilibrium conditions.

    ``average_residual`` is ``|sum_i |C_i| x_Ci - n xbar0| / max(|n xbar0|, 1)``.
    For each pair of clusters joined by at least one path, the difference of
    their states is projected onto the intersection of the nullspaces of all
    paths leaving one cluster and ending in the other; the reported residual
    is the distance to that intersection.
    """
    clusters = tuple(tuple(sorted(c)) for c in clusters)
    states = np.asarray(states, dtype=float).reshape(len(clusters), g.d)
    xbar0 = np.asarray(xbar0, dtype=float).ravel()
    sizes = np.array([len(c) for c in clusters], dtype=float)
    total = sizes @ states
    ref = g.n * xbar0
    avg_res = float(np.linalg.norm(total - ref) / max(np.linalg.norm(ref), 1.0))

    pairs = []
    for a in range(len(clusters)):
        for b in range(a + 1, len(clusters)):
            target = frozenset(clusters[b])
            spaces = []
            for s in clusters[a]:
                spaces.extend(enumerate_paths(g, s, target, max_paths).path_nullspaces)
            if not spaces:
                continue
            inter = intersect(*spaces)
            diff = states[a] - states[b]
            pairs.append(PairConstraint((clusters[a], clusters[b]), len(spaces), inter.dim, inter.residual(diff)))
    return EquilibriumReport(clusters, states, avg_res, tuple(pairs))


def equilibrium_report(
    g: MatrixWeightedGraph, traj: Trajectory, group_tol: float = GROUP_TOL, max_paths: int = MAX_PATHS
) -> EquilibriumReport:
    """Detect clusters in a converged run and check them with :func:`verify_equilibrium_constraints`."""
    if not traj.converged:
        raise NotConverged("trajectory did not converge within the horizon")
    groups = detect_clusters_from_states(traj.final_state, g.d, group_tol)
    return verify_equilibrium_constraints(
        g, groups, cluster_states(traj.final_state, g.d, groups), traj.initial_average, max_paths
    )


@dataclass(frozen=True)
class DecayFit:
    rate: float
    lambda_d_plus_1: float
    samples: int
    degenerate: bool

    @property
    def bound_ok(self) -> bool:
        return bool(self.degenerate or self.rate <= -0.95 * self.lambda_d_plus_1)


def measure_decay_rate(traj: Trajectory, g: MatrixWeightedGraph, floor: float = 1e-8) -> DecayFit:
    """Least-squares slope of log|delta(t)|, delta = x - 1 kron xbar(0).

    Only samples with ``|delta| > floor * |delta(0)|`` enter the fit so that
    round-off near convergence does not flatten the slope.
    """
    rep = analyze_spectrum(g)
    if not rep.consensus_predicted:
        raise NotConsensusGraph("decay rate is only characterised for consensus graphs")
    xbar = traj.initial_average
    delta = traj.states - np.tile(xbar, traj.n)
    norms = np.linalg.norm(delta, axis=1)
    if norms[0] == 0.0:
        return DecayFit(float("nan"), rep.lambda_d_plus_1, 0, True)
    keep = norms > floor * norms[0]
    if np.count_nonzero(keep) < 3:
        return DecayFit(float("nan"), rep.lambda_d_plus_1, int(np.count_nonzero(keep)), True)
    slope = np.polyfit(traj.times[keep], np.log(norms[keep]), 1)[0]
    return DecayFit(float(slope), rep.lambda_d_plus_1, int(np.count_nonzero(keep)), False)


def random_initial_state(rng: np.random.Generator, n: int, d: int, low: float = -5.0, high: float = 5.0) -> np.ndarray:
    return rng.uniform(low, high, size=n * d)
