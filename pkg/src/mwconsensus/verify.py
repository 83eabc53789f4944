"""Three-way cross-check: spectral test, cluster search, and simulation."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .clustering import MAX_PATHS, ClusterPartition, find_clusters
from .dynamics import (
    GROUP_TOL,
    DecayFit,
    EquilibriumReport,
    SimulationConfig,
    Trajectory,
    check_average_invariance,
    cluster_states,
    detect_clusters_from_states,
    lyapunov_increase,
    measure_decay_rate,
    simulate,
    verify_equilibrium_constraints,
)
from .graph import MatrixWeightedGraph, consensus_basis, laplacian, laplacian_from_incidence
from .spectral import SpectralReport, analyze_spectrum


@dataclass(frozen=True)
class Check:
    name: str
    passed: bool
    detail: str = ""

    def __post_init__(self):
        object.__setattr__(self, "passed", bool(self.passed))

    def line(self) -> str:
        return f"[{'PASS' if self.passed else 'FAIL'}] {self.name}" + (f": {self.detail}" if self.detail else "")


@dataclass(frozen=True, eq=False)
class CrossCheck:
    checks: tuple
    partition: ClusterPartition
    spectrum: SpectralReport
    trajectory: Trajectory | None = None
    observed: tuple | None = None
    equilibrium: EquilibriumReport | None = None
    decay: DecayFit | None = None

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def failures(self) -> list:
        return [c for c in self.checks if not c.passed]


def structural_checks(g: MatrixWeightedGraph) -> list:
    lap = laplacian(g)
    scale = max(float(np.max(np.abs(lap), initial=0.0)), 1e-300)
    gap = float(np.max(np.abs(lap - laplacian_from_incidence(g)), initial=0.0))
    kernel = float(np.max(np.abs(lap @ consensus_basis(g.n, g.d)), initial=0.0))
    return [
        Check("laplacian equals incidence factorization", gap <= 1e-12 * scale, f"max gap {gap:.2e}"),
        Check("consensus space in nullspace", kernel <= 1e-12 * scale, f"max |L(1 kron I)| {kernel:.2e}"),
    ]


def cross_check(
    g: MatrixWeightedGraph,
    x0=None,
    cfg: SimulationConfig = SimulationConfig(),
    group_tol: float = GROUP_TOL,
    max_paths: int = MAX_PATHS,
) -> CrossCheck:
    """Run every analysis on ``g`` and collect pass/fail checks.

    Without ``x0`` only the structural and spectral-vs-graph checks run.
    """
    checks = structural_checks(g)
    part = find_clusters(g, max_paths)
    spec = analyze_spectrum(g)
    checks.append(Check(
        "spanning cluster iff N(L) = R",
        part.spanning == spec.consensus_predicted,
        f"clusters={len(part.clusters)}, dim N(L)={spec.nullspace_dim}, d={g.d}",
    ))
    if part.truncated:
        checks.append(Check("path budget respected", False, f"{len(part.truncated)} truncated queries"))
    if x0 is None:
        return CrossCheck(tuple(checks), part, spec)

    traj = simulate(g, x0, cfg)
    xbar0 = traj.initial_average
    avg_dev = check_average_invariance(traj)
    v0 = 0.5 * float(traj.states[0] @ traj.states[0])
    rise = lyapunov_increase(traj)
    checks += [
        Check("simulation converged", traj.converged, f"t_end={traj.times[-1]:.4g}"),
        Check("average invariant", avg_dev <= 1e-8 * max(np.linalg.norm(xbar0), 1.0), f"max deviation {avg_dev:.2e}"),
        Check("|x|^2/2 non-increasing", rise <= 1e-10 * max(v0, 1.0), f"max increase {rise:.2e}"),
    ]
    if not traj.converged:
        return CrossCheck(tuple(checks), part, spec, traj)

    final = traj.final_state
    observed = detect_clusters_from_states(final, g.d, group_tol)
    eq = verify_equilibrium_constraints(g, observed, cluster_states(final, g.d, observed), xbar0, max_paths)
    resid = float(np.linalg.norm(laplacian(g) @ final))
    checks += [
        Check("observed clusters match find_clusters", set(observed) == set(part.clusters),
              f"observed={list(observed)} predicted={list(part.clusters)}"),
        Check("equilibrium |L x| small", resid <= 10 * cfg.convergence_tol, f"|L x_final| = {resid:.2e}"),
        Check("cluster states average to xbar(0)", eq.average_residual <= 1e-6, f"residual {eq.average_residual:.2e}"),
        Check("cluster differences in path nullspaces", eq.max_pair_residual <= 1e-6, f"max residual {eq.max_pair_residual:.2e}"),
    ]
    decay = None
    if spec.consensus_predicted:
        target = np.tile(xbar0, g.n)
        err = float(np.linalg.norm(final - target) / max(np.linalg.norm(target), 1.0))
        checks.append(Check("converges to 1 kron xbar(0)", err <= 1e-6, f"relative error {err:.2e}"))
        if g.n > 1:
            decay = measure_decay_rate(traj, g)
            checks.append(Check(
                "decay at least lambda_{d+1}", decay.bound_ok,
                f"fitted {decay.rate:.4g} vs -lambda_(d+1) = {-decay.lambda_d_plus_1:.4g}",
            ))
    return CrossCheck(tuple(checks), part, spec, traj, observed, eq, decay)
