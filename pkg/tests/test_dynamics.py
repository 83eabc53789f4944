import numpy as np
import pytest
from scipy.linalg import expm

from mwconsensus.clustering import find_clusters
from mwconsensus.dynamics import (
    SimulationConfig,
    check_average_invariance,
    cluster_states,
    detect_clusters_from_states,
    equilibrium_report,
    lyapunov_increase,
    measure_decay_rate,
    random_initial_state,
    simulate,
    verify_equilibrium_constraints,
)
from mwconsensus.errors import DimensionMismatch, NotConsensusGraph, NotConverged, StepTooLarge
from mwconsensus.generators import random_graph
from mwconsensus.graph import build_graph, laplacian
from mwconsensus.spectral import analyze_spectrum
from mwconsensus.subspace import span

PAIR = build_graph(2, 1, [(1, 2, [[1.0]])])


def test_two_node_closed_form():
    traj = simulate(PAIR, [1.0, -1.0], SimulationConfig(step=0.01, horizon=3.0))
    exact = np.exp(-2 * traj.times)
    assert np.max(np.abs(traj.states[:, 0] - exact)) <= 1e-9
    assert np.max(np.abs(traj.states[:, 1] + exact)) <= 1e-9


def test_matches_matrix_exponential(rng):
    g = random_graph(rng, 5, 2)
    x0 = random_initial_state(rng, 5, 2)
    lap = laplacian(g)
    h = 0.02 / np.linalg.eigvalsh(lap)[-1]
    traj = simulate(g, x0, SimulationConfig(step=h, horizon=2.0, convergence_tol=0.0))
    for t, x in list(zip(traj.times, traj.states))[:: max(len(traj.times) // 10, 1)]:
        assert np.linalg.norm(x - expm(-lap * t) @ x0) <= 1e-6 * np.linalg.norm(x0)


def test_consensus_state_is_stationary(example1):
    x0 = np.tile([1.0, -2.0, 0.5], 4)
    traj = simulate(example1, x0, SimulationConfig(horizon=10.0))
    assert traj.converged
    assert np.max(np.abs(traj.states - x0)) <= 1e-12
    assert check_average_invariance(traj) == 0.0


def test_zero_horizon_single_sample(example1):
    traj = simulate(example1, np.arange(12.0), SimulationConfig(horizon=0.0))
    assert len(traj.times) == 1 and not traj.converged
    with pytest.raises(NotConverged):
        equilibrium_report(example1, traj)


def test_step_too_large():
    with pytest.raises(StepTooLarge):
        simulate(PAIR, [1.0, 0.0], SimulationConfig(step=0.6))
    simulate(PAIR, [1.0, 0.0], SimulationConfig(step=0.5, horizon=1.0))


def test_bad_initial_state(example1):
    with pytest.raises(DimensionMismatch):
        simulate(example1, np.zeros(5))


def test_config_validation():
    for kwargs in ({"step": 0.0}, {"horizon": -1.0}, {"record_stride": 0}):
        with pytest.raises(ValueError):
            SimulationConfig(**kwargs)


def test_record_stride_keeps_last_state(example1, rng):
    x0 = random_initial_state(rng, 4, 3)
    full = simulate(example1, x0, SimulationConfig(horizon=5.0, convergence_tol=0.0))
    thin = simulate(example1, x0, SimulationConfig(horizon=5.0, convergence_tol=0.0, record_stride=7))
    assert np.array_equal(full.final_state, thin.final_state)
    assert np.array_equal(full.states[::7], thin.states[: len(full.states[::7])])


def test_example1_run(example1, rng):
    x0 = random_initial_state(rng, 4, 3)
    traj = simulate(example1, x0, SimulationConfig(horizon=200.0))
    assert traj.converged
    assert check_average_invariance(traj) <= 1e-8 * max(np.linalg.norm(traj.initial_average), 1.0)
    assert lyapunov_increase(traj) <= 1e-10
    groups = detect_clusters_from_states(traj.final_state, 3)
    assert groups == ((1, 2, 4), (3,))
    x = traj.final_state.reshape(4, 3)
    assert span([[0.0, 1.0, 0.0]]).residual(x[2] - x[0]) <= 1e-6
    # the 1-3 offset lies in N(A_13) ∩ N(A_23)
    w13, w23 = example1.weight(1, 3), example1.weight(2, 3)
    assert w13.nullspace.intersect(w23.nullspace).contains(x[0] - x[2], 1e-6)


def test_case1_equilibrium(case1):
    g = case1.graph()
    traj = simulate(g, case1.initial_state(), case1.sim_config())
    rep = equilibrium_report(g, traj, case1.group_tol)
    assert rep.clusters == ((1, 2, 3), (4, 5, 6), (7, 8, 9))
    assert rep.average_residual <= 1e-6
    assert rep.max_pair_residual <= 1e-6
    assert check_average_invariance(traj) <= 1e-8 * max(np.linalg.norm(traj.initial_average), 1.0)


def test_spanning_cluster_equilibrium_reduces_to_average(rng):
    g = build_graph(3, 2, [(1, 2, np.eye(2)), (2, 3, np.eye(2))])
    xbar = rng.standard_normal(2)
    rep = verify_equilibrium_constraints(g, [(1, 2, 3)], [xbar], xbar)
    assert rep.average_residual == 0.0 and rep.pair_constraints == ()


def test_detect_clusters_examples():
    assert detect_clusters_from_states(np.tile([1.0, 2.0], 4), 2) == ((1, 2, 3, 4),)
    chain = np.array([0.0, 0.6e-5, 1.2e-5, 1.0])
    assert detect_clusters_from_states(chain, 1) == ((1, 2, 3), (4,))


def test_cluster_states_means():
    final = np.array([1.0, 3.0, 10.0])
    assert np.allclose(cluster_states(final, 1, [(1, 2), (3,)]), [[2.0], [10.0]])


def test_two_node_decay_rate():
    traj = simulate(PAIR, [1.0, -1.0], SimulationConfig(step=0.005, horizon=15.0))
    fit = measure_decay_rate(traj, PAIR)
    assert fit.rate == pytest.approx(-2.0, abs=1e-6)
    # the default step trades a slightly slower discrete rate for speed
    coarse = measure_decay_rate(simulate(PAIR, [1.0, -1.0]), PAIR)
    assert -2.0 < coarse.rate <= -0.95 * 2.0
    assert fit.bound_ok


def test_decay_degenerate_window():
    traj = simulate(PAIR, [0.5, 0.5], SimulationConfig(horizon=1.0))
    assert measure_decay_rate(traj, PAIR).degenerate


def test_decay_requires_consensus_graph(example1):
    traj = simulate(example1, np.arange(12.0), SimulationConfig(horizon=1.0))
    with pytest.raises(NotConsensusGraph):
        measure_decay_rate(traj, example1)


def test_case2_decay(case2):
    g = case2.graph()
    traj = simulate(g, case2.initial_state(), case2.sim_config())
    assert traj.converged
    fit = measure_decay_rate(traj, g)
    assert fit.rate <= -0.95 * fit.lambda_d_plus_1
    # V(t) <= V(0) exp(-2 lambda t) (1 + 5%)
    delta = traj.states - np.tile(traj.initial_average, g.n)
    v = 0.5 * np.sum(delta**2, axis=1)
    assert np.all(v <= v[0] * np.exp(-2 * fit.lambda_d_plus_1 * traj.times) * 1.05 + 1e-18)


def test_simulated_clusters_agree_with_algorithm(rng):
    """Final-state grouping matches find_clusters on at least 99% of random graphs.

    Each disagreement must be an under-merge confirmed by the spectrum
    (find_clusters sees several clusters on a graph whose nullspace is the
    consensus space), never a wrong grouping.
    """
    trials, agree = 200, 0
    for _ in range(trials):
        n, d = int(rng.integers(2, 9)), int(rng.integers(1, 4))
        g = random_graph(rng, n, d)
        rep = analyze_spectrum(g)
        slowest = rep.eigenvalues[rep.eigenvalues > rep.threshold][0]
        cfg = SimulationConfig(horizon=max(100.0, 40.0 / slowest), record_stride=100)
        traj = simulate(g, random_initial_state(rng, n, d), cfg)
        assert traj.converged
        observed = set(detect_clusters_from_states(traj.final_state, d))
        predicted = find_clusters(g)
        if observed == set(predicted.clusters):
            agree += 1
            continue
        assert len(observed) == 1 and not predicted.spanning, (observed, predicted.clusters)
        assert rep.consensus_predicted
    assert agree >= 0.99 * trials
