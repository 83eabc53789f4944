import numpy as np
import pytest

from mwconsensus.graph import build_graph
from mwconsensus.scenario import load_scenario

E1 = np.eye(3)


def example1_graph():
    return build_graph(4, 3, [
        (1, 2, np.diag([0.0, 1.0, 1.0])),
        (1, 3, np.diag([1.0, 0.0, 0.0])),
        (2, 3, np.diag([1.0, 0.0, 1.0])),
        (1, 4, np.diag([1.0, 2.0, 1.0])),
    ])


@pytest.fixture
def example1():
    return example1_graph()


@pytest.fixture(scope="session")
def case1():
    return load_scenario("cluster9_case1")


@pytest.fixture(scope="session")
def case2():
    return load_scenario("cluster9_case2")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


K4_EDGES = [(1, 2), (1, 3), (1, 4), (2, 3), (2, 4), (3, 4)]
K4_ANGLES = [0, 20, 50, 80, 110, 160]


def under_merge_edges():
    """K4 in the plane with six rank-one weights along generic directions.

    Six independent constraints pin N(L) to the consensus space, yet every
    direct edge leaves a one-dimensional path nullspace, so no path test or
    edge sum can merge two vertices.
    """
    out = []
    for (i, j), deg in zip(K4_EDGES, K4_ANGLES):
        a = np.array([np.cos(np.deg2rad(deg)), np.sin(np.deg2rad(deg))])
        out.append((i, j, np.outer(a, a)))
    return out


def under_merge_scenario():
    return {
        "name": "k4_rank_one",
        "n": 4,
        "d": 2,
        "edges": [{"i": i, "j": j, "weight": w.tolist()} for i, j, w in under_merge_edges()],
        "seed": 0,
    }


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
