import numpy as np
import pytest

from speccoarse.graph import Graph

ACCEPTANCE_LINES = []


def random_graph(rng, n, p=0.3, connected=True):
    """Weighted random graph; a random spanning tree keeps it connected."""
    edges = {}
    if connected:
        perm = rng.permutation(n)
        for t in range(1, n):
            a, b = perm[t], perm[rng.integers(t)]
            edges[(min(a, b), max(a, b))] = True
    for i in range(n):
        for j in range(i + 1, n):
            if rng.uniform() < p:
                edges[(i, j)] = True
    return Graph.from_edges(n, [(i, j, float(rng.uniform(0.5, 2.0))) for i, j in sorted(edges)])


def dense_laplacian(n, edges):
    lap = np.zeros((n, n))
    for i, j, w in edges:
        lap[[i, j], [i, j]] += w
        lap[i, j] -= w
        lap[j, i] -= w
    return lap


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def path4():
    return Graph.from_edges(4, [(0, 1, 1.0), (1, 2, 2.0), (2, 3, 3.0)])


@pytest.fixture
def two_triangles():
    """Two unit triangles joined by a single edge of weight 0.5."""
    e = [(0, 1, 1.0), (0, 2, 1.0), (1, 2, 1.0), (3, 4, 1.0), (3, 5, 1.0), (4, 5, 1.0), (2, 3, 0.5)]
    return Graph.from_edges(6, e)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
