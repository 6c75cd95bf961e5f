import numpy as np
import pytest

from subnom import Graph, HierarchicalFunction


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def two_cliques():
    """Two disjoint 10-cliques: block structure recoverable by eye."""
    n = 10
    a = np.zeros((2 * n, 2 * n))
    a[:n, :n] = 1.0
    a[n:, n:] = 1.0
    np.fill_diagonal(a, 0.0)
    return Graph(a)


@pytest.fixture
def two_triangles_path():
    """Two disjoint triangles plus a 3-path: blocks 1 and 2 are symmetric."""
    edges = [(1, 2), (2, 3), (1, 3),
             (4, 5), (5, 6), (4, 6),
             (7, 8), (8, 9)]
    g = Graph.from_edges(9, edges)
    h = HierarchicalFunction(np.array([[1], [1], [1], [2], [2], [2],
                                       [3], [3], [3]]))
    return g, h


@pytest.fixture
def nested_hierarchy():
    """Valid 2-level nested partition of 8 vertices: 2 parents, 4 children."""
    a = np.array([[1, 1], [1, 1], [1, 2], [1, 2],
                  [2, 3], [2, 3], [2, 4], [2, 4]])
    return HierarchicalFunction(a)
