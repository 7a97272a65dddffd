"""
Deterministic graph factories for tests and the verification suite.
"""

import numpy as np

from .models import WeightedGraph
from .utils import laplacian_from_graph


def star_graph(leaves=3, weight=1.0, center_loop=0.0):
    """Star with the center as the last node (index ``leaves``)."""
    n = leaves + 1
    weights = np.zeros((n, n))
    weights[:leaves, leaves] = weights[leaves, :leaves] = weight
    weights[leaves, leaves] = center_loop
    return WeightedGraph(weights)


def chain_graph():
    """
    Four nodes, boundary {0, 1}, interior {2, 3}: unit edges {0,2}, {1,3},
    {2,3}, i.e. a unit path 0-2-3-1.
    """
    weights = np.zeros((4, 4))
    for i, j in ((0, 2), (1, 3), (2, 3)):
        weights[i, j] = weights[j, i] = 1.0
    return WeightedGraph(weights)


def path_graph(n, weight=1.0):
    weights = np.zeros((n, n))
    for i in range(n - 1):
        weights[i, i + 1] = weights[i + 1, i] = weight
    return WeightedGraph(weights)


def complete_graph(n, weight=1.0, loop=0.0):
    weights = np.full((n, n), float(weight))
    np.fill_diagonal(weights, loop)
    return WeightedGraph(weights)


def random_connected_graph(rng, n, density=0.2, loop_probability=0.0,
                           weight_range=(0.5, 2.0)):
    """
    Random connected graph: a random spanning tree plus extra edges.

    Args:
        rng: numpy Generator
        n: node count
        density: probability of each extra edge
        loop_probability: probability that a node carries a self-loop
        weight_range: uniform range for edge and loop weights

    Returns:
        WeightedGraph
    """
    low, high = weight_range
    weights = np.zeros((n, n))
    order = rng.permutation(n)
    for k in range(1, n):
        parent = order[rng.integers(k)]
        child = order[k]
        weights[parent, child] = weights[child, parent] = rng.uniform(low, high)

    extra = np.triu(rng.random((n, n)) < density, k=1) & (np.triu(weights, k=1) == 0)
    rows, cols = np.nonzero(extra)
    values = rng.uniform(low, high, size=rows.size)
    weights[rows, cols] = values
    weights[cols, rows] = values

    loopy = rng.random(n) < loop_probability
    weights[np.diag_indices(n)] = np.where(loopy, rng.uniform(low, high, size=n), 0.0)
    return WeightedGraph(weights)


def random_boundary(rng, n, size=None):
    """Sorted boundary index tuple with 2 <= size <= n-1."""
    if size is None:
        size = int(rng.integers(2, n))
    return tuple(sorted(int(i) for i in rng.choice(n, size=size, replace=False)))


def random_instance(rng, max_n=50, strictly_loopy=None):
    """
    One corpus instance ``(q, boundary)``.

    ``strictly_loopy`` forces the loop class; None picks it at random. A
    strictly loopy instance always has at least one loop.
    """
    n = int(rng.integers(3, max_n + 1))
    if strictly_loopy is None:
        strictly_loopy = bool(rng.integers(2))
    # 2 to 6 expected extra neighbours per node.
    density = float(rng.uniform(min(1.0, 2.0 / n), min(1.0, 6.0 / n)))
    loop_probability = float(rng.uniform(0.05, 0.5)) if strictly_loopy else 0.0
    g = random_connected_graph(rng, n, density, loop_probability)
    if strictly_loopy and not any(True for _ in g.loops()):
        weights = np.array(g.weights)
        node = int(rng.integers(n))
        weights[node, node] = rng.uniform(0.5, 2.0)
        g = WeightedGraph(weights)
    return laplacian_from_graph(g), random_boundary(rng, n)


def corpus(seed, count, max_n=50):
    """``count`` instances alternating loop-less and strictly loopy."""
    rng = np.random.default_rng(seed)
    return [
        random_instance(rng, max_n, strictly_loopy=bool(k % 2))
        for k in range(count)
    ]
