"""
Conversions between graphs and loopy Laplacians, connectivity, and
ground-node augmentation.
"""

import logging
import warnings

import networkx as nx
import numpy as np
from scipy.linalg import eigh
from django.conf import settings

from kronred.utils import resolve
from kronred.exceptions import InvariantBreach, IsolatedGroundWarning
from .models import LoopyLaplacian, WeightedGraph

logger = logging.getLogger(__name__)


def laplacian_from_graph(g):
    """
    Build the loopy Laplacian Q = L + diag(A_ii) of a weighted graph.

    Args:
        g: WeightedGraph

    Returns:
        LoopyLaplacian with off-diagonals -A_ij and row sums A_ii.
    """
    adjacency = g.adjacency
    entries = np.diag(adjacency.sum(axis=1) + g.loop_weights) - adjacency
    return LoopyLaplacian(entries)


def graph_from_laplacian(q):
    """
    Recover the weighted graph induced by a loopy Laplacian.

    Round-off below ``TOL_EDGE`` that would make a weight slightly negative
    is clamped to zero; anything larger was already refused by the
    LoopyLaplacian invariants.
    """
    weights = -np.array(q.entries)
    np.fill_diagonal(weights, q.row_sums)
    weights[(weights < 0) & (weights > -settings.TOL_EDGE)] = 0.0
    return WeightedGraph(weights)


def loopless_part(q):
    """Return L = Q - diag(A_ii); off-diagonals are unchanged."""
    return LoopyLaplacian(q.entries - np.diag(q.row_sums))


def to_networkx(q, tol=None):
    """
    Edge pattern of ``q`` as a networkx graph on nodes 0..n-1.

    An edge {i, j} exists where ``entries[i, j] < -tol``. Self-loops are
    recorded as the node attribute ``loop``.
    """
    tol = resolve(tol, settings.TOL_EDGE)
    graph = nx.Graph()
    for i, w in enumerate(q.row_sums):
        graph.add_node(i, loop=float(w) if w > tol else 0.0)
    rows, cols = np.nonzero(np.triu(q.entries, k=1) < -tol)
    graph.add_edges_from(zip(rows.tolist(), cols.tolist()))
    return graph


def is_irreducible(q, tol=None):
    """True iff the edge pattern of ``q`` is connected (n = 1 counts)."""
    if q.n == 1:
        return True
    return nx.is_connected(to_networkx(q, tol))


def augment(q):
    """
    Attach a grounded node n+1 that carries every self-loop as an edge.

    The principal n x n block of the result is ``q``; the last row and
    column hold -A_ii and sum(A_ii). A loop-less input yields an isolated
    ground node and raises ``IsolatedGroundWarning``.
    """
    loops = q.row_sums
    if q.is_loopless:
        logger.warning(f"augmenting a loop-less {q.n}x{q.n} matrix")
        warnings.warn(
            "augmenting a loop-less Laplacian leaves the ground isolated",
            IsolatedGroundWarning,
            stacklevel=2,
        )
        loops = np.zeros(q.n)

    entries = np.zeros((q.n + 1, q.n + 1))
    entries[:q.n, :q.n] = q.entries
    entries[:q.n, q.n] = -loops
    entries[q.n, :q.n] = -loops
    entries[q.n, q.n] = loops.sum()
    return LoopyLaplacian(entries)


def pseudo_inverse(q, tol=None, nullity=None):
    """
    Moore-Penrose inverse of ``q`` from its eigendecomposition.

    Eigenvalues with magnitude at most ``tol`` times the largest one count
    as zero. When ``nullity`` is given, a different number of zero
    eigenvalues raises InvariantBreach.
    """
    tol = resolve(tol, settings.TOL_EIG)
    values, vectors = eigh(q.entries)
    cutoff = tol * max(float(np.abs(values).max()), np.finfo(float).tiny)
    keep = np.abs(values) > cutoff
    if nullity is not None and int((~keep).sum()) != nullity:
        raise InvariantBreach(
            f"expected {nullity} zero eigenvalues, found {int((~keep).sum())}"
        )
    return (vectors[:, keep] / values[keep]) @ vectors[:, keep].T
