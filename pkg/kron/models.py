"""
Kron reduction value types.
"""

import numbers
from dataclasses import dataclass, field
from functools import cached_property
from typing import NamedTuple

import numpy as np
from scipy.linalg import cho_solve
from django.conf import settings

from kronred.exceptions import DimensionError, InvalidInput
from graphcore.utils import graph_from_laplacian, loopless_part


@dataclass(frozen=True)
class Partition:
    """
    Boundary set α and its interior complement β on nodes 0..n-1.

    ``boundary`` is stored sorted; ``interior`` is derived.
    """
    n: int
    boundary: tuple

    def __post_init__(self):
        if isinstance(self.n, bool) or not isinstance(self.n, numbers.Integral):
            raise InvalidInput(f"expected an integer, got {self.n!r}", field='n')
        nodes = []
        for node in self.boundary:
            if isinstance(node, bool) or not isinstance(node, numbers.Integral):
                raise InvalidInput(
                    f"expected an integer node, got {node!r}", field='boundary'
                )
            if not 0 <= node < self.n:
                raise InvalidInput(
                    f"node {node} is outside 0..{self.n - 1}", field='boundary'
                )
            nodes.append(int(node))
        if len(set(nodes)) != len(nodes):
            raise InvalidInput("duplicate boundary node", field='boundary')
        if len(nodes) < 2:
            raise DimensionError(
                "boundary needs at least 2 nodes", field='boundary'
            )
        if len(nodes) >= self.n:
            raise DimensionError(
                "boundary must leave at least one interior node",
                field='boundary',
            )
        object.__setattr__(self, 'n', int(self.n))
        object.__setattr__(self, 'boundary', tuple(sorted(nodes)))

    @classmethod
    def from_one_based(cls, n, boundary):
        return cls(n, tuple(int(node) - 1 for node in boundary))

    @cached_property
    def interior(self):
        members = set(self.boundary)
        return tuple(k for k in range(self.n) if k not in members)

    def interior_position(self, node):
        """Index of interior ``node`` inside the interior block."""
        try:
            return self.interior.index(node)
        except ValueError:
            raise InvalidInput(
                f"node {node} is not an interior node", field='interior'
            ) from None

    def check_size(self, n):
        if n != self.n:
            raise DimensionError(
                f"partition is over {self.n} nodes, matrix has {n}",
                field='partition',
            )


@dataclass(frozen=True, eq=False)
class KronReduction:
    """
    Result of reducing ``source`` onto ``partition.boundary``.

    ``q_ac`` is the accompanying matrix -Q[α,β]Q[β,β]^-1. ``interior_factor``
    is the Cholesky factor of the interior block as returned by
    ``scipy.linalg.cho_factor``; it is built once and only read afterwards.
    """
    q_red: object
    q_ac: np.ndarray
    partition: Partition
    source: object
    interior_factor: tuple = field(repr=False)

    def __post_init__(self):
        q_ac = np.array(self.q_ac, dtype=float)
        q_ac.setflags(write=False)
        object.__setattr__(self, 'q_ac', q_ac)

    @property
    def permutation(self):
        """Original node index of each reduced index."""
        return self.partition.boundary

    @cached_property
    def a_red(self):
        return graph_from_laplacian(self.q_red)

    @cached_property
    def l_red(self):
        return loopless_part(self.q_red)

    def interior_solve(self, rhs):
        """Solve Q[β,β] x = rhs with the cached factorization."""
        return cho_solve(self.interior_factor, rhs)

    def column_sums(self):
        return self.q_ac.sum(axis=0)


@dataclass(frozen=True)
class InteriorPerturbation:
    """Rank-one change Δ on interior edge {i, j} and its resistance term."""
    i: int
    j: int
    delta: float
    r_int: float

    def __post_init__(self):
        if self.i == self.j:
            raise InvalidInput("perturbed edge needs two distinct nodes", field='j')
        if self.r_int < -settings.TOL_EDGE:
            raise InvalidInput(
                f"interior resistance {self.r_int!r} is negative", field='r_int'
            )

    @property
    def denominator(self):
        return 1.0 + self.delta * self.r_int


@dataclass(frozen=True, eq=False)
class IterativeReduction:
    """
    One-shot-compatible reduction plus every intermediate matrix.

    ``steps[0]`` is the input and ``steps[-1]`` equals ``reduction.q_red``;
    ``labels[l]`` lists the original node of each row of ``steps[l]``.
    """
    reduction: KronReduction
    steps: tuple
    order: tuple
    labels: tuple

    @property
    def q_red(self):
        return self.reduction.q_red


class SelfLoopDecomposition(NamedTuple):
    l_schur: object
    boundary_loops: np.ndarray
    s: np.ndarray


class ReducedTopology(NamedTuple):
    """Edges ``(i, j)`` with i < j and loopy nodes, in original indices."""
    edges: frozenset
    loops: frozenset
