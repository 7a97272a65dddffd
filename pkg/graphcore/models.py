"""
Graph and Laplacian value types.

Both types freeze their backing array on construction, so instances can be
shared freely between threads.
"""

from dataclasses import dataclass
from enum import Enum
from functools import cached_property

import numpy as np
from django.conf import settings

from kronred.utils import resolve
from kronred.exceptions import DimensionError, InvalidInput


class LaplacianClass(Enum):
    LOOP_LESS = 'LoopLess'
    STRICTLY_LOOPY = 'StrictlyLoopy'


def frozen_square(values, name):
    """Copy ``values`` into a read-only float square matrix."""
    array = np.array(values, dtype=float, copy=True)
    if array.ndim != 2 or array.shape[0] != array.shape[1]:
        raise DimensionError(
            f"expected a square matrix, got shape {array.shape}", field=name
        )
    if array.shape[0] < 1:
        raise DimensionError("matrix must have at least one row", field=name)
    if not np.all(np.isfinite(array)):
        i, j = np.argwhere(~np.isfinite(array))[0]
        raise InvalidInput("entry is not finite", field=f"{name}[{i},{j}]")
    array.setflags(write=False)
    return array


def check_symmetric(array, name, tol):
    gap = np.abs(array - array.T)
    if gap.max() > tol:
        i, j = np.unravel_index(np.argmax(gap), gap.shape)
        raise InvalidInput(
            f"matrix is not symmetric ({array[i, j]!r} vs {array[j, i]!r})",
            field=f"{name}[{i},{j}]",
        )


@dataclass(frozen=True, eq=False)
class WeightedGraph:
    """
    Undirected weighted graph with optional self-loops.

    ``weights[i, j]`` (i != j) is the edge weight A_ij and ``weights[i, i]``
    is the self-loop weight A_ii.
    """
    weights: np.ndarray

    def __post_init__(self):
        weights = frozen_square(self.weights, 'weights')
        check_symmetric(weights, 'weights', settings.TOL_SYM)
        if weights.min() < -settings.TOL_SYM:
            i, j = np.unravel_index(np.argmin(weights), weights.shape)
            raise InvalidInput(
                f"weight {weights[i, j]!r} is negative",
                field=f"weights[{i},{j}]",
            )
        object.__setattr__(self, 'weights', weights)

    @property
    def n(self):
        return self.weights.shape[0]

    @property
    def loop_weights(self):
        return np.diag(self.weights).copy()

    @property
    def adjacency(self):
        """Edge weights with the self-loops removed."""
        off = np.array(self.weights)
        np.fill_diagonal(off, 0.0)
        return off

    def edges(self, tol=None):
        """Yield ``(i, j, w)`` for every edge i < j heavier than ``tol``."""
        tol = resolve(tol, settings.TOL_EDGE)
        rows, cols = np.nonzero(np.triu(self.weights, k=1) > tol)
        for i, j in zip(rows, cols):
            yield int(i), int(j), float(self.weights[i, j])

    def loops(self, tol=None):
        """Yield ``(i, w)`` for every self-loop heavier than ``tol``."""
        tol = resolve(tol, settings.TOL_EDGE)
        for i, w in enumerate(np.diag(self.weights)):
            if w > tol:
                yield i, float(w)

    def __repr__(self):
        return f"WeightedGraph(n={self.n})"


@dataclass(frozen=True, eq=False)
class LoopyLaplacian:
    """
    Symmetric matrix with nonpositive off-diagonals and nonnegative row sums.

    The row sum of row i is the self-loop weight A_ii. A loop-less matrix
    (every row sum zero) is an ordinary graph Laplacian.

    Validation is relative to ``scale = max(1, max |Q_ij|)``: symmetry and
    off-diagonals allow TOL_SYM * scale, and row sums may dip to
    -TOL_SYM * scale * n, since each sums n rounded entries. For unit-scale
    entries and n = 1 this is the absolute -TOL_SYM bound.
    """
    entries: np.ndarray

    def __post_init__(self):
        entries = frozen_square(self.entries, 'entries')
        scale = max(1.0, float(np.abs(entries).max()))
        check_symmetric(entries, 'entries', settings.TOL_SYM * scale)

        off = entries - np.diag(np.diag(entries))
        if off.max() > settings.TOL_SYM * scale:
            i, j = np.unravel_index(np.argmax(off), off.shape)
            raise InvalidInput(
                f"off-diagonal entry {entries[i, j]!r} is positive",
                field=f"entries[{i},{j}]",
            )

        # A row sum accumulates n roundings.
        row_sums = entries.sum(axis=1)
        row_tol = settings.TOL_SYM * scale * entries.shape[0]
        if row_sums.min() < -row_tol:
            i = int(np.argmin(row_sums))
            raise InvalidInput(
                f"row sum {row_sums[i]!r} is negative",
                field=f"entries[{i},:]",
            )
        object.__setattr__(self, 'entries', entries)

    @property
    def n(self):
        return self.entries.shape[0]

    @cached_property
    def row_sums(self):
        sums = self.entries.sum(axis=1)
        sums.setflags(write=False)
        return sums

    @property
    def loop_weights(self):
        """Self-loop weights A_ii, i.e. the row sums."""
        return np.array(self.row_sums)

    @cached_property
    def laplacian_class(self):
        if np.any(self.row_sums > settings.TOL_EDGE):
            return LaplacianClass.STRICTLY_LOOPY
        return LaplacianClass.LOOP_LESS

    @property
    def is_loopless(self):
        return self.laplacian_class is LaplacianClass.LOOP_LESS

    @property
    def is_strictly_loopy(self):
        return self.laplacian_class is LaplacianClass.STRICTLY_LOOPY

    def block(self, rows, cols):
        """Submatrix ``entries[rows][:, cols]`` as a fresh writable array."""
        return np.array(self.entries[np.ix_(rows, cols)])

    def __repr__(self):
        return f"LoopyLaplacian(n={self.n}, class={self.laplacian_class.value})"
