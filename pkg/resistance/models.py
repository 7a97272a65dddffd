"""
Effective-resistance value types.
"""

import logging
import warnings
from dataclasses import dataclass
from enum import Enum
from functools import cached_property

import numpy as np
from django.conf import settings

from kronred.exceptions import MetricViolationWarning, InvalidInput
from graphcore.models import check_symmetric, frozen_square

logger = logging.getLogger(__name__)


class ImpedanceMode(Enum):
    LOOP_LESS = 'LoopLess'
    AUGMENTED_LOOPY = 'AugmentedLoopy'
    LOOPY_DIRECT = 'LoopyDirect'


class UniformInverse(Enum):
    PSEUDO = 'Pseudo'
    INVERSE = 'Inverse'
    AUGMENTED_PSEUDO = 'AugmentedPseudo'


@dataclass(frozen=True, eq=False)
class ResistanceMatrix:
    """
    Symmetric nonnegative matrix with zero diagonal.

    ``labels`` maps each row to an original node index. Triangle-inequality
    violations beyond ``TOL_QUOT`` are reported with MetricViolationWarning,
    not rejected, so noisy measurements can still be used.
    """
    entries: np.ndarray
    labels: tuple = None

    def __post_init__(self):
        entries = np.array(frozen_square(self.entries, 'resistance'))
        scale = max(1.0, float(np.abs(entries).max()))
        tol = settings.TOL_QUOT * scale
        check_symmetric(entries, 'resistance', tol)
        diagonal = np.abs(np.diag(entries))
        if diagonal.max() > tol:
            i = int(np.argmax(diagonal))
            raise InvalidInput(
                f"diagonal entry {entries[i, i]!r} is not zero",
                field=f"resistance[{i},{i}]",
            )
        if entries.min() < -tol:
            i, j = np.unravel_index(np.argmin(entries), entries.shape)
            raise InvalidInput(
                f"resistance {entries[i, j]!r} is negative",
                field=f"resistance[{i},{j}]",
            )
        entries = np.clip((entries + entries.T) / 2.0, 0.0, None)
        np.fill_diagonal(entries, 0.0)
        entries.setflags(write=False)
        object.__setattr__(self, 'entries', entries)

        labels = tuple(range(entries.shape[0])) if self.labels is None else tuple(self.labels)
        if len(labels) != entries.shape[0]:
            raise InvalidInput(
                f"{len(labels)} labels for {entries.shape[0]} rows", field='labels'
            )
        object.__setattr__(self, 'labels', labels)

        violation = self.metric_violation
        if violation > tol:
            logger.warning(f"triangle inequality violated by {violation:.3e}")
            warnings.warn(
                f"resistance matrix violates the triangle inequality by {violation:.3e}",
                MetricViolationWarning,
                stacklevel=3,
            )

    @property
    def n(self):
        return self.entries.shape[0]

    @cached_property
    def metric_violation(self):
        """Largest R_ik - R_ij - R_jk over all triples (<= 0 for a metric)."""
        r = self.entries
        # one n x n slab per i
        return max(
            (float((row[None, :] - row[:, None] - r).max()) for row in r),
            default=0.0,
        )

    def restrict(self, nodes):
        """Sub-matrix over the original node indices ``nodes``."""
        rows = [self.labels.index(node) for node in nodes]
        return ResistanceMatrix(self.entries[np.ix_(rows, rows)], labels=tuple(nodes))

    def __repr__(self):
        return f"ResistanceMatrix(n={self.n})"
