"""
DC power network value types and synchronization assessments.
"""

from dataclasses import dataclass, field
from enum import Enum
from typing import NamedTuple

import numpy as np
from django.conf import settings

from kronred.exceptions import ConnectivityError, CutsetDegenerate, DimensionError, InvalidInput
from graphcore.utils import is_irreducible


def _vector(values, n, name):
    vector = np.array(values, dtype=float, copy=True)
    if vector.shape != (n,):
        raise DimensionError(f"expected {n} values, got shape {vector.shape}", field=name)
    if not np.all(np.isfinite(vector)):
        raise InvalidInput("value is not finite", field=f"{name}[{int(np.argmin(np.isfinite(vector)))}]")
    vector.setflags(write=False)
    return vector


@dataclass(frozen=True, eq=False)
class DcNetwork:
    """
    Lossless network in the DC model P = B θ.

    ``b`` is the susceptance matrix as a LoopyLaplacian, ``p`` the real
    power injections and ``theta`` optional phase angles (radians).
    """
    b: object
    p: np.ndarray
    theta: np.ndarray = None

    def __post_init__(self):
        if not is_irreducible(self.b):
            raise ConnectivityError(f"susceptance matrix {self.b!r} is reducible")
        object.__setattr__(self, 'p', _vector(self.p, self.b.n, 'p'))
        if self.theta is not None:
            object.__setattr__(self, 'theta', _vector(self.theta, self.b.n, 'theta'))

    @property
    def n(self):
        return self.b.n

    @property
    def is_balanced(self):
        """Total injection is zero within TOL_EDGE."""
        return abs(float(self.p.sum())) <= settings.TOL_EDGE


class DcReduction(NamedTuple):
    b_red: object
    b_ac: np.ndarray
    p_reduced: np.ndarray
    reduction: object


@dataclass(frozen=True)
class CutsetResult:
    """
    Power, susceptance and angle across the cut of α into σ = 1 and σ = 0.

    Build with ``from_flows`` so that theta_cut = p_cut / b_cut.
    """
    p_cut: float
    b_cut: float
    theta_cut: float
    sigma: tuple

    def __post_init__(self):
        if not self.b_cut > settings.TOL_EDGE:
            raise CutsetDegenerate(
                f"cut susceptance {self.b_cut!r} is not positive", field='sigma'
            )

    @classmethod
    def from_flows(cls, p_cut, b_cut, sigma):
        p_cut, b_cut = float(p_cut), float(b_cut)
        if not b_cut > settings.TOL_EDGE:
            raise CutsetDegenerate(
                f"cut susceptance {b_cut!r} is not positive", field='sigma'
            )
        return cls(p_cut, b_cut, p_cut / b_cut, tuple(int(s) for s in sigma))

    def as_dict(self):
        return {
            'p_cut': self.p_cut,
            'b_cut': self.b_cut,
            'theta_cut': self.theta_cut,
            'sigma': list(self.sigma),
        }


class SyncCondition(Enum):
    REDUCED_ELEMENTWISE = 'ReducedElementwise'
    REDUCED_SPECTRAL = 'ReducedSpectral'
    NON_REDUCED_SPECTRAL = 'NonReducedSpectral'
    NON_REDUCED_RESISTIVE = 'NonReducedResistive'


@dataclass(frozen=True)
class SyncAssessment:
    """A sufficient synchronization condition ``lhs > rhs`` and its inputs."""
    condition: SyncCondition
    lhs: float
    rhs: float
    inputs: dict = field(default_factory=dict, compare=False)

    @property
    def satisfied(self):
        return self.lhs > self.rhs

    def as_dict(self):
        return {
            'condition': self.condition.value,
            'lhs': self.lhs,
            'rhs': self.rhs,
            'satisfied': self.satisfied,
            'inputs': self.inputs,
        }
