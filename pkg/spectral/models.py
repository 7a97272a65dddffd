from dataclasses import dataclass, field

import numpy as np
from django.conf import settings

from kronred.utils import resolve


@dataclass(frozen=True, eq=False)
class SpectralReport:
    """
    Spectra compared by one verification and its worst margin.

    ``slack`` is the largest left-minus-right value over every inequality
    checked (negative when all hold). ``worst_check`` names that inequality
    and ``worst_index`` is its 1-based eigenvalue index r.
    """
    lambda_full: np.ndarray
    lambda_red: np.ndarray
    lambda_block: np.ndarray
    slack: float
    worst_check: str
    worst_index: int
    lambda_perturbed: np.ndarray = field(default=None)

    def holds(self, tol=None):
        return self.slack <= resolve(tol, settings.TOL_EIG_ABS)

    def as_dict(self):
        data = {
            'lambda_full': self.lambda_full.tolist(),
            'lambda_red': self.lambda_red.tolist(),
            'lambda_block': self.lambda_block.tolist(),
            'slack': self.slack,
            'worst_check': self.worst_check,
            'worst_index': self.worst_index,
        }
        if self.lambda_perturbed is not None:
            data['lambda_perturbed'] = self.lambda_perturbed.tolist()
        return data
