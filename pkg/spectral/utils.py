"""
Eigenvalues and the interlacing / self-loop spectral bounds of Kron
reduction, checked numerically.
"""

import logging

import numpy as np
from scipy.linalg import eigvalsh
from django.conf import settings

from kronred.exceptions import ClassError, DimensionError
from kronred.utils import resolve
from graphcore.utils import augment, loopless_part
from kron.models import Partition
from kron.utils import kron_reduce, perturb_interior_edge
from .models import SpectralReport

logger = logging.getLogger(__name__)


class _Margins:
    """Running maximum of ``left - right`` over named inequalities."""

    def __init__(self):
        self.slack = -np.inf
        self.check = ''
        self.index = 0

    def le(self, name, left, right):
        """Record ``left[r] <= right[r]`` for every r."""
        gap = np.asarray(left, dtype=float) - np.asarray(right, dtype=float)
        r = int(np.argmax(gap))
        if gap[r] > self.slack:
            self.slack, self.check, self.index = float(gap[r]), name, r + 1

    def lt(self, name, left, right, tol):
        """
        Record the strict ``left[r] < right[r]``. The margin is shifted by
        2 tol, so the report holds at ``tol`` only if right clears left by tol.
        """
        self.le(name, np.asarray(left, dtype=float) + 2.0 * tol, right)

    def report(self, full, red, block, perturbed=None):
        if self.check:
            logger.info(f"worst margin {self.slack:.3e} at {self.check}, r={self.index}")
        return SpectralReport(
            lambda_full=full,
            lambda_red=red,
            lambda_block=block,
            slack=self.slack,
            worst_check=self.check,
            worst_index=self.index,
            lambda_perturbed=perturbed,
        )


def eigenvalues(q):
    """Ascending eigenvalues of a symmetric loopy Laplacian."""
    return eigvalsh(q.entries)


def algebraic_connectivity(l):
    """Second smallest eigenvalue of a loop-less Laplacian."""
    if not l.is_loopless:
        raise ClassError(f"algebraic connectivity needs a loop-less matrix, got {l!r}", field='class')
    if l.n < 2:
        raise DimensionError("algebraic connectivity needs n >= 2", field='n')
    return float(eigenvalues(l)[1])


def _interlacing(margins, full, red, block):
    n, m = full.size, red.size
    margins.le('lambda(Q) <= lambda(Q_red)', full[:m], red)
    margins.le('lambda(Q_red) <= lambda(Q[a,a])', red, block)
    margins.le('lambda(Q[a,a]) <= lambda_{r+n-m}(Q)', block, full[n - m:])


def verify_interlacing(q, p):
    """
    λ_r(Q) <= λ_r(Q_red) <= λ_r(Q[α,α]) <= λ_{r+n-|α|}(Q) for every r.

    Loop-less input additionally records λ2(L) <= λ2(L_red).
    """
    kr = kron_reduce(q, p)
    full = eigenvalues(q)
    red = eigenvalues(kr.q_red)
    block = eigvalsh(q.block(p.boundary, p.boundary))
    margins = _Margins()
    _interlacing(margins, full, red, block)
    if q.is_loopless:
        margins.le('lambda2(L) <= lambda2(L_red)', full[1:2], red[1:2])
    return margins.report(full, red, block)


def verify_loop_shift_bounds(q, p):
    """
    λ_r(L_red) + max A_red >= λ_r(L) + min A and
    λ_r(L_red) + min A_red <= λ_{r+n-|α|}(L) + max A.

    The report carries the spectra of the loop-less parts L, L_red and
    L[α,α].
    """
    kr = kron_reduce(q, p)
    l = loopless_part(q)
    full = eigenvalues(l)
    red = eigenvalues(kr.l_red)
    block = eigvalsh(l.block(p.boundary, p.boundary))
    loops, reduced_loops = q.row_sums, kr.q_red.row_sums
    n, m = full.size, red.size

    margins = _Margins()
    margins.le(
        'lambda(L) + min A <= lambda(L_red) + max A_red',
        full[:m] + loops.min(), red + reduced_loops.max(),
    )
    margins.le(
        'lambda(L_red) + min A_red <= lambda_{r+n-m}(L) + max A',
        red + reduced_loops.min(), full[n - m:] + loops.max(),
    )
    return margins.report(full, red, block)


def verify_augmented_interlacing(q, tol=None):
    """
    Interlacing of a strictly loopy Q with its augmented Laplacian Q̂:
    μ_1 = 0 < λ_1 and μ_r <= λ_r <= μ_{r+1}. λ_1 must exceed ``tol``
    (default: TOL_EIG_ABS) for the strict bound to hold.

    ``lambda_full`` holds μ, ``lambda_block`` holds λ(Q) and ``lambda_red``
    the spectrum of Q̂ with the ground eliminated.
    """
    if not q.is_strictly_loopy:
        raise ClassError(
            f"augmented interlacing needs a strictly loopy matrix, got {q!r}",
            field='class',
        )
    q_hat = augment(q)
    kr = kron_reduce(q_hat, Partition(q_hat.n, tuple(range(q.n))))
    full = eigenvalues(q_hat)
    red = eigenvalues(kr.q_red)
    block = eigenvalues(q)

    margins = _Margins()
    _interlacing(margins, full, red, block)
    margins.le('|mu_1| <= 0', np.abs(full[:1]), [0.0])
    margins.lt('0 < lambda_1', [0.0], block[:1], resolve(tol, settings.TOL_EIG_ABS))
    return margins.report(full, red, block)


def verify_perturbation_bounds(q, p, i, j, delta):
    """
    Weyl bounds for changing interior edge {i, j} by Δ. With
    s = Δ/(1 + Δ R_int) ||Q_ac (e_i - e_j)||^2:

        Δ < 0: λ_r(Q_red) + s <= λ_r(Q̃_red) <= λ_r(Q_red)
        Δ > 0: λ_r(Q_red) <= λ_r(Q̃_red) <= λ_r(Q_red) + s
    """
    kr = kron_reduce(q, p)
    q_new, detail = perturb_interior_edge(q, p, i, j, delta, reduction=kr)
    u = np.zeros(len(p.interior))
    u[p.interior_position(i)] = 1.0
    u[p.interior_position(j)] = -1.0
    shift = detail.delta / detail.denominator * float(np.sum((kr.q_ac @ u) ** 2))

    red = eigenvalues(kr.q_red)
    perturbed = eigenvalues(q_new)
    margins = _Margins()
    if delta < 0:
        margins.le('lambda(Q_red) + s <= lambda(Q~_red)', red + shift, perturbed)
        margins.le('lambda(Q~_red) <= lambda(Q_red)', perturbed, red)
    else:
        margins.le('lambda(Q_red) <= lambda(Q~_red)', red, perturbed)
        margins.le('lambda(Q~_red) <= lambda(Q_red) + s', perturbed, red + shift)
    return margins.report(
        eigenvalues(q), red, eigvalsh(q.block(p.boundary, p.boundary)), perturbed
    )
