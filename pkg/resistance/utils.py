"""
Effective resistance by three routes, impedance reconstruction from
resistance data, and closed forms for uniform networks.
"""

import logging
import numbers

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve, solve
from django.conf import settings

from kronred.utils import resolve
from kronred.exceptions import (
    ClassError,
    ConnectivityError,
    DimensionError,
    InvariantBreach,
    SingularReconstruction,
    SingularUpdateError,
    InvalidInput,
)
from graphcore.models import LoopyLaplacian
from graphcore.utils import augment, is_irreducible, pseudo_inverse
from kron.utils import interior_perturbation, kron_reduce
from .models import ImpedanceMode, ResistanceMatrix, UniformInverse

logger = logging.getLogger(__name__)


def _resistance_from_impedance(z, labels=None):
    """R_ij = Z_ii + Z_jj - 2 Z_ij for a symmetric (pseudo-)inverse Z."""
    d = np.diag(z)
    r = d[:, None] + d[None, :] - z - z.T
    np.fill_diagonal(r, 0.0)
    return ResistanceMatrix(r, labels=labels)


def _require_connected(q):
    if not is_irreducible(q):
        raise ConnectivityError(
            f"{q!r} is reducible; resistance between components is infinite"
        )


def _require_loopless(l, what):
    if not l.is_loopless:
        raise ClassError(f"{what} needs a loop-less Laplacian, got {l!r}", field='class')


def impedance(q, tol_eig=None):
    """
    Q^-1 for a strictly loopy ``q`` and the spectral pseudo-inverse Q† for a
    loop-less one.
    """
    _require_connected(q)
    if q.is_loopless:
        return pseudo_inverse(q, tol_eig, nullity=1)
    try:
        factor = cho_factor(q.entries)
    except LinAlgError as e:
        raise InvariantBreach(f"strictly loopy {q!r} is singular: {e}") from e
    return cho_solve(factor, np.eye(q.n))


def effective_resistance(q, tol_eig=None):
    """
    R_ij = (e_i - e_j)^T Q† (e_i - e_j).

    Raises:
        ConnectivityError: q is reducible
    """
    return _resistance_from_impedance(impedance(q, tol_eig))


def resistance_via_reference(l, ref):
    """
    Effective resistance over the nodes other than ``ref`` from the grounded
    matrix L with row and column ``ref`` removed.
    """
    _require_loopless(l, 'reference-node resistance')
    if l.n < 3:
        raise DimensionError(
            f"reference-node resistance needs n >= 3, got {l.n}", field='n'
        )
    if not 0 <= ref < l.n:
        raise InvalidInput(f"node {ref} is outside 0..{l.n - 1}", field='ref')
    _require_connected(l)
    keep = [k for k in range(l.n) if k != ref]
    grounded = cho_solve(cho_factor(l.block(keep, keep)), np.eye(l.n - 1))
    return _resistance_from_impedance(grounded, labels=tuple(keep))


def shifted_inverse(l, delta):
    """(L + (δ/n) 1) ^-1, which equals L† + 1/(δn) 1."""
    _require_loopless(l, 'shifted resistance')
    if delta == 0:
        raise DimensionError("shift must be nonzero", field='delta')
    _require_connected(l)
    shifted = l.entries + (delta / l.n) * np.ones((l.n, l.n))
    return solve(shifted, np.eye(l.n), assume_a='sym')


def resistance_via_shift(l, delta=1.0):
    """Effective resistance from the rank-one shifted Laplacian."""
    return _resistance_from_impedance(shifted_inverse(l, delta))


def impedance_from_resistance(r, mode, cond_max=None):
    """
    Rebuild an impedance matrix from effective resistances.

    LoopLess: L† by double centering,
        -1/2 (R_ij - mean_k R_ik - mean_k R_jk + mean R).
    AugmentedLoopy: the same on an augmented R whose last node is the ground,
        giving Q̂†.
    LoopyDirect: Q^-1 with Q^-1_ij = 1/2 (R_ig + R_jg - R_ij), g the last node.

    Raises:
        SingularReconstruction: LoopyDirect result is not invertible
    """
    mode = ImpedanceMode(mode)
    entries = r.entries
    if mode is ImpedanceMode.LOOPY_DIRECT:
        if r.n < 2:
            raise DimensionError("need at least one node besides the ground", field='n')
        to_ground = entries[:-1, -1]
        z = 0.5 * (to_ground[:, None] + to_ground[None, :] - entries[:-1, :-1])
        cond_max = resolve(cond_max, settings.COND_MAX)
        estimate = float(np.linalg.cond(z))
        if not np.isfinite(estimate) or estimate > cond_max:
            raise SingularReconstruction(
                f"reconstructed Q^-1 has condition estimate {estimate:.3e}"
            )
        return z

    row_mean = entries.mean(axis=1)
    return -0.5 * (
        entries - row_mean[:, None] - row_mean[None, :] + entries.mean()
    )


def ground_resistance(q, tol_eig=None):
    """Resistance from every node to the ground of augment(q)."""
    if q.is_loopless:
        raise ClassError(
            "a loop-less Laplacian has no grounded node", field='class'
        )
    r = effective_resistance(augment(q), tol_eig)
    return np.array(r.entries[:-1, -1])


def _check_uniform_parameters(a, b):
    for name, value in (('a', a), ('b', b)):
        if isinstance(value, bool) or not isinstance(value, numbers.Real):
            raise InvalidInput(f"expected a number, got {value!r}", field=name)
    if a <= 0:
        raise ClassError(f"edge weight a must be positive, got {a!r}", field='a')
    if b < 0:
        raise ClassError(f"loop weight b must be nonnegative, got {b!r}", field='b')


def _check_count(n, minimum, name):
    if isinstance(n, bool) or not isinstance(n, numbers.Integral) or n < minimum:
        raise DimensionError(f"expected an integer >= {minimum}, got {n!r}", field=name)


def uniform_laplacian(n, a, b=0.0):
    """Complete graph with edge weight ``a`` and a loop ``b`` at every node."""
    _check_count(n, 1, 'n')
    _check_uniform_parameters(a, b)
    return LoopyLaplacian(a * (n * np.eye(n) - np.ones((n, n))) + b * np.eye(n))


def uniform_laplacian_inverse(n, a, b, which):
    """
    Closed-form (pseudo-)inverses of the uniform Laplacian.

    Pseudo (b = 0): Q/(n^2 a^2).
    Inverse (b > 0): -a/(b(an+b)) (nI - 1) + I/b.
    AugmentedPseudo (b > 0): Q̂† with blocks c(nI - 1) + dI, -d 1 and n d,
        d = 1/(b(n+1)^2), c = -d(a - (n+2)b)/(an+b).
    """
    which = UniformInverse(which)
    _check_count(n, 2, 'n')
    _check_uniform_parameters(a, b)
    centered = n * np.eye(n) - np.ones((n, n))

    if which is UniformInverse.PSEUDO:
        if b != 0:
            raise ClassError("the pseudo-inverse form needs b = 0", field='b')
        return a * centered / (n * a) ** 2

    if b == 0:
        raise ClassError(f"the {which.value} form needs b > 0", field='b')
    if which is UniformInverse.INVERSE:
        return -a / (b * (a * n + b)) * centered + np.eye(n) / b

    d = 1.0 / (b * (n + 1) ** 2)
    c = -d * (a - (n + 2) * b) / (a * n + b)
    result = np.empty((n + 1, n + 1))
    result[:n, :n] = c * centered + d * np.eye(n)
    result[:n, n] = result[n, :n] = -d
    result[n, n] = n * d
    return result


def uniform_reduced_resistance(m, a, b=0.0):
    """
    Resistance r between any two nodes of a uniform network on ``m`` nodes
    and, when b > 0, resistance g from any node to ground.

    Returns:
        (r, g) with g None for b = 0
    """
    _check_count(m, 2, 'm')
    _check_uniform_parameters(a, b)
    if b == 0:
        return 2.0 / (m * a), None
    return 2.0 / (m * a + b), (a + b) / (b * (a * m + b))


def uniform_parameters_from_resistance(m, r, g=None):
    """
    Invert uniform_reduced_resistance: edge weight a and loop weight b from
    measured r and g.
    """
    _check_count(m, 2, 'm')
    if r <= 0:
        raise ClassError(f"resistance r must be positive, got {r!r}", field='r')
    if g is None:
        return 2.0 / (m * r), 0.0
    if g <= 0:
        raise ClassError(f"ground resistance g must be positive, got {g!r}", field='g')
    b = 2.0 / (r + m * (2.0 * g - r))
    a = b * (2.0 * g - r) / r
    if a <= 0 or b < 0:
        raise ClassError(
            f"no uniform network has r={r!r}, g={g!r} on {m} nodes", field='g'
        )
    return a, b


def perturbed_resistance(q, p, i, j, delta, tol_eig=None, tol_edge=None):
    """
    Resistance after changing interior edge {i, j} by Δ:
    R̃_kl = R_kl - Δ/(1 + Δ R_ij) ((e_k - e_l)^T Q† (e_i - e_j))^2.

    Raises:
        as kron.utils.perturb_interior_edge
    """
    tol_edge = resolve(tol_edge, settings.TOL_EDGE)
    interior_perturbation(kron_reduce(q, p, tol_edge=tol_edge), i, j, delta, tol_edge)

    z = impedance(q, tol_eig)
    r = _resistance_from_impedance(z)
    denominator = 1.0 + delta * r.entries[i, j]
    if denominator <= tol_edge:
        raise SingularUpdateError(
            f"update denominator 1 + {delta!r}*{r.entries[i, j]!r} is not positive"
        )
    y = z[:, i] - z[:, j]
    transfer = y[:, None] - y[None, :]
    return ResistanceMatrix(r.entries - delta / denominator * transfer ** 2)
