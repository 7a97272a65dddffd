"""
DC power flow on Kron-reduced networks.

Lossless networks are handled through the real susceptance Laplacian B, so
Im(Q_red[i,j]) is read off the reduced adjacency of B.
"""

import logging

import numpy as np
from scipy.linalg import solve
from django.conf import settings

from kronred.utils import resolve
from kronred.exceptions import (
    ClassError,
    CompatibilityError,
    CutsetDegenerate,
    DimensionError,
    UniformityError,
    InvalidInput,
)
from graphcore.models import LoopyLaplacian, check_symmetric, frozen_square
from graphcore.utils import pseudo_inverse
from kron.utils import (
    kron_reduce,
    perturb_interior_edge,
    perturbed_accompanying,
    solve_reduced,
)
from spectral.utils import algebraic_connectivity
from .models import CutsetResult, DcReduction, SyncAssessment, SyncCondition

logger = logging.getLogger(__name__)


def _injection_split(net, p):
    p.check_size(net.n)
    return net.p[list(p.boundary)], net.p[list(p.interior)]


def reduce_dc(net, p, reduction=None):
    """
    Reduced DC flow P[α] + B_ac P[β] = B_red θ[α].

    Returns:
        DcReduction(b_red, b_ac, p_reduced, reduction)
    """
    kr = reduction or kron_reduce(net.b, p)
    p_alpha, p_beta = _injection_split(net, p)
    return DcReduction(kr.q_red, kr.q_ac, p_alpha + kr.q_ac @ p_beta, kr)


def effective_power_inputs(net, p):
    """DC stand-in for the effective power inputs ω of the boundary."""
    return reduce_dc(net, p).p_reduced


def solve_dc(net, tol_edge=None):
    """
    Phase angles from P = B θ.

    A loop-less B returns the zero-mean solution.

    Raises:
        CompatibilityError: B is loop-less and Σ P is not zero
    """
    tol_edge = resolve(tol_edge, settings.TOL_EDGE)
    if net.b.is_strictly_loopy:
        return solve(net.b.entries, net.p, assume_a='pos')
    total = float(net.p.sum())
    if abs(total) > tol_edge:
        raise CompatibilityError(
            f"net injection {total!r} is not zero on a loop-less network"
        )
    theta = pseudo_inverse(net.b, nullity=1) @ net.p
    return theta - theta.mean()


def solve_reduced_dc(net, p, reduction=None):
    """Boundary angles θ[α] from the reduced flow equations."""
    kr = reduction or kron_reduce(net.b, p)
    return solve_reduced(kr, net.p)


def _clean_sigma(sigma, m):
    values = np.asarray(sigma)
    if values.shape != (m,):
        raise DimensionError(
            f"expected {m} cut indicators, got shape {values.shape}", field='sigma'
        )
    if not np.all((values == 0) | (values == 1)):
        raise InvalidInput("cut indicators must be 0 or 1", field='sigma')
    values = values.astype(float)
    if values.min() == values.max():
        raise CutsetDegenerate(
            "the cut must put boundary nodes on both sides", field='sigma'
        )
    return values


def _cut(p_reduced, b_red, sigma):
    return CutsetResult.from_flows(
        sigma @ p_reduced, sigma @ b_red.entries @ sigma, sigma.astype(int)
    )


def cutset(net, p, sigma, reduction=None):
    """
    Cutset power flow, susceptance and angle for the boundary cut σ.

    P_cut = σ^T (P[α] + B_ac P[β]), b_cut = σ^T B_red σ and
    θ_cut = P_cut / b_cut.

    Raises:
        CutsetDegenerate: σ is constant or b_cut <= TOL_EDGE
    """
    sigma = _clean_sigma(sigma, len(p.boundary))
    dc = reduce_dc(net, p, reduction)
    return _cut(dc.p_reduced, dc.b_red, sigma)


def cutset_after_perturbation(net, p, sigma, i, j, delta, reduction=None):
    """Cutset quantities after changing interior line {i, j} by Δ."""
    sigma = _clean_sigma(sigma, len(p.boundary))
    kr = reduction or kron_reduce(net.b, p)
    b_red, _ = perturb_interior_edge(net.b, p, i, j, delta, reduction=kr)
    b_ac = perturbed_accompanying(kr, i, j, delta)
    p_alpha, p_beta = _injection_split(net, p)
    return _cut(p_alpha + b_ac @ p_beta, b_red, sigma)


def coupling_weights(b_red, v_mag):
    """
    P_ij = |V_i| |V_j| A_red[i,j] with a zero diagonal.

    Raises:
        ClassError: a voltage magnitude is not positive
    """
    v = np.asarray(v_mag, dtype=float)
    if v.shape != (b_red.n,):
        raise DimensionError(
            f"expected {b_red.n} voltage magnitudes, got shape {v.shape}",
            field='v_mag',
        )
    if not np.all(v > 0.0):
        k = int(np.argmin(v > 0.0))
        raise ClassError(f"voltage magnitude {v[k]!r} is not positive", field=f"v_mag[{k}]")
    adjacency = -np.array(b_red.entries)
    np.fill_diagonal(adjacency, 0.0)
    return np.outer(v, v) * adjacency


def _omega(omega, m):
    omega = np.asarray(omega, dtype=float)
    if omega.shape != (m,):
        raise DimensionError(
            f"expected {m} power inputs, got shape {omega.shape}", field='omega'
        )
    return omega


def _loops(a_red_loops):
    loops = np.asarray(a_red_loops, dtype=float)
    if loops.ndim != 1 or loops.size == 0:
        raise DimensionError(
            f"expected one self-loop weight per boundary node, got shape {loops.shape}",
            field='a_red_loops',
        )
    return loops


def _pairwise_spread(omega):
    """(Σ_{i<j} (ω_i - ω_j)^2)^(1/2)."""
    gaps = np.subtract.outer(omega, omega)
    return float(np.sqrt(np.sum(np.triu(gaps, k=1) ** 2)))


def _positive(value, name):
    if not value > 0.0:
        raise ClassError(f"expected a positive value, got {value!r}", field=name)
    return float(value)


def sync_reduced(pij, omega):
    """
    The two sufficient synchronization conditions on reduced couplings:

        ReducedElementwise: |α| min_{i≠j} P_ij > max_{i,j} (ω_i - ω_j)
        ReducedSpectral:    λ2(L(P)) > (Σ_{i<j} (ω_i - ω_j)^2)^(1/2)
    """
    pij = frozen_square(pij, 'pij')
    m = pij.shape[0]
    if m < 2:
        raise DimensionError("coupling matrix needs at least 2 nodes", field='pij')
    check_symmetric(pij, 'pij', settings.TOL_SYM * max(1.0, float(np.abs(pij).max())))
    if np.abs(np.diag(pij)).max() > settings.TOL_SYM:
        raise InvalidInput("coupling matrix must have a zero diagonal", field='pij')
    off = ~np.eye(m, dtype=bool)
    if pij[off].min() < 0.0:
        raise InvalidInput("coupling weights must be nonnegative", field='pij')
    omega = _omega(omega, m)
    inputs = {'omega': omega.tolist(), 'pij': pij.tolist()}

    elementwise = SyncAssessment(
        SyncCondition.REDUCED_ELEMENTWISE,
        lhs=float(m * pij[off].min()),
        rhs=float(omega.max() - omega.min()),
        inputs=inputs,
    )
    laplacian = LoopyLaplacian(np.diag(pij.sum(axis=1)) - pij * off)
    spectral = SyncAssessment(
        SyncCondition.REDUCED_SPECTRAL,
        lhs=algebraic_connectivity(laplacian),
        rhs=_pairwise_spread(omega),
        inputs=inputs,
    )
    return elementwise, spectral


def sync_spectral_nonreduced(l, omega, v_lower, a_red_loops):
    """
    λ2(L) > (Σ_{i<j} (ω_i - ω_j)^2)^(1/2) / V^2 + max_i A_red[i,i]
    on the original loop-less network.
    """
    if not l.is_loopless:
        raise ClassError(f"expected the loop-less network Laplacian, got {l!r}", field='class')
    v_lower = _positive(v_lower, 'v_lower')
    loops = _loops(a_red_loops)
    if loops.size > l.n:
        raise DimensionError(
            f"{loops.size} boundary nodes exceed the {l.n} network nodes", field='a_red_loops'
        )
    omega = _omega(omega, loops.size)
    return SyncAssessment(
        SyncCondition.NON_REDUCED_SPECTRAL,
        lhs=algebraic_connectivity(l),
        rhs=_pairwise_spread(omega) / v_lower ** 2 + float(loops.max()),
        inputs={'omega': omega.tolist(), 'v_lower': v_lower, 'a_red_loops': loops.tolist()},
    )


def check_uniform_resistance(resistance, r_uniform, tol_uniform=None):
    """
    Every pairwise entry of ``resistance`` lies within ``tol_uniform``
    (relative) of ``r_uniform``.

    Raises:
        UniformityError
    """
    tol_uniform = resolve(tol_uniform, settings.TOL_UNIFORM)
    entries = resistance.entries
    off = ~np.eye(entries.shape[0], dtype=bool)
    deviation = float(np.abs(entries[off] - r_uniform).max()) / r_uniform
    if deviation > tol_uniform:
        raise UniformityError(
            f"resistances deviate {deviation:.3e} (relative) from {r_uniform!r}"
        )
    logger.debug(f"uniform resistance {r_uniform!r} verified within {deviation:.1e}")


def sync_resistive_nonreduced(r_uniform, omega, v_lower, a_red_loops,
                              resistance=None, tol_uniform=None):
    """
    1/R > max_{i,j} (ω_i - ω_j) / (2 V^2) + max_i A_red[i,i] under the
    uniform-resistance hypothesis, checked against ``resistance`` when
    given.
    """
    r_uniform = _positive(r_uniform, 'r_uniform')
    v_lower = _positive(v_lower, 'v_lower')
    loops = _loops(a_red_loops)
    omega = _omega(omega, loops.size)
    if resistance is not None:
        check_uniform_resistance(resistance, r_uniform, tol_uniform)
    return SyncAssessment(
        SyncCondition.NON_REDUCED_RESISTIVE,
        lhs=1.0 / r_uniform,
        rhs=float(omega.max() - omega.min()) / (2.0 * v_lower ** 2) + float(loops.max()),
        inputs={
            'omega': omega.tolist(),
            'v_lower': v_lower,
            'a_red_loops': loops.tolist(),
            'r_uniform': r_uniform,
        },
    )
