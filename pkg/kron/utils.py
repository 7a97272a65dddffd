"""
Kron reduction engine.

One-shot and iterative Schur complements of loopy Laplacians, reduced
network solves, perturbation updates and the graph-search prediction of
the reduced topology.
"""

import logging
from dataclasses import replace

import networkx as nx
import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve, solve
from django.conf import settings

from kronred.utils import resolve
from kronred.exceptions import (
    CompatibilityError,
    ConnectivityError,
    DecompositionUnavailable,
    DimensionError,
    IllConditionedError,
    InvariantBreach,
    PerturbationInvalid,
    SingularPivotError,
    SingularUpdateError,
    InvalidInput,
)
from graphcore.models import LoopyLaplacian
from graphcore.utils import (
    augment,
    is_irreducible,
    loopless_part,
    pseudo_inverse,
    to_networkx,
)
from .models import (
    InteriorPerturbation,
    IterativeReduction,
    KronReduction,
    Partition,
    ReducedTopology,
    SelfLoopDecomposition,
)

logger = logging.getLogger(__name__)


def _clean_schur(matrix, tol_edge, what):
    """
    Symmetrize a Schur complement and clip round-off positive off-diagonals.

    Positive off-diagonals above ``tol_edge`` raise InvariantBreach.
    """
    matrix = (matrix + matrix.T) / 2.0
    off = matrix - np.diag(np.diag(matrix))
    if off.size and off.max() > tol_edge:
        i, j = np.unravel_index(np.argmax(off), off.shape)
        raise InvariantBreach(
            f"{what} has positive off-diagonal {off[i, j]!r} at ({i},{j})"
        )
    clip = off > 0.0
    if clip.any():
        logger.debug(f"{what}: clipped {int(clip.sum())} round-off off-diagonals")
        matrix[clip] = 0.0
    return matrix


def _factor(block, cond_max, what='interior block'):
    """Cholesky factor of a symmetric positive definite block."""
    estimate = float(np.linalg.cond(block))
    if not np.isfinite(estimate) or estimate > cond_max:
        raise IllConditionedError(
            f"{what} condition estimate {estimate:.3e} exceeds {cond_max:.1e}",
            estimate=estimate,
        )
    try:
        return cho_factor(block)
    except LinAlgError as e:
        raise IllConditionedError(
            f"{what} is not positive definite: {e}", estimate=estimate
        ) from e


def kron_reduce(q, p, tol_edge=None, cond_max=None):
    """
    Kron-reduce ``q`` onto the boundary of ``p``.

    Q_red = Q[α,α] - Q[α,β] Q[β,β]^-1 Q[β,α] and Q_ac = -Q[α,β] Q[β,β]^-1,
    with rows ordered by ``p.boundary``.

    Raises:
        ConnectivityError: q is reducible
        IllConditionedError: the interior block is numerically singular
    """
    tol_edge = resolve(tol_edge, settings.TOL_EDGE)
    cond_max = resolve(cond_max, settings.COND_MAX)
    p.check_size(q.n)
    if not is_irreducible(q, tol_edge):
        raise ConnectivityError(f"{q!r} is reducible; its graph is disconnected")

    alpha, beta = p.boundary, p.interior
    factor = _factor(q.block(beta, beta), cond_max)
    q_ab = q.block(alpha, beta)
    # Q[β,β]^-1 Q[β,α]
    x = cho_solve(factor, q_ab.T)
    q_red = _clean_schur(q.block(alpha, alpha) - q_ab @ x, tol_edge, 'Q_red')
    q_ac = -x.T

    reduced = LoopyLaplacian(q_red)
    if reduced.laplacian_class is not q.laplacian_class:
        logger.warning(
            f"reduction changed class {q.laplacian_class.value} -> "
            f"{reduced.laplacian_class.value} within tolerance"
        )
    logger.info(f"reduced {q.n} nodes to {len(alpha)}")
    return KronReduction(
        q_red=reduced,
        q_ac=q_ac,
        partition=p,
        source=q,
        interior_factor=factor,
    )


def _eliminate(entries, pos, tol_edge):
    pivot = entries[pos, pos]
    if pivot <= tol_edge:
        raise SingularPivotError(f"pivot {pivot!r} at row {pos} is not positive")
    column = entries[:, pos]
    updated = entries - np.outer(column, column) / pivot
    keep = [k for k in range(entries.shape[0]) if k != pos]
    return _clean_schur(updated[np.ix_(keep, keep)], tol_edge, 'Q^l')


def reduce_by_one(q, k, tol_edge=None):
    """
    Eliminate row/column ``k`` of ``q`` with the component formula
    Q'_ij = Q_ij - Q_ik Q_jk / Q_kk.
    """
    tol_edge = resolve(tol_edge, settings.TOL_EDGE)
    if not 0 <= k < q.n:
        raise InvalidInput(f"node {k} is outside 0..{q.n - 1}", field='k')
    if q.n < 2:
        raise DimensionError("cannot eliminate the only node", field='k')
    return LoopyLaplacian(_eliminate(np.array(q.entries), k, tol_edge))


def default_order(p):
    """Interior nodes by descending original index."""
    return tuple(sorted(p.interior, reverse=True))


def kron_reduce_iterative(q, p, order=None, tol_edge=None, cond_max=None):
    """
    Eliminate the interior one node at a time.

    Args:
        q: LoopyLaplacian
        p: Partition
        order: permutation of ``p.interior`` (original indices); defaults to
            descending index

    Returns:
        IterativeReduction whose reduction carries the iterated Q_red and the
        one-shot accompanying matrix.
    """
    tol_edge = resolve(tol_edge, settings.TOL_EDGE)
    base = kron_reduce(q, p, tol_edge=tol_edge, cond_max=cond_max)
    order = default_order(p) if order is None else tuple(int(k) for k in order)
    if sorted(order) != list(p.interior):
        raise InvalidInput(
            f"order {order} is not a permutation of the interior {p.interior}",
            field='order',
        )

    entries = np.array(q.entries)
    labels = list(range(q.n))
    steps = [q]
    history = [tuple(labels)]
    for k in order:
        entries = _eliminate(entries, labels.index(k), tol_edge)
        labels.remove(k)
        steps.append(LoopyLaplacian(entries))
        history.append(tuple(labels))

    return IterativeReduction(
        reduction=replace(base, q_red=steps[-1]),
        steps=tuple(steps),
        order=order,
        labels=tuple(history),
    )


def predict_loop_update(q_prev, k, i):
    """
    Self-loop weight of node ``i`` after eliminating node ``k``.

    A'_ii = A_ii + A_ik (1 - L_kk / (L_kk + A_kk)), and A_ii unchanged when
    A_kk = 0.
    """
    if k == i:
        raise InvalidInput("k and i must differ", field='i')
    loops = q_prev.row_sums
    a_ii, a_kk = float(loops[i]), float(loops[k])
    if a_kk <= 0.0:
        return a_ii
    a_ik = -float(q_prev.entries[i, k])
    l_kk = float(q_prev.entries[k, k]) - a_kk
    return a_ii + a_ik * (1.0 - l_kk / (l_kk + a_kk))


def reduced_self_loops(q, p, reduction=None):
    """A_red[i,i] = Δ_i + Σ_j Q_ac[i,j] Δ_j over the interior j."""
    kr = reduction or kron_reduce(q, p)
    loops = q.row_sums
    return loops[list(p.boundary)] + kr.q_ac @ loops[list(p.interior)]


def self_loop_decomposition(q, p, cond_max=None):
    """
    Split Q_red into L/L[β,β] + diag(Δ[α]) + S.

    S = L_ac (I + diag(Δ[β]) L[β,β]^-1)^-1 diag(Δ[β]) L_ac^T.

    Raises:
        DecompositionUnavailable: the loop-less interior block is singular
    """
    cond_max = resolve(cond_max, settings.COND_MAX)
    p.check_size(q.n)
    if not is_irreducible(q):
        raise ConnectivityError(f"{q!r} is reducible; its graph is disconnected")
    alpha, beta = list(p.boundary), list(p.interior)
    l = loopless_part(q)
    try:
        factor = _factor(l.block(beta, beta), cond_max, 'loop-less interior block')
        l_schur = kron_reduce(l, p, cond_max=cond_max).q_red
    except (IllConditionedError, ConnectivityError) as e:
        raise DecompositionUnavailable(
            f"loop-less part cannot be reduced: {e}"
        ) from e

    loops = q.row_sums
    delta_beta = np.diag(loops[beta])
    l_ac = -cho_solve(factor, l.block(beta, alpha)).T
    inner = np.eye(len(beta)) + delta_beta @ cho_solve(factor, np.eye(len(beta)))
    s = l_ac @ solve(inner, delta_beta) @ l_ac.T
    s = (s + s.T) / 2.0
    return SelfLoopDecomposition(l_schur, np.array(loops[alpha]), s)


def _reduced_currents(kr, currents):
    currents = np.asarray(currents, dtype=float)
    if currents.shape != (kr.partition.n,):
        raise DimensionError(
            f"expected {kr.partition.n} currents, got shape {currents.shape}",
            field='currents',
        )
    alpha, beta = list(kr.partition.boundary), list(kr.partition.interior)
    return currents, currents[alpha] + kr.q_ac @ currents[beta]


def solve_reduced(kr, currents, tol_edge=None, tol_eig=None):
    """
    Boundary voltages of the reduced network I_α + Q_ac I_β = Q_red V_α.

    A loop-less reduction returns the zero-mean solution.

    Raises:
        CompatibilityError: loop-less case with nonzero net current
    """
    tol_edge = resolve(tol_edge, settings.TOL_EDGE)
    _, rhs = _reduced_currents(kr, currents)
    if kr.q_red.is_strictly_loopy:
        return solve(kr.q_red.entries, rhs, assume_a='pos')

    total = float(rhs.sum())
    if abs(total) > tol_edge:
        raise CompatibilityError(
            f"net injected current {total!r} is not zero on a loop-less network"
        )
    v = pseudo_inverse(kr.q_red, tol_eig, nullity=1) @ rhs
    return v - v.mean()


def recover_interior(kr, v_alpha, currents):
    """
    Full voltage vector from boundary voltages:
    V_β = Q[β,β]^-1 (I_β - Q[β,α] V_α).
    """
    currents, _ = _reduced_currents(kr, currents)
    v_alpha = np.asarray(v_alpha, dtype=float)
    alpha, beta = list(kr.partition.boundary), list(kr.partition.interior)
    if v_alpha.shape != (len(alpha),):
        raise DimensionError(
            f"expected {len(alpha)} boundary voltages, got shape {v_alpha.shape}",
            field='v_alpha',
        )
    q_ba = kr.source.block(beta, alpha)
    v = np.zeros(kr.partition.n)
    v[alpha] = v_alpha
    v[beta] = kr.interior_solve(currents[beta] - q_ba @ v_alpha)
    return v


def perturb_boundary(kr, w_alpha):
    """Q_red + W[α,α], revalidated as a loopy Laplacian."""
    w = np.asarray(w_alpha, dtype=float)
    m = kr.q_red.n
    if w.shape != (m, m):
        raise DimensionError(
            f"expected a {m}x{m} perturbation, got shape {w.shape}",
            field='w_alpha',
        )
    if np.abs(w - w.T).max() > settings.TOL_SYM * max(1.0, np.abs(w).max()):
        raise InvalidInput("perturbation is not symmetric", field='w_alpha')
    try:
        return LoopyLaplacian(kr.q_red.entries + w)
    except InvalidInput as e:
        raise PerturbationInvalid(f"perturbed Q_red is invalid: {e}") from e


def _edge_vector(p, i, j):
    if i == j:
        raise InvalidInput("perturbed edge needs two distinct nodes", field='j')
    u = np.zeros(len(p.interior))
    u[p.interior_position(i)] = 1.0
    u[p.interior_position(j)] = -1.0
    return u


def perturbed_laplacian(q, i, j, delta):
    """q + Δ (e_i - e_j)(e_i - e_j)^T in full coordinates."""
    entries = np.array(q.entries)
    entries[i, i] += delta
    entries[j, j] += delta
    entries[i, j] -= delta
    entries[j, i] -= delta
    try:
        return LoopyLaplacian(entries)
    except InvalidInput as e:
        raise PerturbationInvalid(
            f"changing edge {{{i},{j}}} by {delta!r} is invalid: {e}"
        ) from e


def interior_perturbation(kr, i, j, delta, tol_edge=None):
    """
    Validate an interior edge change and compute R_int.

    Raises:
        PerturbationInvalid: the edge weight would turn negative
        ConnectivityError: the perturbed graph is disconnected
        SingularUpdateError: 1 + Δ R_int <= tol_edge
    """
    tol_edge = resolve(tol_edge, settings.TOL_EDGE)
    p = kr.partition
    u = _edge_vector(p, i, j)
    perturbed = perturbed_laplacian(kr.source, i, j, delta)
    if not is_irreducible(perturbed, tol_edge):
        raise ConnectivityError(
            f"changing edge {{{i},{j}}} by {delta!r} disconnects the graph"
        )
    r_int = float(u @ kr.interior_solve(u))
    detail = InteriorPerturbation(i=i, j=j, delta=float(delta), r_int=r_int)
    if detail.denominator <= tol_edge:
        raise SingularUpdateError(
            f"update denominator 1 + {delta!r}*{r_int!r} is not positive"
        )
    return detail, u


def perturb_interior_edge(q, p, i, j, delta, reduction=None, tol_edge=None):
    """
    Reduced matrix after changing interior edge {i, j} by Δ:
    Q_red + Δ Q_ac u u^T Q_ac^T / (1 + Δ R_int) with u = e_i - e_j.

    ``reduction`` reuses a cached KronReduction of ``q``.

    Returns:
        (LoopyLaplacian, InteriorPerturbation)
    """
    tol_edge = resolve(tol_edge, settings.TOL_EDGE)
    kr = reduction or kron_reduce(q, p, tol_edge=tol_edge)
    detail, u = interior_perturbation(kr, i, j, delta, tol_edge)
    v = kr.q_ac @ u
    update = (detail.delta / detail.denominator) * np.outer(v, v)
    entries = _clean_schur(kr.q_red.entries + update, tol_edge, 'perturbed Q_red')
    return LoopyLaplacian(entries), detail


def perturbed_accompanying(kr, i, j, delta, tol_edge=None):
    """Q_ac - Δ Q_ac u u^T Q[β,β]^-1 / (1 + Δ R_int)."""
    detail, u = interior_perturbation(kr, i, j, delta, tol_edge)
    v = kr.q_ac @ u
    w = kr.interior_solve(u)
    return kr.q_ac - (detail.delta / detail.denominator) * np.outer(v, w)


def predict_reduced_topology(q, p, tol_edge=None):
    """
    Reduced edges and self-loops by graph search alone.

    Boundary nodes i, j are adjacent after reduction iff they are adjacent
    or reach a common interior component. A boundary node is loopy iff it
    carries a loop or touches an interior component holding one.
    """
    p.check_size(q.n)
    graph = to_networkx(q, tol_edge)
    interior = set(p.interior)
    component = {}
    grounded = set()
    for label, nodes in enumerate(nx.connected_components(graph.subgraph(interior))):
        for k in nodes:
            component[k] = label
        if any(graph.nodes[k]['loop'] > 0.0 for k in nodes):
            grounded.add(label)

    touches = {
        i: {component[k] for k in graph[i] if k in interior}
        for i in p.boundary
    }
    edges = frozenset(
        (i, j)
        for a, i in enumerate(p.boundary)
        for j in p.boundary[a + 1:]
        if graph.has_edge(i, j) or touches[i] & touches[j]
    )
    loops = frozenset(
        i for i in p.boundary
        if graph.nodes[i]['loop'] > 0.0 or touches[i] & grounded
    )
    return ReducedTopology(edges, loops)


def reduced_topology(kr, tol_edge=None):
    """Thresholded pattern of ``a_red`` in original indices."""
    tol_edge = resolve(tol_edge, settings.TOL_EDGE)
    nodes = kr.permutation
    return ReducedTopology(
        frozenset((nodes[a], nodes[b]) for a, b, _ in kr.a_red.edges(tol_edge)),
        frozenset(nodes[a] for a, _ in kr.a_red.loops(tol_edge)),
    )


def augmented_reduction(q, p, tol_edge=None, cond_max=None):
    """Kron reduction of augment(q) keeping the boundary and the ground."""
    q_hat = augment(q)
    p_hat = Partition(q_hat.n, p.boundary + (q.n,))
    return kron_reduce(q_hat, p_hat, tol_edge=tol_edge, cond_max=cond_max).q_red
