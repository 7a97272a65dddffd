"""
Property suite behind ``kronred verify``.

Every property is a pure function of the input matrix and the list of
boundary sets. The suite runs them on a thread pool and merges the results
by property name, so the report does not depend on scheduling.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from itertools import combinations

import numpy as np
from django.conf import settings

from kronred.utils import resolve
from graphcore.factories import random_boundary
from graphcore.utils import augment
from kron.models import Partition
from kron.utils import (
    augmented_reduction,
    kron_reduce,
    kron_reduce_iterative,
    perturb_interior_edge,
    perturbed_accompanying,
    perturbed_laplacian,
    predict_reduced_topology,
    reduced_topology,
)
from resistance.utils import effective_resistance, perturbed_resistance
from spectral.utils import (
    verify_augmented_interlacing,
    verify_interlacing,
    verify_loop_shift_bounds,
)

logger = logging.getLogger(__name__)

# Amount added to one reduced off-diagonal by --debug-corrupt.
CORRUPTION = 1e-3

PROPERTIES = {}


def register(name):
    def decorator(check):
        PROPERTIES[name] = check
        return check
    return decorator


@dataclass(frozen=True)
class PropertyResult:
    """
    Outcome of one property over every boundary set.

    ``worst`` is the largest error found (scaled by the size of the compared
    values); the property passes when ``worst <= tolerance``. ``boundary`` is
    the 1-based boundary set where it was found.
    """
    name: str
    passed: bool
    worst: float
    tolerance: float
    boundary: tuple = ()
    detail: str = ''

    def as_dict(self):
        return {
            'name': self.name,
            'passed': self.passed,
            'worst': self.worst,
            'tolerance': self.tolerance,
            'boundary': list(self.boundary),
            'detail': self.detail,
        }


class _Worst:
    """Running maximum of named errors."""

    def __init__(self, name, tolerance):
        self.name = name
        self.tolerance = tolerance
        self.error = 0.0
        self.boundary = ()
        self.detail = ''
        self.seen = False

    def record(self, error, p, detail):
        error = float(error)
        if self.seen and error <= self.error:
            return
        self.seen = True
        self.error = error
        self.boundary = () if p is None else tuple(k + 1 for k in p.boundary)
        self.detail = detail

    def result(self):
        return PropertyResult(
            name=self.name,
            passed=self.error <= self.tolerance,
            worst=self.error,
            tolerance=self.tolerance,
            boundary=self.boundary,
            detail=self.detail,
        )


def _scaled(difference, reference):
    return float(np.abs(difference).max()) / max(1.0, float(np.abs(reference).max()))


def _entry(errors, rows, cols=None):
    """1-based original labels of the largest entry of ``errors``."""
    if cols is None:
        return f"[{rows[int(np.argmax(errors))] + 1}]"
    i, j = np.unravel_index(np.argmax(errors), errors.shape)
    return f"[{rows[i] + 1},{cols[j] + 1}]"


def boundary_sets(n, cap=None, samples=None, seed=None):
    """
    Every boundary set of size 2..n-1 when ``n <= cap``, otherwise
    ``samples`` distinct random sets drawn with ``seed``.
    """
    cap = resolve(cap, settings.VERIFY_CAP)
    samples = resolve(samples, settings.VERIFY_SAMPLES)
    seed = resolve(seed, settings.DEFAULT_SEED)
    if n <= cap:
        return [
            Partition(n, boundary)
            for size in range(2, n)
            for boundary in combinations(range(n), size)
        ]
    rng = np.random.default_rng(seed)
    seen = {}
    for _ in range(samples):
        boundary = random_boundary(rng, n)
        seen.setdefault(boundary, Partition(n, boundary))
    return list(seen.values())


@register('closure')
def check_closure(q, partitions, tol, seed, corrupt=False):
    worst = _Worst('closure', tol)
    loopy = q.is_strictly_loopy
    for p in partitions:
        kr = kron_reduce(q, p)
        alpha, beta = p.boundary, p.interior
        entries = np.array(kr.q_red.entries)
        if corrupt:
            entries[0, 1] += CORRUPTION
        row_sums = entries.sum(axis=1)
        off = entries - np.diag(np.diag(entries))
        checks = [
            ('q_red symmetric', np.abs(entries - entries.T), alpha, alpha),
            ('q_red off-diagonal <= 0', np.clip(off, 0.0, None), alpha, alpha),
            ('q_red row sum >= 0', np.clip(-row_sums, 0.0, None), alpha, None),
            ('q_ac >= 0', np.clip(-kr.q_ac, 0.0, None), alpha, beta),
        ]
        if loopy:
            preserved = 0.0 if row_sums.max() > settings.TOL_EDGE else 1.0
            worst.record(preserved, p, 'strictly loopy class lost')
        else:
            checks.append(('q_red row sum = 0', np.abs(row_sums), alpha, None))
            checks.append(('q_ac column sum = 1', np.abs(kr.column_sums() - 1.0), beta, None))
        for name, errors, rows, cols in checks:
            worst.record(errors.max(), p, f"{name} at {_entry(errors, rows, cols)}")
    return worst.result()


@register('quotient')
def check_quotient(q, partitions, tol, seed, corrupt=False):
    worst = _Worst('quotient', tol)
    rng = np.random.default_rng(seed)
    for p in partitions:
        one_shot = kron_reduce(q, p).q_red.entries
        for order in (None, tuple(int(k) for k in rng.permutation(p.interior))):
            iterated = kron_reduce_iterative(q, p, order).q_red.entries
            label = 'descending' if order is None else 'random'
            worst.record(
                _scaled(one_shot - iterated, one_shot), p, f"{label} elimination order"
            )
    return worst.result()


@register('interlacing')
def check_interlacing(q, partitions, tol, seed, corrupt=False):
    worst = _Worst('interlacing', settings.TOL_EIG_ABS)
    if q.is_strictly_loopy:
        report = verify_augmented_interlacing(q)
        worst.record(max(report.slack, 0.0), None, report.worst_check)
    for p in partitions:
        for report in (verify_interlacing(q, p), verify_loop_shift_bounds(q, p)):
            worst.record(max(report.slack, 0.0), p, f"{report.worst_check}, r={report.worst_index}")
    return worst.result()


@register('resistance_invariance')
def check_resistance(q, partitions, tol, seed, corrupt=False):
    worst = _Worst('resistance_invariance', tol)
    full = effective_resistance(q)
    if q.is_strictly_loopy:
        augmented = effective_resistance(augment(q)).restrict(range(q.n))
        worst.record(_scaled(augmented.entries - full.entries, full.entries), None, 'augmentation')
    for p in partitions:
        reduced = effective_resistance(kron_reduce(q, p).q_red)
        restricted = full.restrict(p.boundary).entries
        worst.record(_scaled(reduced.entries - restricted, restricted), p, 'Kron reduction')
    return worst.result()


@register('sherman_morrison')
def check_sherman_morrison(q, partitions, tol, seed, corrupt=False):
    worst = _Worst('sherman_morrison', tol)
    delta = 1.0
    for p in partitions:
        if len(p.interior) < 2:
            continue
        i, j = p.interior[0], p.interior[-1]
        kr = kron_reduce(q, p)
        perturbed = perturbed_laplacian(q, i, j, delta)
        direct = kron_reduce(perturbed, p)
        updated, _ = perturb_interior_edge(q, p, i, j, delta, reduction=kr)
        edge = f"edge {{{i + 1},{j + 1}}}"
        worst.record(
            _scaled(updated.entries - direct.q_red.entries, direct.q_red.entries),
            p, f"q_red update, {edge}",
        )
        worst.record(
            _scaled(perturbed_accompanying(kr, i, j, delta) - direct.q_ac, direct.q_ac),
            p, f"q_ac update, {edge}",
        )
        expected = effective_resistance(perturbed).entries
        worst.record(
            _scaled(perturbed_resistance(q, p, i, j, delta).entries - expected, expected),
            p, f"resistance update, {edge}",
        )
    if not worst.seen:
        worst.detail = 'no boundary set leaves two interior nodes'
    return worst.result()


@register('topology')
def check_topology(q, partitions, tol, seed, corrupt=False):
    worst = _Worst('topology', 0.0)
    for p in partitions:
        predicted = predict_reduced_topology(q, p)
        measured = reduced_topology(kron_reduce(q, p))
        edges = predicted.edges ^ measured.edges
        loops = predicted.loops ^ measured.loops
        mismatch = len(edges) + len(loops)
        detail = 'pattern matches'
        if edges:
            i, j = min(edges)
            detail = f"edge {{{i + 1},{j + 1}}} mismatched"
        elif loops:
            detail = f"self-loop at {min(loops) + 1} mismatched"
        worst.record(mismatch, p, detail)
    return worst.result()


@register('augmentation')
def check_augmentation(q, partitions, tol, seed, corrupt=False):
    worst = _Worst('augmentation', tol)
    if not q.is_strictly_loopy:
        worst.detail = 'not applicable to a loop-less input'
        return worst.result()
    for p in partitions:
        reduced = augmented_reduction(q, p).entries
        commuted = augment(kron_reduce(q, p).q_red).entries
        worst.record(_scaled(reduced - commuted, commuted), p, 'augment then reduce')
    return worst.result()


def run_suite(q, cap=None, samples=None, workers=None, seed=None, tol=None, corrupt=False):
    """
    Run every registered property on ``q``.

    Returns:
        dict with the sorted property results, the number of boundary sets
        and the overall verdict.
    """
    tol = resolve(tol, settings.TOL_QUOT)
    seed = resolve(seed, settings.DEFAULT_SEED)
    workers = resolve(workers, settings.VERIFY_WORKERS)
    partitions = boundary_sets(q.n, cap, samples, seed)
    logger.info(f"verifying {len(PROPERTIES)} properties on {len(partitions)} boundary sets")

    with ThreadPoolExecutor(max_workers=workers) as pool:
        futures = {
            name: pool.submit(check, q, partitions, tol, seed, corrupt)
            for name, check in PROPERTIES.items()
        }
        results = [futures[name].result() for name in sorted(futures)]

    for result in results:
        if not result.passed:
            logger.warning(f"{result.name} failed: {result.detail} (worst {result.worst:.3e})")
    return {
        'passed': all(result.passed for result in results),
        'boundary_sets': len(partitions),
        'seed': seed,
        'properties': [result.as_dict() for result in results],
    }
