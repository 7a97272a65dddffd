import unittest

import numpy as np
from numpy.testing import assert_allclose

from kronred.exceptions import ClassError
from graphcore.factories import chain_graph, complete_graph, corpus, path_graph, star_graph
from graphcore.models import LoopyLaplacian, WeightedGraph
from graphcore.utils import laplacian_from_graph, loopless_part
from kron.models import Partition
from kron.utils import kron_reduce
from .utils import (
    algebraic_connectivity,
    eigenvalues,
    verify_augmented_interlacing,
    verify_interlacing,
    verify_loop_shift_bounds,
    verify_perturbation_bounds,
)

TOL_EIG_ABS = 1e-8

CORPUS = corpus(seed=99, count=500)


def _star(loop=0.0):
    return laplacian_from_graph(star_graph(center_loop=loop)), Partition(4, (0, 1, 2))


def _chain():
    return laplacian_from_graph(chain_graph()), Partition(4, (0, 1))


class EigenvalueTests(unittest.TestCase):

    def test_complete_graph(self):
        assert_allclose(eigenvalues(laplacian_from_graph(complete_graph(3))), [0, 3, 3], atol=1e-12)

    def test_loopy_pair(self):
        q = LoopyLaplacian([[1.0, -1.0], [-1.0, 2.0]])
        root = np.sqrt(5.0)
        assert_allclose(eigenvalues(q), [(3 - root) / 2, (3 + root) / 2], atol=1e-12)

    def test_single_node(self):
        assert_allclose(eigenvalues(LoopyLaplacian([[0.0]])), [0.0])

    def test_algebraic_connectivity(self):
        self.assertAlmostEqual(
            algebraic_connectivity(laplacian_from_graph(complete_graph(3))), 3.0, places=12
        )
        self.assertAlmostEqual(
            algebraic_connectivity(laplacian_from_graph(path_graph(3))), 1.0, places=12
        )

    def test_disconnected_connectivity(self):
        weights = np.zeros((4, 4))
        weights[0, 1] = weights[1, 0] = 1.0
        weights[2, 3] = weights[3, 2] = 1.0
        l = laplacian_from_graph(WeightedGraph(weights))
        self.assertLessEqual(algebraic_connectivity(l), TOL_EIG_ABS)

    def test_connectivity_needs_loopless(self):
        with self.assertRaises(ClassError):
            algebraic_connectivity(laplacian_from_graph(star_graph(center_loop=1.0)))


class InterlacingTests(unittest.TestCase):

    def test_star(self):
        q, p = _star()
        report = verify_interlacing(q, p)
        self.assertLessEqual(report.slack, 1e-10)
        assert_allclose(report.lambda_red, [0, 1, 1], atol=1e-12)
        assert_allclose(report.lambda_block, [1, 1, 1], atol=1e-12)

    def test_single_elimination(self):
        q = laplacian_from_graph(path_graph(5))
        report = verify_interlacing(q, Partition(5, (0, 1, 2, 3)))
        self.assertTrue(report.holds())
        self.assertEqual(report.lambda_red.size, 4)

    def test_corpus(self):
        for q, boundary in CORPUS:
            report = verify_interlacing(q, Partition(q.n, boundary))
            self.assertLessEqual(report.slack, TOL_EIG_ABS, msg=report.worst_check)
            if q.is_loopless:
                self.assertLessEqual(
                    report.lambda_full[1], report.lambda_red[1] + TOL_EIG_ABS
                )

    def test_report_names_worst_check(self):
        q, p = _chain()
        report = verify_interlacing(q, p)
        self.assertTrue(report.worst_check)
        self.assertGreaterEqual(report.worst_index, 1)
        self.assertEqual(report.as_dict()['slack'], report.slack)


class LoopShiftTests(unittest.TestCase):

    def test_star_with_loop(self):
        q, p = _star(loop=1.0)
        self.assertLessEqual(verify_loop_shift_bounds(q, p).slack, 1e-10)

    def test_loopless_reduces_to_interlacing(self):
        q, p = _star()
        self.assertLessEqual(verify_loop_shift_bounds(q, p).slack, 1e-10)

    def test_corpus(self):
        for q, boundary in CORPUS:
            report = verify_loop_shift_bounds(q, Partition(q.n, boundary))
            self.assertLessEqual(report.slack, TOL_EIG_ABS, msg=report.worst_check)

    def test_loops_can_weaken_connectivity(self):
        q, p = _star(loop=1.0)
        l_red = kron_reduce(q, p).l_red
        before = algebraic_connectivity(loopless_part(q))
        after = algebraic_connectivity(l_red)
        self.assertAlmostEqual(before, 1.0, places=12)
        self.assertAlmostEqual(after, 0.75, places=12)
        self.assertLess(after, before)


class AugmentedInterlacingTests(unittest.TestCase):

    def test_star_with_loop(self):
        q, _ = _star(loop=1.0)
        report = verify_augmented_interlacing(q)
        self.assertLessEqual(report.slack, 1e-10)
        self.assertEqual(report.lambda_full.size, 5)
        self.assertGreater(report.lambda_block[0], 0.0)

    def test_smallest_eigenvalue_must_clear_tolerance(self):
        # λ1 is about 2.5e-9 for a 1e-8 loop on the center
        q, _ = _star(loop=1e-8)
        report = verify_augmented_interlacing(q)
        self.assertEqual(report.worst_check, '0 < lambda_1')
        self.assertFalse(report.holds(TOL_EIG_ABS))
        self.assertTrue(verify_augmented_interlacing(q, tol=1e-12).holds(1e-12))

    def test_needs_loops(self):
        q, _ = _star()
        with self.assertRaises(ClassError):
            verify_augmented_interlacing(q)

    def test_corpus(self):
        for q, _ in CORPUS[1::2]:
            report = verify_augmented_interlacing(q)
            self.assertLessEqual(report.slack, TOL_EIG_ABS, msg=report.worst_check)


class PerturbationBoundTests(unittest.TestCase):

    def test_chain(self):
        q, p = _chain()
        for delta in (1.0, -0.5):
            report = verify_perturbation_bounds(q, p, 2, 3, delta)
            self.assertLessEqual(report.slack, 1e-10)
            self.assertEqual(report.lambda_perturbed.size, 2)

    def test_corpus(self):
        rng = np.random.default_rng(31)
        checked = 0
        for q, boundary in CORPUS:
            p = Partition(q.n, boundary)
            if len(p.interior) < 2:
                continue
            i, j = (int(k) for k in rng.choice(p.interior, size=2, replace=False))
            delta = float(rng.uniform(-0.9 * -q.entries[i, j], 2.0))
            report = verify_perturbation_bounds(q, p, i, j, delta)
            self.assertLessEqual(report.slack, TOL_EIG_ABS, msg=report.worst_check)
            checked += 1
            if checked == 200:
                break
        self.assertEqual(checked, 200)
