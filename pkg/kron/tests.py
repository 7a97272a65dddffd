import unittest

import numpy as np
from numpy.testing import assert_allclose, assert_array_equal

from kronred.exceptions import (
    CompatibilityError,
    ConnectivityError,
    DimensionError,
    IllConditionedError,
    PerturbationInvalid,
    InvalidInput,
)
from graphcore.factories import (
    chain_graph,
    corpus,
    path_graph,
    star_graph,
)
from graphcore.models import LoopyLaplacian, WeightedGraph
from graphcore.utils import augment, is_irreducible, laplacian_from_graph
from .models import Partition
from .utils import (
    augmented_reduction,
    default_order,
    kron_reduce,
    kron_reduce_iterative,
    perturb_boundary,
    perturb_interior_edge,
    perturbed_accompanying,
    perturbed_laplacian,
    predict_loop_update,
    predict_reduced_topology,
    recover_interior,
    reduce_by_one,
    reduced_self_loops,
    reduced_topology,
    self_loop_decomposition,
    solve_reduced,
)

TOL = 1e-9

# One corpus shared by the property suites below.
CORPUS = corpus(seed=2024, count=500)


def _star(loop=0.0):
    return laplacian_from_graph(star_graph(center_loop=loop)), Partition(4, (0, 1, 2))


def _chain():
    return laplacian_from_graph(chain_graph()), Partition(4, (0, 1))


class PartitionTests(unittest.TestCase):

    def test_interior_is_complement(self):
        p = Partition(5, (3, 0))
        self.assertEqual(p.boundary, (0, 3))
        self.assertEqual(p.interior, (1, 2, 4))
        self.assertEqual(p.interior_position(4), 2)

    def test_one_based(self):
        self.assertEqual(Partition.from_one_based(4, [1, 2, 3]).boundary, (0, 1, 2))

    def test_needs_two_boundary_nodes(self):
        with self.assertRaises(DimensionError) as ctx:
            Partition(4, (0,))
        self.assertIn('at least 2 nodes', str(ctx.exception))

    def test_needs_interior(self):
        with self.assertRaises(DimensionError):
            Partition(3, (0, 1, 2))

    def test_rejects_bad_nodes(self):
        with self.assertRaises(InvalidInput):
            Partition(3, (0, 3))
        with self.assertRaises(InvalidInput):
            Partition(4, (1, 1))

    def test_size_mismatch(self):
        q, _ = _star()
        with self.assertRaises(DimensionError):
            kron_reduce(q, Partition(5, (0, 1)))


class KronReduceTests(unittest.TestCase):

    def test_y_delta(self):
        q, p = _star()
        kr = kron_reduce(q, p)
        expected = np.array([
            [2, -1, -1],
            [-1, 2, -1],
            [-1, -1, 2],
        ]) / 3.0
        assert_allclose(kr.q_red.entries, expected, rtol=0, atol=1e-12)
        for _, _, w in kr.a_red.edges():
            self.assertAlmostEqual(w, 1.0 / 3.0, delta=1e-12)
        self.assertEqual(len(list(kr.a_red.edges())), 3)
        self.assertEqual(kr.permutation, (0, 1, 2))

    def test_chain(self):
        q, p = _chain()
        kr = kron_reduce(q, p)
        assert_allclose(kr.q_red.entries, [[1 / 3, -1 / 3], [-1 / 3, 1 / 3]], atol=1e-12)
        assert_allclose(kr.q_ac, np.array([[2, 1], [1, 2]]) / 3.0, atol=1e-12)

    def test_star_with_loop(self):
        q, p = _star(loop=1.0)
        kr = kron_reduce(q, p)
        assert_allclose(kr.q_red.entries, np.eye(3) - 0.25, atol=1e-12)
        assert_allclose(kr.q_red.row_sums, 0.25, atol=1e-12)
        assert_allclose(kr.q_ac, np.full((3, 1), 0.25), atol=1e-12)
        self.assertTrue(kr.q_red.is_strictly_loopy)

    def test_unsorted_boundary_is_permuted(self):
        q = laplacian_from_graph(path_graph(4))
        kr = kron_reduce(q, Partition(4, (3, 0)))
        self.assertEqual(kr.permutation, (0, 3))
        assert_allclose(kr.q_red.entries, [[1 / 3, -1 / 3], [-1 / 3, 1 / 3]], atol=1e-12)

    def test_reducible_input(self):
        weights = np.zeros((4, 4))
        weights[0, 1] = weights[1, 0] = 1.0
        weights[2, 3] = weights[3, 2] = 1.0
        q = laplacian_from_graph(WeightedGraph(weights))
        with self.assertRaises(ConnectivityError):
            kron_reduce(q, Partition(4, (0, 2)))

    def test_ill_conditioned_interior(self):
        q, p = _chain()
        with self.assertRaises(IllConditionedError) as ctx:
            kron_reduce(q, p, cond_max=1.5)
        self.assertAlmostEqual(ctx.exception.estimate, 3.0)

    def test_closure_on_corpus(self):
        for q, boundary in CORPUS:
            kr = kron_reduce(q, Partition(q.n, boundary))
            entries = kr.q_red.entries
            assert_array_equal(entries, entries.T)
            off = entries - np.diag(np.diag(entries))
            self.assertLessEqual(off.max(), TOL)
            self.assertGreaterEqual(kr.q_red.row_sums.min(), -TOL)
            self.assertGreaterEqual(kr.q_ac.min(), -TOL)
            if q.is_loopless:
                assert_allclose(kr.q_red.row_sums, 0.0, atol=TOL)
                assert_allclose(kr.column_sums(), 1.0, atol=TOL)
            else:
                self.assertTrue(kr.q_red.is_strictly_loopy)

    def test_monotonicity_and_irreducibility_on_corpus(self):
        for q, boundary in CORPUS[:200]:
            p = Partition(q.n, boundary)
            kr = kron_reduce(q, p)
            block = q.block(p.boundary, p.boundary)
            self.assertTrue(np.all(kr.q_red.entries <= block + TOL))
            self.assertTrue(is_irreducible(kr.q_red))


class IterativeReductionTests(unittest.TestCase):

    def test_star_any_order(self):
        q, p = _star(loop=1.0)
        result = kron_reduce_iterative(q, p)
        assert_allclose(result.q_red.entries, kron_reduce(q, p).q_red.entries, atol=1e-15)
        self.assertEqual(len(result.steps), 2)

    def test_chain_orders_agree(self):
        q, p = _chain()
        first = kron_reduce_iterative(q, p, order=(2, 3)).q_red.entries
        second = kron_reduce_iterative(q, p, order=(3, 2)).q_red.entries
        assert_allclose(first, second, atol=1e-12)
        assert_allclose(first, [[1 / 3, -1 / 3], [-1 / 3, 1 / 3]], atol=1e-12)

    def test_default_order_descends(self):
        self.assertEqual(default_order(Partition(6, (0, 3))), (5, 4, 2, 1))

    def test_bad_order(self):
        q, p = _chain()
        with self.assertRaises(InvalidInput):
            kron_reduce_iterative(q, p, order=(2, 2))

    def test_loopless_steps_stay_loopless(self):
        q, p = _chain()
        for step in kron_reduce_iterative(q, p).steps:
            assert_allclose(step.row_sums, 0.0, atol=1e-15)

    def test_quotient_property_on_corpus(self):
        rng = np.random.default_rng(11)
        for q, boundary in CORPUS:
            p = Partition(q.n, boundary)
            one_shot = kron_reduce(q, p).q_red.entries
            for _ in range(3):
                order = tuple(rng.permutation(p.interior).tolist())
                result = kron_reduce_iterative(q, p, order=order)
                assert_allclose(result.q_red.entries, one_shot, rtol=0, atol=TOL)

    def test_loops_never_decrease(self):
        for q, boundary in CORPUS[1:100:2]:
            result = kron_reduce_iterative(q, Partition(q.n, boundary))
            for before, after, labels, kept in zip(
                result.steps, result.steps[1:], result.labels, result.labels[1:]
            ):
                old = dict(zip(labels, before.row_sums))
                for node, loop in zip(kept, after.row_sums):
                    self.assertGreaterEqual(loop, old[node] - TOL)


class LoopUpdateTests(unittest.TestCase):

    def test_loopless_unchanged(self):
        q, _ = _star()
        self.assertEqual(predict_loop_update(q, 3, 0), 0.0)

    def test_star_with_loop(self):
        q, _ = _star(loop=1.0)
        self.assertAlmostEqual(predict_loop_update(q, 3, 0), 0.25, delta=1e-15)

    def test_not_adjacent(self):
        weights = np.array(path_graph(4).weights)
        weights[3, 3] = 1.0
        q = laplacian_from_graph(WeightedGraph(weights))
        self.assertEqual(predict_loop_update(q, 3, 0), 0.0)

    def test_matches_single_elimination(self):
        for q, _ in CORPUS[:100]:
            k = q.n - 1
            reduced = reduce_by_one(q, k)
            for i in range(k):
                assert_allclose(
                    predict_loop_update(q, k, i), reduced.row_sums[i], atol=TOL
                )

    def test_reduce_by_one_bounds(self):
        q, _ = _star()
        with self.assertRaises(InvalidInput):
            reduce_by_one(q, 4)


class SelfLoopTests(unittest.TestCase):

    def test_reduced_loops_star(self):
        q, p = _star(loop=1.0)
        assert_allclose(reduced_self_loops(q, p), 0.25, atol=1e-12)

    def test_reduced_loops_loopless(self):
        q, p = _chain()
        assert_allclose(reduced_self_loops(q, p), 0.0, atol=1e-15)

    def test_boundary_loop_only(self):
        weights = np.array(path_graph(3).weights)
        weights[0, 0] = 2.0
        q = laplacian_from_graph(WeightedGraph(weights))
        assert_allclose(reduced_self_loops(q, Partition(3, (0, 1))), [2.0, 0.0], atol=1e-12)

    def test_decomposition_star(self):
        q, p = _star(loop=1.0)
        l_schur, boundary_loops, s = self_loop_decomposition(q, p)
        assert_allclose(l_schur.entries, np.eye(3) - 1 / 3, atol=1e-12)
        assert_allclose(boundary_loops, 0.0)
        assert_allclose(s, np.full((3, 3), 1 / 12), atol=1e-12)
        total = l_schur.entries + np.diag(boundary_loops) + s
        assert_allclose(total, np.eye(3) - 0.25, atol=1e-12)

    def test_decomposition_loopless(self):
        q, p = _chain()
        l_schur, boundary_loops, s = self_loop_decomposition(q, p)
        assert_allclose(s, 0.0, atol=1e-15)
        assert_allclose(l_schur.entries, kron_reduce(q, p).q_red.entries, atol=1e-15)

    def test_decomposition_on_corpus(self):
        for q, boundary in CORPUS[:200]:
            p = Partition(q.n, boundary)
            kr = kron_reduce(q, p)
            l_schur, boundary_loops, s = self_loop_decomposition(q, p)
            total = l_schur.entries + np.diag(boundary_loops) + s
            assert_allclose(total, kr.q_red.entries, rtol=0, atol=TOL)
            assert_allclose(s, s.T, atol=1e-15)
            self.assertGreaterEqual(s.min(), -TOL)
            assert_allclose(reduced_self_loops(q, p, kr), kr.q_red.row_sums, atol=TOL)

    def test_positivity_with_connected_interior(self):
        # Unit wheel: hub 0 and interior ring 4-5-6, boundary 1..3 on spokes.
        weights = np.zeros((7, 7))
        for i, j in ((1, 4), (2, 5), (3, 6), (4, 5), (5, 6), (4, 6), (0, 4), (0, 5)):
            weights[i, j] = weights[j, i] = 1.0
        weights[5, 5] = 0.5
        q = laplacian_from_graph(WeightedGraph(weights))
        p = Partition(7, (0, 1, 2, 3))
        _, _, s = self_loop_decomposition(q, p)
        kr = kron_reduce(q, p)
        self.assertGreater(s.min(), TOL)
        self.assertGreater(kr.q_ac.min(), TOL)


class ReducedSolveTests(unittest.TestCase):

    def test_loopless_star(self):
        q, p = _star()
        v = solve_reduced(kron_reduce(q, p), [1.0, -1.0, 0.0, 0.0])
        assert_allclose(v, [1.0, -1.0, 0.0], atol=1e-12)

    def test_zero_currents(self):
        q, p = _star()
        assert_allclose(solve_reduced(kron_reduce(q, p), np.zeros(4)), 0.0)

    def test_loopy_star(self):
        q, p = _star(loop=1.0)
        kr = kron_reduce(q, p)
        currents = np.array([1.0, 0.0, 0.0, 0.0])
        v = solve_reduced(kr, currents)
        rhs = currents[:3] + kr.q_ac @ currents[3:]
        self.assertLessEqual(np.abs(kr.q_red.entries @ v - rhs).max(), 1e-10)

    def test_incompatible_currents(self):
        q, p = _star()
        with self.assertRaises(CompatibilityError):
            solve_reduced(kron_reduce(q, p), [1.0, 0.0, 0.0, 0.0])

    def test_wrong_length(self):
        q, p = _star()
        with self.assertRaises(DimensionError):
            solve_reduced(kron_reduce(q, p), [1.0, -1.0])

    def test_recover_interior_on_corpus(self):
        rng = np.random.default_rng(5)
        for q, boundary in CORPUS[:100]:
            kr = kron_reduce(q, Partition(q.n, boundary))
            currents = rng.normal(size=q.n)
            if q.is_loopless:
                currents -= currents.mean()
            v = recover_interior(kr, solve_reduced(kr, currents), currents)
            assert_allclose(q.entries @ v, currents, rtol=0, atol=TOL)


class BoundaryPerturbationTests(unittest.TestCase):

    def test_zero(self):
        q, p = _star()
        kr = kron_reduce(q, p)
        assert_array_equal(perturb_boundary(kr, np.zeros((3, 3))).entries, kr.q_red.entries)

    def test_added_edge(self):
        q, p = _star()
        kr = kron_reduce(q, p)
        u = np.array([1.0, -1.0, 0.0])
        new = perturb_boundary(kr, 0.5 * np.outer(u, u))
        self.assertAlmostEqual(new.entries[0, 1], kr.q_red.entries[0, 1] - 0.5)

    def test_removing_too_much(self):
        q, p = _star()
        kr = kron_reduce(q, p)
        u = np.array([1.0, -1.0, 0.0])
        with self.assertRaises(PerturbationInvalid):
            perturb_boundary(kr, -np.outer(u, u))


class InteriorPerturbationTests(unittest.TestCase):

    def test_chain_strengthened(self):
        q, p = _chain()
        q_new, detail = perturb_interior_edge(q, p, 2, 3, 1.0)
        assert_allclose(q_new.entries, 0.4 * np.array([[1, -1], [-1, 1]]), rtol=0, atol=1e-12)
        self.assertAlmostEqual(detail.r_int, 2 / 3, delta=1e-12)

    def test_zero_delta(self):
        q, p = _chain()
        q_new, _ = perturb_interior_edge(q, p, 2, 3, 0.0)
        assert_allclose(q_new.entries, kron_reduce(q, p).q_red.entries, atol=1e-15)

    def test_edge_deletion_disconnects(self):
        q, p = _chain()
        with self.assertRaises(ConnectivityError):
            perturb_interior_edge(q, p, 2, 3, -1.0)

    def test_negative_weight(self):
        q, p = _chain()
        with self.assertRaises(PerturbationInvalid):
            perturb_interior_edge(q, p, 2, 3, -2.0)

    def test_boundary_node_rejected(self):
        q, p = _chain()
        with self.assertRaises(InvalidInput):
            perturb_interior_edge(q, p, 0, 3, 1.0)

    def test_matches_full_recompute(self):
        rng = np.random.default_rng(17)
        checked = 0
        for q, boundary in CORPUS:
            p = Partition(q.n, boundary)
            if len(p.interior) < 2:
                continue
            i, j = (int(k) for k in rng.choice(p.interior, size=2, replace=False))
            weight = -q.entries[i, j]
            delta = float(rng.uniform(-0.9 * weight, 2.0))
            kr = kron_reduce(q, p)
            q_new, _ = perturb_interior_edge(q, p, i, j, delta, reduction=kr)
            full = kron_reduce(perturbed_laplacian(q, i, j, delta), p)
            assert_allclose(q_new.entries, full.q_red.entries, rtol=0, atol=TOL)
            assert_allclose(
                perturbed_accompanying(kr, i, j, delta), full.q_ac, rtol=0, atol=TOL
            )
            checked += 1
            if checked == 200:
                break
        self.assertEqual(checked, 200)


class TopologyTests(unittest.TestCase):

    def test_star_clique(self):
        q, p = _star()
        topology = predict_reduced_topology(q, p)
        self.assertEqual(topology.edges, {(0, 1), (0, 2), (1, 2)})
        self.assertEqual(topology.loops, frozenset())

    def test_star_loops(self):
        q, p = _star(loop=1.0)
        self.assertEqual(predict_reduced_topology(q, p).loops, {0, 1, 2})

    def test_cut_by_boundary(self):
        q = laplacian_from_graph(path_graph(4))
        topology = predict_reduced_topology(q, Partition(4, (0, 1, 3)))
        self.assertEqual(topology.edges, {(0, 1), (1, 3)})

    def test_matches_numeric_pattern_on_corpus(self):
        for q, boundary in CORPUS:
            p = Partition(q.n, boundary)
            self.assertEqual(
                predict_reduced_topology(q, p), reduced_topology(kron_reduce(q, p))
            )


class AugmentedReductionTests(unittest.TestCase):

    def test_star(self):
        q, p = _star(loop=1.0)
        expected = augment(kron_reduce(q, p).q_red).entries
        assert_allclose(augmented_reduction(q, p).entries, expected, atol=1e-12)

    def test_commutes_on_corpus(self):
        for q, boundary in CORPUS[1:200:2]:
            p = Partition(q.n, boundary)
            expected = augment(kron_reduce(q, p).q_red).entries
            assert_allclose(augmented_reduction(q, p).entries, expected, rtol=0, atol=TOL)

    def test_reduced_matrix_revalidates(self):
        q, p = _star(loop=1.0)
        self.assertIsInstance(augmented_reduction(q, p), LoopyLaplacian)
