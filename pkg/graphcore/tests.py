import unittest
import warnings

import numpy as np
from hypothesis import given, settings as hypothesis_settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays
from numpy.testing import assert_allclose, assert_array_equal

from kronred.exceptions import (
    DimensionError,
    IsolatedGroundWarning,
    InvalidInput,
)
from .factories import (
    chain_graph,
    complete_graph,
    corpus,
    path_graph,
    random_instance,
    star_graph,
)
from .forms import GraphForm, serialize_graph
from .models import LaplacianClass, LoopyLaplacian, WeightedGraph
from .utils import (
    augment,
    graph_from_laplacian,
    is_irreducible,
    laplacian_from_graph,
    loopless_part,
    pseudo_inverse,
    to_networkx,
)


class LaplacianConversionTests(unittest.TestCase):

    def test_star_laplacian(self):
        q = laplacian_from_graph(star_graph())
        expected = np.array([
            [1, 0, 0, -1],
            [0, 1, 0, -1],
            [0, 0, 1, -1],
            [-1, -1, -1, 3],
        ], dtype=float)
        assert_array_equal(q.entries, expected)
        self.assertIs(q.laplacian_class, LaplacianClass.LOOP_LESS)

    def test_loops_become_row_sums(self):
        q = laplacian_from_graph(star_graph(center_loop=1.0))
        assert_allclose(q.row_sums, [0, 0, 0, 1])
        self.assertEqual(q.entries[3, 3], 4.0)
        self.assertTrue(q.is_strictly_loopy)

    def test_graph_round_trip(self):
        g = complete_graph(4, weight=0.5, loop=0.25)
        back = graph_from_laplacian(laplacian_from_graph(g))
        assert_allclose(back.weights, g.weights, atol=1e-15)

    def test_loopless_part(self):
        q = laplacian_from_graph(star_graph(center_loop=2.0))
        l = loopless_part(q)
        assert_allclose(l.row_sums, 0.0, atol=1e-15)
        assert_array_equal(l.entries[0, 1:], q.entries[0, 1:])
        self.assertTrue(l.is_loopless)

    @hypothesis_settings(max_examples=50, deadline=None)
    @given(arrays(np.float64, (6, 6), elements=st.floats(0.0, 10.0)))
    def test_round_trip_random_weights(self, raw):
        g = WeightedGraph((raw + raw.T) / 2.0)
        back = graph_from_laplacian(laplacian_from_graph(g))
        assert_allclose(back.weights, g.weights, atol=1e-12)


class LaplacianValidationTests(unittest.TestCase):

    def test_rejects_asymmetric(self):
        with self.assertRaises(InvalidInput) as ctx:
            LoopyLaplacian([[1.0, -1.0], [-0.5, 1.0]])
        self.assertIn('entries[', ctx.exception.field)

    def test_rejects_positive_off_diagonal(self):
        with self.assertRaises(InvalidInput):
            LoopyLaplacian([[1.0, 0.5], [0.5, 1.0]])

    def test_rejects_negative_row_sum(self):
        with self.assertRaises(InvalidInput) as ctx:
            LoopyLaplacian([[1.0, -2.0], [-2.0, 3.0]])
        self.assertEqual(ctx.exception.field, 'entries[0,:]')

    def test_row_sum_tolerance_scales_with_entries(self):
        with self.assertRaises(InvalidInput):
            LoopyLaplacian([[1.0 - 1e-11, -1.0], [-1.0, 1.0]])
        # 1e6 entries: row sums may dip to -1e-12 * 1e6 * 2
        q = LoopyLaplacian([[1e6 - 1e-7, -1e6], [-1e6, 1e6]])
        self.assertLess(q.row_sums[0], 0.0)
        with self.assertRaises(InvalidInput):
            LoopyLaplacian([[1e6 - 1e-5, -1e6], [-1e6, 1e6]])

    def test_rejects_non_finite(self):
        with self.assertRaises(InvalidInput):
            LoopyLaplacian([[np.nan, 0.0], [0.0, 1.0]])

    def test_rejects_non_square(self):
        with self.assertRaises(DimensionError):
            LoopyLaplacian(np.zeros((2, 3)))

    def test_rejects_negative_weight(self):
        with self.assertRaises(InvalidInput):
            WeightedGraph([[0.0, -1.0], [-1.0, 0.0]])

    def test_entries_are_read_only(self):
        q = laplacian_from_graph(path_graph(3))
        with self.assertRaises(ValueError):
            q.entries[0, 0] = 5.0

    def test_single_zero_matrix(self):
        q = LoopyLaplacian([[0.0]])
        self.assertTrue(q.is_loopless)
        self.assertTrue(is_irreducible(q))


class ConnectivityTests(unittest.TestCase):

    def test_path_is_irreducible(self):
        self.assertTrue(is_irreducible(laplacian_from_graph(path_graph(5))))

    def test_disconnected_is_reducible(self):
        weights = np.zeros((4, 4))
        weights[0, 1] = weights[1, 0] = 1.0
        weights[2, 3] = weights[3, 2] = 1.0
        q = laplacian_from_graph(WeightedGraph(weights))
        self.assertFalse(is_irreducible(q))

    def test_loops_do_not_connect(self):
        weights = np.diag([1.0, 1.0])
        self.assertFalse(is_irreducible(laplacian_from_graph(WeightedGraph(weights))))

    def test_networkx_view_carries_loops(self):
        graph = to_networkx(laplacian_from_graph(star_graph(center_loop=0.5)))
        self.assertEqual(graph.number_of_edges(), 3)
        self.assertEqual(graph.nodes[3]['loop'], 0.5)
        self.assertEqual(graph.nodes[0]['loop'], 0.0)


class AugmentTests(unittest.TestCase):

    def test_augmented_star(self):
        q = laplacian_from_graph(star_graph(center_loop=1.0))
        q_hat = augment(q)
        self.assertEqual(q_hat.n, 5)
        assert_array_equal(q_hat.entries[:4, :4], q.entries)
        assert_allclose(q_hat.entries[4], [0, 0, 0, -1, 1])
        self.assertTrue(q_hat.is_loopless)
        self.assertTrue(is_irreducible(q_hat))

    def test_loopless_input_warns(self):
        q = laplacian_from_graph(path_graph(3))
        with self.assertWarns(IsolatedGroundWarning):
            q_hat = augment(q)
        assert_array_equal(q_hat.entries[3], 0.0)
        self.assertFalse(is_irreducible(q_hat))

    def test_augment_is_loopless_on_corpus(self):
        for q, _ in corpus(seed=3, count=20):
            if not q.is_strictly_loopy:
                continue
            q_hat = augment(q)
            assert_allclose(q_hat.row_sums, 0.0, atol=1e-12)
            assert_array_equal(q_hat.entries[:q.n, :q.n], q.entries)


class PseudoInverseTests(unittest.TestCase):

    def test_penrose_equations(self):
        q = laplacian_from_graph(path_graph(4, weight=2.0))
        pinv = pseudo_inverse(q)
        assert_allclose(q.entries @ pinv @ q.entries, q.entries, atol=1e-12)
        assert_allclose(pinv @ q.entries @ pinv, pinv, atol=1e-12)
        assert_allclose(pinv, pinv.T, atol=1e-12)

    def test_invertible_matches_inverse(self):
        q = LoopyLaplacian([[1.0, -1.0], [-1.0, 2.0]])
        assert_allclose(pseudo_inverse(q), [[2.0, 1.0], [1.0, 1.0]], atol=1e-12)


class GraphFormTests(unittest.TestCase):

    def test_valid_graph(self):
        form = GraphForm({
            'n': 3,
            'edges': [{'i': 1, 'j': 2, 'w': 1.0}, {'i': 2, 'j': 3, 'w': 2}],
            'loops': [{'i': 3, 'w': 0.5}],
        })
        self.assertTrue(form.is_valid())
        g = form.save()
        self.assertEqual(g.weights[1, 2], 2.0)
        self.assertEqual(g.weights[2, 2], 0.5)

    def assertInvalid(self, data, field=None):
        form = GraphForm(data)
        self.assertFalse(form.is_valid())
        if field is not None:
            self.assertEqual(form.error().field, field)

    def test_duplicate_edge(self):
        self.assertInvalid({
            'n': 2,
            'edges': [{'i': 1, 'j': 2, 'w': 1}, {'i': 1, 'j': 2, 'w': 1}],
        }, field='edges[1]')

    def test_self_edge(self):
        self.assertInvalid({'n': 2, 'edges': [{'i': 2, 'j': 2, 'w': 1}]})

    def test_reversed_edge(self):
        self.assertInvalid({'n': 2, 'edges': [{'i': 2, 'j': 1, 'w': 1}]})

    def test_out_of_range(self):
        self.assertInvalid(
            {'n': 2, 'edges': [{'i': 1, 'j': 3, 'w': 1}]}, field='edges[0].j'
        )

    def test_negative_weight(self):
        self.assertInvalid(
            {'n': 2, 'edges': [{'i': 1, 'j': 2, 'w': -1}]}, field='edges[0].w'
        )

    def test_duplicate_loop(self):
        self.assertInvalid({
            'n': 2, 'loops': [{'i': 1, 'w': 1}, {'i': 1, 'w': 2}],
        })

    def test_bad_n(self):
        self.assertInvalid({'n': 0}, field='n')
        self.assertInvalid({'n': True}, field='n')
        self.assertInvalid([], field='input')

    def test_errors_are_keyed_by_field(self):
        form = GraphForm({'n': 2, 'loops': [{'i': 1, 'w': -0.5}]})
        self.assertFalse(form.is_valid())
        self.assertEqual(list(form.errors), ['loops'])

    def test_save_raises_input_error(self):
        form = GraphForm({'n': 3, 'edges': [{'i': 1, 'j': 4, 'w': 1}]})
        with self.assertRaises(InvalidInput) as ctx:
            form.save()
        self.assertEqual(ctx.exception.exit_code, 2)
        self.assertEqual(str(ctx.exception), 'edges[0].j: node 4 is outside 1..3')

    def test_serialize(self):
        data = serialize_graph(star_graph(center_loop=1.0))
        self.assertEqual(data['n'], 4)
        self.assertEqual(len(data['edges']), 3)
        self.assertEqual(data['edges'][0], {'i': 1, 'j': 4, 'w': 1.0})
        self.assertEqual(data['loops'], [{'i': 4, 'w': 1.0}])
        form = GraphForm(data)
        self.assertTrue(form.is_valid())
        assert_array_equal(form.save().weights, star_graph(center_loop=1.0).weights)


class FactoryTests(unittest.TestCase):

    def test_chain(self):
        g = chain_graph()
        self.assertEqual(sorted((i, j) for i, j, _ in g.edges()), [(0, 2), (1, 3), (2, 3)])

    def test_random_instances_are_connected(self):
        rng = np.random.default_rng(0)
        for flag in (False, True, False, True):
            q, boundary = random_instance(rng, max_n=30, strictly_loopy=flag)
            self.assertTrue(is_irreducible(q))
            self.assertEqual(q.is_strictly_loopy, flag)
            self.assertTrue(2 <= len(boundary) <= q.n - 1)
            self.assertEqual(list(boundary), sorted(set(boundary)))

    def test_corpus_is_deterministic(self):
        first = corpus(seed=7, count=5)
        second = corpus(seed=7, count=5)
        for (q1, b1), (q2, b2) in zip(first, second):
            assert_array_equal(q1.entries, q2.entries)
            self.assertEqual(b1, b2)

    def test_no_warnings_on_loopy_augment(self):
        q = laplacian_from_graph(star_graph(center_loop=1.0))
        with warnings.catch_warnings():
            warnings.simplefilter('error')
            augment(q)
