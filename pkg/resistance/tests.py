import itertools
import tracemalloc
import unittest
import warnings

import numpy as np
from numpy.testing import assert_allclose

from kronred.exceptions import (
    ClassError,
    ConnectivityError,
    DimensionError,
    MetricViolationWarning,
    InvalidInput,
)
from graphcore.factories import (
    chain_graph,
    complete_graph,
    corpus,
    path_graph,
    star_graph,
)
from graphcore.models import LoopyLaplacian, WeightedGraph
from graphcore.utils import augment, laplacian_from_graph, loopless_part, pseudo_inverse
from kron.models import Partition
from kron.utils import kron_reduce, perturbed_laplacian
from .forms import MatrixTsvForm, ResistanceForm, render_tsv
from .models import ImpedanceMode, ResistanceMatrix, UniformInverse
from .utils import (
    effective_resistance,
    ground_resistance,
    impedance,
    impedance_from_resistance,
    perturbed_resistance,
    resistance_via_reference,
    resistance_via_shift,
    shifted_inverse,
    uniform_laplacian,
    uniform_laplacian_inverse,
    uniform_parameters_from_resistance,
    uniform_reduced_resistance,
)

TOL = 1e-9

CORPUS = corpus(seed=77, count=500)

LOOPY_PAIR = LoopyLaplacian([[1.0, -1.0], [-1.0, 2.0]])


def _path3():
    return laplacian_from_graph(path_graph(3))


def _k(n):
    return laplacian_from_graph(complete_graph(n))


class EffectiveResistanceTests(unittest.TestCase):

    def test_series_path(self):
        r = effective_resistance(_path3()).entries
        assert_allclose(r[0, 2], 2.0, atol=1e-12)
        assert_allclose([r[0, 1], r[1, 2]], 1.0, atol=1e-12)

    def test_strictly_loopy_pair(self):
        assert_allclose(effective_resistance(LOOPY_PAIR).entries[0, 1], 1.0, atol=1e-12)

    def test_complete_graph(self):
        r = effective_resistance(_k(4)).entries
        assert_allclose(r[~np.eye(4, dtype=bool)], 0.5, atol=1e-12)

    def test_long_path_memory(self):
        q = laplacian_from_graph(path_graph(400))
        tracemalloc.start()
        try:
            r = effective_resistance(q)
            self.assertLessEqual(r.metric_violation, 1e-6)
            _, peak = tracemalloc.get_traced_memory()
        finally:
            tracemalloc.stop()
        # a 400^3 float temporary alone would be 512 MB
        self.assertLess(peak, 64 * 2 ** 20)
        self.assertAlmostEqual(r.entries[0, -1], 399.0, places=6)

    def test_reducible(self):
        q = laplacian_from_graph(WeightedGraph(np.diag([1.0, 1.0])))
        with self.assertRaises(ConnectivityError):
            effective_resistance(q)

    def test_invariance_under_reduction(self):
        for q, boundary in CORPUS:
            p = Partition(q.n, boundary)
            full = effective_resistance(q).restrict(p.boundary)
            reduced = effective_resistance(kron_reduce(q, p).q_red)
            assert_allclose(reduced.entries, full.entries, rtol=0, atol=TOL)

    def test_invariance_under_augmentation(self):
        for q, _ in CORPUS[1::2]:
            r = effective_resistance(q).entries
            r_hat = effective_resistance(augment(q)).entries
            assert_allclose(r_hat[:q.n, :q.n], r, rtol=0, atol=TOL)

    def test_loops_lower_resistance(self):
        for q, _ in CORPUS[1::2]:
            loopy = effective_resistance(q).entries
            loopless = effective_resistance(loopless_part(q)).entries
            self.assertTrue(np.all(loopy <= loopless + TOL))


class AlternativeRouteTests(unittest.TestCase):

    def test_reference_path(self):
        r = resistance_via_reference(_path3(), 2)
        self.assertEqual(r.labels, (0, 1))
        assert_allclose(r.entries[0, 1], 1.0, atol=1e-12)

    def test_reference_triangle(self):
        r = resistance_via_reference(_k(3), 2)
        assert_allclose(r.entries[0, 1], 2 / 3, atol=1e-12)

    def test_reference_structure(self):
        r = resistance_via_reference(laplacian_from_graph(star_graph()), 0)
        assert_allclose(r.entries, r.entries.T)
        assert_allclose(np.diag(r.entries), 0.0)

    def test_reference_rejects(self):
        with self.assertRaises(ClassError):
            resistance_via_reference(laplacian_from_graph(star_graph(center_loop=1.0)), 0)
        with self.assertRaises(DimensionError):
            resistance_via_reference(laplacian_from_graph(path_graph(2)), 0)

    def test_shift_independent_of_delta(self):
        l = _path3()
        first = resistance_via_shift(l, 1.0).entries
        for delta in (10.0, -1.0):
            assert_allclose(resistance_via_shift(l, delta).entries, first, rtol=0, atol=1e-10)

    def test_shift_triangle(self):
        r = resistance_via_shift(_k(3), 1.0).entries
        assert_allclose(r[0, 1], 2 / 3, atol=1e-12)

    def test_zero_shift(self):
        with self.assertRaises(DimensionError):
            resistance_via_shift(_path3(), 0.0)

    def test_routes_agree_on_corpus(self):
        for q, _ in CORPUS[0:200:2]:
            spectral = effective_resistance(q)
            ref = q.n - 1
            grounded = resistance_via_reference(q, ref)
            assert_allclose(
                grounded.entries, spectral.restrict(grounded.labels).entries,
                rtol=0, atol=TOL,
            )
            for delta in (1.0, -1.0, 10.0):
                assert_allclose(
                    resistance_via_shift(q, delta).entries, spectral.entries,
                    rtol=0, atol=TOL,
                )

    def test_shift_identity_on_corpus(self):
        for q, _ in CORPUS[0:100:2]:
            n = q.n
            for delta in (1.0, -1.0, 10.0):
                shifted = q.entries + delta / n * np.ones((n, n))
                inverse = pseudo_inverse(q) + np.ones((n, n)) / (delta * n)
                assert_allclose(shifted @ inverse, np.eye(n), rtol=0, atol=TOL)
                assert_allclose(shifted_inverse(q, delta), inverse, rtol=0, atol=TOL)


class ReconstructionTests(unittest.TestCase):

    def test_loopless_path(self):
        l = _path3()
        z = impedance_from_resistance(effective_resistance(l), ImpedanceMode.LOOP_LESS)
        assert_allclose(z, pseudo_inverse(l), atol=TOL)

    def test_loopy_direct(self):
        r = effective_resistance(augment(LOOPY_PAIR))
        z = impedance_from_resistance(r, 'LoopyDirect')
        assert_allclose(z, [[2.0, 1.0], [1.0, 1.0]], atol=1e-12)

    def test_uniform_triangle(self):
        l = _k(3)
        z = impedance_from_resistance(effective_resistance(l), ImpedanceMode.LOOP_LESS)
        assert_allclose(z, l.entries / 9.0, atol=1e-12)

    def test_round_trips_on_corpus(self):
        for q, boundary in CORPUS[:200]:
            reduced = kron_reduce(q, Partition(q.n, boundary)).q_red
            for matrix in (q, reduced):
                if matrix.is_loopless:
                    z = impedance_from_resistance(
                        effective_resistance(matrix), ImpedanceMode.LOOP_LESS
                    )
                    assert_allclose(z, pseudo_inverse(matrix), rtol=TOL, atol=TOL)
                    continue
                q_hat = augment(matrix)
                r_hat = effective_resistance(q_hat)
                assert_allclose(
                    impedance_from_resistance(r_hat, ImpedanceMode.AUGMENTED_LOOPY),
                    pseudo_inverse(q_hat), rtol=TOL, atol=TOL,
                )
                assert_allclose(
                    impedance_from_resistance(r_hat, ImpedanceMode.LOOPY_DIRECT),
                    impedance(matrix), rtol=TOL, atol=TOL,
                )

    def test_metric_violation_warns(self):
        noisy = np.array([[0.0, 1.0, 5.0], [1.0, 0.0, 1.0], [5.0, 1.0, 0.0]])
        with self.assertWarns(MetricViolationWarning):
            r = ResistanceMatrix(noisy)
        self.assertAlmostEqual(r.metric_violation, 3.0)
        z = impedance_from_resistance(r, ImpedanceMode.LOOP_LESS)
        self.assertEqual(z.shape, (3, 3))

    def test_resistance_matrix_rejects(self):
        with self.assertRaises(InvalidInput):
            ResistanceMatrix([[1.0, 1.0], [1.0, 0.0]])
        with self.assertRaises(InvalidInput):
            ResistanceMatrix([[0.0, -1.0], [-1.0, 0.0]])

    def test_ground_resistance(self):
        q = laplacian_from_graph(star_graph(center_loop=1.0))
        assert_allclose(ground_resistance(q), np.diag(np.linalg.inv(q.entries)), atol=1e-12)
        with self.assertRaises(ClassError):
            ground_resistance(_path3())


class UniformTests(unittest.TestCase):

    def test_pseudo_example(self):
        z = uniform_laplacian_inverse(3, 1.0, 0.0, UniformInverse.PSEUDO)
        assert_allclose(z, (3 * np.eye(3) - 1) / 9, atol=1e-15)

    def test_inverse_example(self):
        z = uniform_laplacian_inverse(2, 1.0, 1.0, 'Inverse')
        assert_allclose(z, [[2 / 3, 1 / 3], [1 / 3, 2 / 3]], atol=1e-15)

    def test_augmented_example(self):
        z = uniform_laplacian_inverse(2, 1.0, 1.0, 'AugmentedPseudo')
        expected = np.array([[2, -1, -1], [-1, 2, -1], [-1, -1, 2]]) / 9
        assert_allclose(z, expected, atol=1e-15)

    def test_class_mismatch(self):
        with self.assertRaises(ClassError):
            uniform_laplacian_inverse(3, 1.0, 1.0, 'Pseudo')
        with self.assertRaises(ClassError):
            uniform_laplacian_inverse(3, 1.0, 0.0, 'Inverse')
        with self.assertRaises(ClassError):
            uniform_reduced_resistance(3, 0.0, 1.0)
        with self.assertRaises(ClassError):
            uniform_reduced_resistance(3, 1.0, -1.0)

    def test_reduced_resistance_examples(self):
        self.assertEqual(uniform_reduced_resistance(4, 1.0, 0.0), (0.5, None))
        r, g = uniform_reduced_resistance(2, 1.0, 1.0)
        self.assertAlmostEqual(r, 2 / 3)
        self.assertAlmostEqual(g, 2 / 3)

    def assertPenrose(self, q, z):
        assert_allclose(q @ z @ q, q, rtol=0, atol=1e-10)
        assert_allclose(z @ q @ z, z, rtol=0, atol=1e-10)
        assert_allclose((q @ z).T, q @ z, rtol=0, atol=1e-10)
        assert_allclose((z @ q).T, z @ q, rtol=0, atol=1e-10)

    def test_grid(self):
        for m, a, b in itertools.product((2, 3, 4, 8), (0.5, 1.0, 2.0), (0.0, 0.5, 1.0)):
            with self.subTest(m=m, a=a, b=b):
                q = uniform_laplacian(m, a, b)
                r, g = uniform_reduced_resistance(m, a, b)
                if b == 0:
                    self.assertIsNone(g)
                    measured = effective_resistance(q).entries
                    self.assertPenrose(
                        q.entries, uniform_laplacian_inverse(m, a, b, 'Pseudo')
                    )
                else:
                    measured = effective_resistance(augment(q)).entries
                    assert_allclose(measured[:m, m], g, rtol=0, atol=1e-10)
                    self.assertPenrose(
                        q.entries, uniform_laplacian_inverse(m, a, b, 'Inverse')
                    )
                    self.assertPenrose(
                        augment(q).entries,
                        uniform_laplacian_inverse(m, a, b, 'AugmentedPseudo'),
                    )
                off = ~np.eye(m, dtype=bool)
                assert_allclose(measured[:m, :m][off], r, rtol=0, atol=1e-10)
                a_back, b_back = uniform_parameters_from_resistance(m, r, g)
                self.assertAlmostEqual(a_back, a, delta=1e-10)
                self.assertAlmostEqual(b_back, b, delta=1e-10)

    def test_parameters_rejected(self):
        with self.assertRaises(ClassError):
            uniform_parameters_from_resistance(3, -1.0)
        # g < r/2 would need a negative edge weight
        with self.assertRaises(ClassError):
            uniform_parameters_from_resistance(3, 1.0, 0.25)


class PerturbedResistanceTests(unittest.TestCase):

    def test_chain_example(self):
        q = laplacian_from_graph(chain_graph())
        p = Partition(4, (0, 1))
        self.assertAlmostEqual(effective_resistance(q).entries[0, 1], 3.0, delta=1e-12)
        r = perturbed_resistance(q, p, 2, 3, 1.0)
        self.assertAlmostEqual(r.entries[0, 1], 2.5, delta=1e-12)

    def test_zero_delta(self):
        q = laplacian_from_graph(chain_graph())
        r = perturbed_resistance(q, Partition(4, (0, 1)), 2, 3, 0.0)
        assert_allclose(r.entries, effective_resistance(q).entries, atol=1e-15)

    def test_disconnecting(self):
        q = laplacian_from_graph(chain_graph())
        with self.assertRaises(ConnectivityError):
            perturbed_resistance(q, Partition(4, (0, 1)), 2, 3, -1.0)

    def test_matches_full_recompute(self):
        rng = np.random.default_rng(23)
        checked = 0
        for q, boundary in CORPUS:
            p = Partition(q.n, boundary)
            if len(p.interior) < 2:
                continue
            i, j = (int(k) for k in rng.choice(p.interior, size=2, replace=False))
            delta = float(rng.uniform(-0.9 * -q.entries[i, j], 2.0))
            before = effective_resistance(q).entries
            after = perturbed_resistance(q, p, i, j, delta).entries
            full = effective_resistance(perturbed_laplacian(q, i, j, delta)).entries
            assert_allclose(after, full, rtol=0, atol=TOL)
            if delta > 0:
                self.assertTrue(np.all(after <= before + TOL))
            else:
                self.assertTrue(np.all(after >= before - TOL))
            checked += 1
            if checked == 200:
                break
        self.assertEqual(checked, 200)


class TsvTests(unittest.TestCase):

    def test_render_and_parse(self):
        r = effective_resistance(_path3())
        text = render_tsv(r.entries)
        self.assertTrue(text.startswith('n=3\n'))
        form = ResistanceForm({'tsv': text})
        self.assertTrue(form.is_valid())
        assert_allclose(form.save().entries, r.entries, rtol=0, atol=0)

    def test_bad_header(self):
        form = MatrixTsvForm({'tsv': '3\n0\t1\n1\t0\n'})
        self.assertFalse(form.is_valid())
        self.assertEqual(form.error().field, 'line 1')

    def test_row_count(self):
        form = MatrixTsvForm({'tsv': 'n=2\n0\t1\n'})
        self.assertFalse(form.is_valid())
        self.assertIsInstance(form.error(), DimensionError)

    def test_bad_cell(self):
        form = MatrixTsvForm({'tsv': 'n=2\n0\tx\n1\t0\n'})
        self.assertFalse(form.is_valid())
        self.assertEqual(form.error().field, 'line 2, column 2')

    def test_no_warning_for_metric_input(self):
        with warnings.catch_warnings():
            warnings.simplefilter('error')
            ResistanceForm({'tsv': render_tsv(effective_resistance(_k(4)).entries)}).save()
