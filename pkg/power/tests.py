import unittest

import numpy as np
from numpy.testing import assert_allclose

from kronred.exceptions import (
    ClassError,
    CompatibilityError,
    ConnectivityError,
    CutsetDegenerate,
    DimensionError,
    UniformityError,
    InvalidInput,
)
from graphcore.factories import chain_graph, corpus, star_graph
from graphcore.models import LoopyLaplacian, WeightedGraph
from graphcore.utils import laplacian_from_graph, loopless_part
from kron.models import Partition
from kron.utils import kron_reduce, perturbed_laplacian, reduced_self_loops
from resistance.utils import effective_resistance, uniform_laplacian
from .forms import DcNetworkForm, SigmaForm
from .models import CutsetResult, DcNetwork, SyncCondition
from .utils import (
    coupling_weights,
    cutset,
    cutset_after_perturbation,
    effective_power_inputs,
    reduce_dc,
    solve_dc,
    solve_reduced_dc,
    sync_reduced,
    sync_resistive_nonreduced,
    sync_spectral_nonreduced,
)

CORPUS = corpus(seed=5, count=200)


def _chain_network(p=(1.0, -1.0, 0.0, 0.0)):
    return DcNetwork(laplacian_from_graph(chain_graph()), p), Partition(4, (0, 1))


def _star(loop=0.0):
    return laplacian_from_graph(star_graph(center_loop=loop)), Partition(4, (0, 1, 2))


def _injections(rng, q):
    p = rng.normal(size=q.n)
    if q.is_loopless:
        p -= p.mean()
    return p


def _scale(values):
    return max(1.0, float(np.abs(values).max()))


class DcNetworkTests(unittest.TestCase):

    def test_rejects_disconnected(self):
        weights = np.zeros((4, 4))
        weights[0, 1] = weights[1, 0] = weights[2, 3] = weights[3, 2] = 1.0
        with self.assertRaises(ConnectivityError):
            DcNetwork(laplacian_from_graph(WeightedGraph(weights)), np.zeros(4))

    def test_rejects_wrong_length(self):
        with self.assertRaises(DimensionError):
            _chain_network(p=(1.0, -1.0))

    def test_balance(self):
        net, _ = _chain_network()
        self.assertTrue(net.is_balanced)
        self.assertFalse(_chain_network(p=(1.0, 0.0, 0.0, 0.0))[0].is_balanced)


class DcReductionTests(unittest.TestCase):

    def test_chain(self):
        net, p = _chain_network()
        dc = reduce_dc(net, p)
        assert_allclose(dc.p_reduced, [1.0, -1.0], atol=1e-12)
        assert_allclose(dc.b_red.entries, [[1 / 3, -1 / 3], [-1 / 3, 1 / 3]], atol=1e-12)
        theta = solve_reduced_dc(net, p)
        self.assertAlmostEqual(theta[0] - theta[1], 3.0, places=12)

    def test_no_interior_injection(self):
        net, p = _chain_network()
        assert_allclose(effective_power_inputs(net, p), net.p[list(p.boundary)])

    def test_gauge_invariance(self):
        net, _ = _chain_network()
        theta = solve_dc(net)
        assert_allclose(net.b.entries @ (theta + 7.0), net.p, atol=1e-12)
        self.assertAlmostEqual(float(theta.mean()), 0.0, places=12)

    def test_unbalanced_loopless(self):
        net, p = _chain_network(p=(1.0, 0.0, 0.0, 0.0))
        with self.assertRaises(CompatibilityError):
            solve_dc(net)
        with self.assertRaises(CompatibilityError):
            solve_reduced_dc(net, p)

    def test_reduced_solve_matches_full(self):
        rng = np.random.default_rng(8)
        for q, boundary in CORPUS:
            p = Partition(q.n, boundary)
            net = DcNetwork(q, _injections(rng, q))
            full = solve_dc(net)[list(p.boundary)]
            reduced = solve_reduced_dc(net, p)
            if q.is_loopless:
                full = full - full.mean()
            assert_allclose(reduced, full, atol=1e-9 * _scale(full))


class CutsetTests(unittest.TestCase):

    def test_chain(self):
        net, p = _chain_network()
        result = cutset(net, p, [1, 0])
        self.assertAlmostEqual(result.p_cut, 1.0, places=12)
        self.assertAlmostEqual(result.b_cut, 1 / 3, places=12)
        self.assertAlmostEqual(result.theta_cut, 3.0, places=12)
        self.assertEqual(result.theta_cut, result.p_cut / result.b_cut)
        self.assertEqual(result.sigma, (1, 0))

    def test_zero_injection(self):
        net, p = _chain_network(p=(0.0, 0.0, 0.0, 0.0))
        result = cutset(net, p, [0, 1])
        self.assertEqual(result.p_cut, 0.0)
        self.assertEqual(result.theta_cut, 0.0)

    def test_complement(self):
        rng = np.random.default_rng(12)
        for q, boundary in CORPUS[:40:2]:
            p = Partition(q.n, boundary)
            net = DcNetwork(q, _injections(rng, q))
            sigma = np.zeros(len(boundary), dtype=int)
            sigma[0] = 1
            one = cutset(net, p, sigma)
            other = cutset(net, p, 1 - sigma)
            total = float(effective_power_inputs(net, p).sum())
            self.assertAlmostEqual(one.p_cut + other.p_cut, total, places=9)
            self.assertAlmostEqual(one.b_cut, other.b_cut, places=9)

    def test_degenerate(self):
        net, p = _chain_network()
        with self.assertRaises(CutsetDegenerate):
            cutset(net, p, [1, 1])
        with self.assertRaises(CutsetDegenerate):
            cutset(net, p, [0, 0])
        with self.assertRaises(DimensionError):
            cutset(net, p, [1, 0, 1])
        with self.assertRaises(InvalidInput):
            cutset(net, p, [2, 0])

    def test_no_susceptance(self):
        with self.assertRaises(CutsetDegenerate):
            CutsetResult.from_flows(1.0, 0.0, (1, 0))

    def test_interior_relabeling(self):
        rng = np.random.default_rng(21)
        for q, boundary in CORPUS[:60]:
            p = Partition(q.n, boundary)
            interior = list(p.interior)
            perm = np.arange(q.n)
            perm[interior] = rng.permutation(interior)
            injections = _injections(rng, q)
            relabeled = LoopyLaplacian(q.entries[np.ix_(perm, perm)])
            sigma = rng.integers(0, 2, size=len(boundary))
            sigma[0], sigma[-1] = 1, 0
            before = cutset(DcNetwork(q, injections), p, sigma)
            after = cutset(DcNetwork(relabeled, injections[perm]), p, sigma)
            self.assertAlmostEqual(before.p_cut, after.p_cut, places=9)
            self.assertAlmostEqual(before.b_cut, after.b_cut, places=9)

    def test_perturbation_matches_recompute(self):
        net, p = _chain_network()
        updated = cutset_after_perturbation(net, p, [1, 0], 2, 3, 1.0)
        direct = cutset(DcNetwork(perturbed_laplacian(net.b, 2, 3, 1.0), net.p), p, [1, 0])
        self.assertAlmostEqual(updated.b_cut, direct.b_cut, places=12)
        self.assertAlmostEqual(updated.b_cut, 0.4, places=12)
        self.assertAlmostEqual(updated.p_cut, direct.p_cut, places=12)

    def test_strengthening_never_weakens_cut(self):
        rng = np.random.default_rng(34)
        checked = 0
        for q, boundary in CORPUS:
            p = Partition(q.n, boundary)
            if len(p.interior) < 2:
                continue
            net = DcNetwork(q, _injections(rng, q))
            i, j = (int(k) for k in rng.choice(p.interior, size=2, replace=False))
            sigma = rng.integers(0, 2, size=len(boundary))
            sigma[0], sigma[-1] = 1, 0
            before = cutset(net, p, sigma)
            delta = float(rng.uniform(0.1, 2.0))
            after = cutset_after_perturbation(net, p, sigma, i, j, delta)
            direct = cutset(DcNetwork(perturbed_laplacian(q, i, j, delta), net.p), p, sigma)
            self.assertGreaterEqual(after.b_cut, before.b_cut - 1e-12 * _scale(before.b_cut))
            self.assertAlmostEqual(after.b_cut, direct.b_cut, delta=1e-9 * _scale(direct.b_cut))
            self.assertAlmostEqual(after.p_cut, direct.p_cut, delta=1e-9 * _scale(direct.p_cut))
            checked += 1
        self.assertGreater(checked, 100)


class CouplingTests(unittest.TestCase):

    def test_unit_voltages(self):
        q, p = _star()
        pij = coupling_weights(kron_reduce(q, p).q_red, np.ones(3))
        expected = np.full((3, 3), 1 / 3)
        np.fill_diagonal(expected, 0.0)
        assert_allclose(pij, expected, atol=1e-12)

    def test_voltage_scaling(self):
        q, p = _star()
        pij = coupling_weights(kron_reduce(q, p).q_red, [2.0, 1.0, 1.0])
        self.assertAlmostEqual(pij[0, 1], 2 / 3, places=12)
        self.assertAlmostEqual(pij[1, 2], 1 / 3, places=12)

    def test_nonpositive_voltage(self):
        q, p = _star()
        with self.assertRaises(ClassError):
            coupling_weights(kron_reduce(q, p).q_red, [1.0, 0.0, 1.0])


class SyncReducedTests(unittest.TestCase):

    def test_two_nodes(self):
        elementwise, spectral = sync_reduced([[0.0, 1.0], [1.0, 0.0]], [0.5, -0.5])
        self.assertIs(elementwise.condition, SyncCondition.REDUCED_ELEMENTWISE)
        self.assertAlmostEqual(elementwise.lhs, 2.0)
        self.assertAlmostEqual(elementwise.rhs, 1.0)
        self.assertTrue(elementwise.satisfied)
        self.assertAlmostEqual(spectral.lhs, 2.0, places=12)
        self.assertAlmostEqual(spectral.rhs, 1.0, places=12)
        self.assertTrue(spectral.satisfied)

    def test_uniform_inputs(self):
        pij = np.full((3, 3), 0.1)
        np.fill_diagonal(pij, 0.0)
        for assessment in sync_reduced(pij, [0.3, 0.3, 0.3]):
            self.assertEqual(assessment.rhs, 0.0)
            self.assertTrue(assessment.satisfied)

    def test_missing_edge(self):
        pij = [[0.0, 5.0, 0.0], [5.0, 0.0, 5.0], [0.0, 5.0, 0.0]]
        elementwise, _ = sync_reduced(pij, [0.1, 0.0, 0.0])
        self.assertEqual(elementwise.lhs, 0.0)
        self.assertFalse(elementwise.satisfied)

    def test_rejects_bad_coupling(self):
        with self.assertRaises(InvalidInput):
            sync_reduced([[0.0, -1.0], [-1.0, 0.0]], [0.0, 0.0])
        with self.assertRaises(InvalidInput):
            sync_reduced([[1.0, 1.0], [1.0, 0.0]], [0.0, 0.0])
        with self.assertRaises(DimensionError):
            sync_reduced([[0.0, 1.0], [1.0, 0.0]], [0.0, 0.0, 0.0])

    def test_as_dict(self):
        elementwise, _ = sync_reduced([[0.0, 1.0], [1.0, 0.0]], [0.5, -0.5])
        data = elementwise.as_dict()
        self.assertEqual(data['condition'], 'ReducedElementwise')
        self.assertTrue(data['satisfied'])
        self.assertEqual(data['inputs']['omega'], [0.5, -0.5])


class SyncNonReducedTests(unittest.TestCase):

    def test_star_with_loop(self):
        q, p = _star(loop=1.0)
        loops = reduced_self_loops(q, p)
        assert_allclose(loops, [0.25, 0.25, 0.25], atol=1e-12)
        result = sync_spectral_nonreduced(loopless_part(q), [0.1, -0.1, 0.0], 1.0, loops)
        self.assertAlmostEqual(result.lhs, 1.0, places=12)
        self.assertAlmostEqual(result.rhs, np.sqrt(0.06) + 0.25, places=12)
        self.assertTrue(result.satisfied)

    def test_large_voltage_limit(self):
        q, p = _star(loop=1.0)
        result = sync_spectral_nonreduced(
            loopless_part(q), [0.1, -0.1, 0.0], 1e6, reduced_self_loops(q, p)
        )
        self.assertAlmostEqual(result.rhs, 0.25, places=9)

    def test_spectral_rejects(self):
        q, p = _star(loop=1.0)
        loops = reduced_self_loops(q, p)
        with self.assertRaises(ClassError):
            sync_spectral_nonreduced(loopless_part(q), [0.0] * 3, 0.0, loops)
        with self.assertRaises(ClassError):
            sync_spectral_nonreduced(q, [0.0] * 3, 1.0, loops)

    def test_dimension_mismatch(self):
        q, p = _star(loop=1.0)
        l = loopless_part(q)
        loops = reduced_self_loops(q, p)
        with self.assertRaises(DimensionError):
            sync_spectral_nonreduced(l, [0.1, -0.1], 1.0, loops)
        with self.assertRaises(DimensionError):
            sync_spectral_nonreduced(l, [], 1.0, [])
        with self.assertRaises(DimensionError):
            sync_spectral_nonreduced(l, [0.0] * 5, 1.0, np.zeros(5))
        with self.assertRaises(DimensionError):
            sync_resistive_nonreduced(0.5, [0.0] * 3, 1.0, np.zeros(4))
        with self.assertRaises(DimensionError):
            sync_resistive_nonreduced(0.5, [], 1.0, [])
        with self.assertRaises(DimensionError):
            sync_resistive_nonreduced(0.5, [0.0] * 4, 1.0, np.zeros((2, 2)))

    def test_resistive_examples(self):
        loops = np.zeros(4)
        uniform = sync_resistive_nonreduced(0.5, [0.2] * 4, 1.0, loops)
        self.assertEqual((uniform.lhs, uniform.rhs), (2.0, 0.0))
        self.assertTrue(uniform.satisfied)
        spread = sync_resistive_nonreduced(0.5, [1.0, 0.0, 0.5, 0.5], 1.0, loops)
        self.assertEqual((spread.lhs, spread.rhs), (2.0, 0.5))
        self.assertTrue(spread.satisfied)
        weak = sync_resistive_nonreduced(10.0, [1.0, 0.0, 0.5, 0.5], 1.0, loops)
        self.assertAlmostEqual(weak.lhs, 0.1)
        self.assertFalse(weak.satisfied)
        self.assertIs(weak.condition, SyncCondition.NON_REDUCED_RESISTIVE)

    def test_uniformity_check(self):
        resistance = effective_resistance(uniform_laplacian(4, 1.0))
        result = sync_resistive_nonreduced(0.5, [0.0] * 4, 1.0, np.zeros(4), resistance=resistance)
        self.assertTrue(result.satisfied)
        with self.assertRaises(UniformityError):
            sync_resistive_nonreduced(0.6, [0.0] * 4, 1.0, np.zeros(4), resistance=resistance)


class ImplicationTests(unittest.TestCase):

    def test_spectral_implies_reduced_spectral(self):
        rng = np.random.default_rng(55)
        satisfied = 0
        for q, boundary in CORPUS:
            p = Partition(q.n, boundary)
            kr = kron_reduce(q, p)
            m = len(boundary)
            omega = rng.normal(scale=0.01 / m, size=m)
            v_mag = rng.uniform(1.0, 1.2, size=m)
            proxy = sync_spectral_nonreduced(
                loopless_part(q), omega, 1.0, reduced_self_loops(q, p, kr)
            )
            if not proxy.satisfied:
                continue
            satisfied += 1
            _, spectral = sync_reduced(coupling_weights(kr.q_red, v_mag), omega)
            self.assertTrue(spectral.satisfied, msg=f"{spectral.lhs} <= {spectral.rhs}")
        self.assertGreater(satisfied, 20)

    def test_resistive_implies_reduced_elementwise(self):
        rng = np.random.default_rng(89)
        satisfied = 0
        for _ in range(100):
            m = int(rng.integers(2, 7))
            weights = np.zeros((m + 1, m + 1))
            weights[:m, :m] = rng.uniform(0.5, 2.0)
            weights[:m, m] = weights[m, :m] = rng.uniform(0.5, 2.0)
            np.fill_diagonal(weights, rng.uniform(0.0, 0.5) * rng.integers(2))
            weights[m, m] = rng.uniform(0.0, 2.0) * rng.integers(2)
            q = laplacian_from_graph(WeightedGraph(weights))
            p = Partition(m + 1, tuple(range(m)))
            kr = kron_reduce(q, p)
            resistance = effective_resistance(q).restrict(p.boundary)
            r_uniform = float(resistance.entries[0, 1])
            omega = rng.normal(scale=0.2, size=m)
            proxy = sync_resistive_nonreduced(
                r_uniform, omega, 1.0, reduced_self_loops(q, p, kr), resistance=resistance
            )
            if not proxy.satisfied:
                continue
            satisfied += 1
            v_mag = rng.uniform(1.0, 1.5, size=m)
            elementwise, _ = sync_reduced(coupling_weights(kr.q_red, v_mag), omega)
            self.assertTrue(elementwise.satisfied, msg=f"{elementwise.lhs} <= {elementwise.rhs}")
        self.assertGreater(satisfied, 10)


class FormTests(unittest.TestCase):

    def test_network(self):
        data = {
            'n': 3,
            'edges': [{'i': 1, 'j': 2, 'w': 1.0}, {'i': 2, 'j': 3, 'w': 2.0}],
            'p': [1, 0, -1],
        }
        form = DcNetworkForm(data)
        self.assertTrue(form.is_valid())
        net = form.save()
        assert_allclose(net.p, [1.0, 0.0, -1.0])
        self.assertIsNone(net.theta)

    def test_network_needs_injections(self):
        form = DcNetworkForm({'n': 2, 'edges': [{'i': 1, 'j': 2, 'w': 1.0}], 'p': [1]})
        self.assertFalse(form.is_valid())
        self.assertEqual(form.error().field, 'p')
        self.assertIsInstance(form.error(), DimensionError)

    def test_sigma(self):
        self.assertEqual(SigmaForm({'sigma': [1, 0, 1]}, 3).save(), [1, 0, 1])
        for data, error in (
            ({'sigma': [1, 1]}, CutsetDegenerate),
            ({'sigma': [1, 2]}, InvalidInput),
            ({'sigma': [1, 0, 0]}, DimensionError),
            ([1, 0], InvalidInput),
        ):
            form = SigmaForm(data, 2)
            self.assertFalse(form.is_valid())
            self.assertIsInstance(form.error(), error)
