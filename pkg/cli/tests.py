import io
import json
import tempfile
from contextlib import redirect_stderr, redirect_stdout
from pathlib import Path

import numpy as np
from django.core.management import call_command, execute_from_command_line
from django.core.management.base import CommandError
from django.test import SimpleTestCase
from numpy.testing import assert_allclose

from kronred.exceptions import ConnectivityError, IllConditionedError
from graphcore.factories import random_connected_graph
from graphcore.forms import serialize_graph
from graphcore.utils import laplacian_from_graph
from resistance.forms import MatrixTsvForm
from .forms import BoundaryForm, PerturbationForm, RunConfigForm
from .management.base import KronredCommand
from .verification import boundary_sets, run_suite

STAR = {
    'n': 4,
    'edges': [
        {'i': 1, 'j': 4, 'w': 1.0},
        {'i': 2, 'j': 4, 'w': 1.0},
        {'i': 3, 'j': 4, 'w': 1.0},
    ],
}

STAR_WITH_LOOP = dict(STAR, loops=[{'i': 4, 'w': 1.0}])

# Unit path 1-3-4-2.
CHAIN = {
    'n': 4,
    'edges': [
        {'i': 1, 'j': 3, 'w': 1.0},
        {'i': 2, 'j': 4, 'w': 1.0},
        {'i': 3, 'j': 4, 'w': 1.0},
    ],
}


class CommandTestCase(SimpleTestCase):

    def setUp(self):
        tmp = tempfile.TemporaryDirectory()
        self.addCleanup(tmp.cleanup)
        self.tmp = Path(tmp.name)

    def write_input(self, data, name='input.json'):
        path = self.tmp / name
        path.write_text(data if isinstance(data, str) else json.dumps(data))
        return str(path)

    def run_command(self, *args):
        """Returns (exit code, stdout, error message)."""
        out = io.StringIO()
        try:
            call_command(*args, stdout=out, stderr=io.StringIO())
        except CommandError as e:
            return e.returncode, out.getvalue(), str(e)
        return 0, out.getvalue(), ''

    def run_json(self, *args):
        code, out, err = self.run_command(*args)
        self.assertEqual(code, 0, msg=err)
        return json.loads(out)


class ReduceCommandTests(CommandTestCase):

    def test_star_to_triangle(self):
        data = self.run_json('reduce', '--input', self.write_input(STAR), '--boundary', '1,2,3')
        self.assertEqual(data['permutation'], [1, 2, 3])
        self.assertEqual(len(data['a_red']['edges']), 3)
        for edge in data['a_red']['edges']:
            self.assertAlmostEqual(edge['w'], 1 / 3, places=12)
        assert_allclose(np.array(data['q_ac']), np.full((3, 1), 1 / 3), atol=1e-12)
        self.assertEqual(data['class'], 'LoopLess')

    def test_tsv(self):
        code, out, _ = self.run_command(
            'reduce', '--input', self.write_input(STAR), '--boundary', '1,2,3', '--format', 'tsv'
        )
        self.assertEqual(code, 0)
        form = MatrixTsvForm({'tsv': out})
        self.assertTrue(form.is_valid())
        assert_allclose(form.save(), np.array([[2, -1, -1], [-1, 2, -1], [-1, -1, 2]]) / 3, atol=1e-12)

    def test_tolerance_sets_edge_threshold(self):
        data = self.run_json(
            'reduce', '--input', self.write_input(STAR), '--boundary', '1,2,3', '--tol', '0.5'
        )
        self.assertEqual(data['a_red']['edges'], [])
        assert_allclose(data['q_red'][0], [2 / 3, -1 / 3, -1 / 3], atol=1e-12)

    def test_single_boundary_node(self):
        code, out, err = self.run_command('reduce', '--input', self.write_input(STAR), '--boundary', '1')
        self.assertEqual(code, 2)
        self.assertEqual(out, '')
        self.assertIn('at least 2 nodes', err)

    def test_out_of_range_boundary(self):
        code, out, err = self.run_command('reduce', '--input', self.write_input(STAR), '--boundary', '1,5')
        self.assertEqual(code, 2)
        self.assertEqual(out, '')
        self.assertEqual(err, '--boundary[1]: node 5 is outside 1..4')

    def test_missing_boundary(self):
        code, _, err = self.run_command('reduce', '--input', self.write_input(STAR))
        self.assertEqual(code, 2)
        self.assertEqual(err, '--boundary: this command needs a boundary set')

    def test_disconnected(self):
        graph = {'n': 4, 'edges': [{'i': 1, 'j': 2, 'w': 1.0}, {'i': 3, 'j': 4, 'w': 1.0}]}
        code, out, _ = self.run_command('reduce', '--input', self.write_input(graph), '--boundary', '1,3')
        self.assertEqual(code, 3)
        self.assertEqual(out, '')

    def test_malformed_input(self):
        code, _, _ = self.run_command('reduce', '--input', self.write_input('{"n": 3,'), '--boundary', '1,2')
        self.assertEqual(code, 2)
        code, _, _ = self.run_command('reduce', '--input', str(self.tmp / 'missing.json'), '--boundary', '1,2')
        self.assertEqual(code, 2)
        code, _, err = self.run_command('reduce', '--input', self.write_input('[1, 2]'), '--boundary', '1,2')
        self.assertEqual(code, 2)
        self.assertEqual(err, 'input: expected a JSON object')

    def test_output_file(self):
        target = self.tmp / 'out.json'
        code, out, _ = self.run_command(
            'reduce', '--input', self.write_input(STAR), '--boundary', '1,2,3', '--output', str(target)
        )
        self.assertEqual(code, 0)
        self.assertEqual(out, '')
        self.assertEqual(json.loads(target.read_text())['permutation'], [1, 2, 3])

    def test_failure_leaves_no_output_file(self):
        target = self.tmp / 'out.json'
        code, _, _ = self.run_command(
            'reduce', '--input', self.write_input(STAR), '--boundary', '1', '--output', str(target)
        )
        self.assertEqual(code, 2)
        self.assertFalse(target.exists())

    def test_unwritable_output(self):
        target = self.tmp / 'missing' / 'out.json'
        code, out, err = self.run_command(
            'reduce', '--input', self.write_input(STAR), '--boundary', '1,2,3', '--output', str(target)
        )
        self.assertEqual(code, 5)
        self.assertEqual(out, '')
        self.assertTrue(err.startswith('--output: cannot write output'))


class ResistanceCommandTests(CommandTestCase):

    def test_path_tsv(self):
        path = {'n': 3, 'edges': [{'i': 1, 'j': 2, 'w': 1.0}, {'i': 2, 'j': 3, 'w': 1.0}]}
        code, out, _ = self.run_command('resistance', '--input', self.write_input(path), '--format', 'tsv')
        self.assertEqual(code, 0)
        self.assertTrue(out.startswith('n=3\n'))
        form = MatrixTsvForm({'tsv': out})
        self.assertTrue(form.is_valid())
        self.assertAlmostEqual(form.save()[0, 2], 2.0, places=12)

    def test_restricted(self):
        data = self.run_json('resistance', '--input', self.write_input(STAR), '--boundary', '1,2')
        self.assertEqual(data['labels'], [1, 2])
        self.assertAlmostEqual(data['resistance'][0][1], 2.0, places=12)


class AugmentCommandTests(CommandTestCase):

    def test_ground(self):
        data = self.run_json('augment', '--input', self.write_input(STAR_WITH_LOOP), '--ground')
        self.assertEqual(data['ground'], 5)
        self.assertEqual(data['n'], 5)
        self.assertIn({'i': 4, 'j': 5, 'w': 1.0}, data['edges'])
        self.assertEqual(data['loops'], [])

    def test_tolerance_drops_light_edges(self):
        graph = dict(STAR, loops=[{'i': 4, 'w': 0.25}])
        data = self.run_json('augment', '--input', self.write_input(graph), '--tol', '0.5')
        self.assertNotIn({'i': 4, 'j': 5, 'w': 0.25}, data['edges'])
        self.assertEqual(len(data['edges']), 3)


class SpectrumCommandTests(CommandTestCase):

    def test_star(self):
        data = self.run_json('spectrum', '--input', self.write_input(STAR), '--boundary', '1,2,3')
        assert_allclose(data['eigenvalues'], [0, 1, 1, 4], atol=1e-12)
        self.assertAlmostEqual(data['algebraic_connectivity'], 1.0, places=12)
        self.assertLessEqual(data['interlacing']['slack'], 1e-8)
        self.assertTrue(data['interlacing']['holds'])
        self.assertNotIn('augmented', data)

    def test_loopy_star(self):
        data = self.run_json('spectrum', '--input', self.write_input(STAR_WITH_LOOP))
        self.assertEqual(data['class'], 'StrictlyLoopy')
        self.assertLessEqual(data['augmented']['slack'], 1e-8)
        self.assertTrue(data['augmented']['holds'])

    def test_tolerance_decides_holds(self):
        graph = dict(STAR, loops=[{'i': 4, 'w': 1e-8}])
        path = self.write_input(graph)
        data = self.run_json('spectrum', '--input', path)
        self.assertFalse(data['augmented']['holds'])
        self.assertEqual(data['augmented']['worst_check'], '0 < lambda_1')
        data = self.run_json('spectrum', '--input', path, '--tol', '1e-12')
        self.assertTrue(data['augmented']['holds'])

    def test_json_only(self):
        code, out, err = self.run_command('spectrum', '--input', self.write_input(STAR), '--format', 'tsv')
        self.assertEqual(code, 2)
        self.assertEqual(out, '')
        self.assertTrue(err.startswith('--format:'))


class PerturbCommandTests(CommandTestCase):

    def test_chain(self):
        data = self.run_json(
            'perturb', '--input', self.write_input(CHAIN), '--boundary', '1,2', '--perturb', '3,4,1.0'
        )
        assert_allclose(data['q_red'], [[0.4, -0.4], [-0.4, 0.4]], atol=1e-12)
        self.assertAlmostEqual(data['resistance'][0][1], 2.5, places=12)
        self.assertAlmostEqual(data['r_int'], 2 / 3, places=12)

    def test_disconnecting(self):
        code, out, _ = self.run_command(
            'perturb', '--input', self.write_input(CHAIN), '--boundary', '1,2', '--perturb', '3,4,-1'
        )
        self.assertEqual(code, 3)
        self.assertEqual(out, '')

    def test_needs_perturbation(self):
        code, _, err = self.run_command('perturb', '--input', self.write_input(CHAIN), '--boundary', '1,2')
        self.assertEqual(code, 2)
        self.assertIn('--perturb', err)


class CutsetCommandTests(CommandTestCase):

    def test_chain(self):
        network = dict(CHAIN, p=[1, -1, 0, 0])
        data = self.run_json(
            'cutset', '--input', self.write_input(network), '--boundary', '1,2', '--sigma', '1,0'
        )
        self.assertAlmostEqual(data['p_cut'], 1.0, places=12)
        self.assertAlmostEqual(data['b_cut'], 1 / 3, places=12)
        self.assertAlmostEqual(data['theta_cut'], 3.0, places=12)

    def test_sigma_from_input(self):
        network = dict(CHAIN, p=[1, -1, 0, 0], sigma=[0, 1])
        data = self.run_json(
            'cutset', '--input', self.write_input(network), '--boundary', '1,2', '--perturb', '3,4,1'
        )
        self.assertAlmostEqual(data['p_cut'], -1.0, places=12)
        self.assertAlmostEqual(data['perturbed']['b_cut'], 0.4, places=12)

    def test_degenerate(self):
        network = dict(CHAIN, p=[1, -1, 0, 0])
        code, out, _ = self.run_command(
            'cutset', '--input', self.write_input(network), '--boundary', '1,2', '--sigma', '1,1'
        )
        self.assertEqual(code, 2)
        self.assertEqual(out, '')

    def test_tolerance_reaches_reduction(self):
        network = dict(CHAIN, p=[1, -1, 0, 0])
        code, out, _ = self.run_command(
            'cutset', '--input', self.write_input(network), '--boundary', '1,2', '--sigma', '1,0',
            '--tol', '2',
        )
        self.assertEqual(code, 3)
        self.assertEqual(out, '')


class SyncCommandTests(CommandTestCase):

    def test_uniform_inputs(self):
        data = self.run_json(
            'sync', '--input', self.write_input(STAR), '--boundary', '1,2,3',
            '--omega', '0.1,0.1,0.1', '--resistance-uniform',
        )
        names = [a['condition'] for a in data['assessments']]
        self.assertEqual(names, [
            'ReducedElementwise', 'ReducedSpectral', 'NonReducedSpectral', 'NonReducedResistive',
        ])
        for assessment in data['assessments']:
            self.assertTrue(assessment['satisfied'])

    def test_omega_from_injections(self):
        network = dict(STAR, p=[0.1, -0.1, 0.0, 0.0])
        data = self.run_json('sync', '--input', self.write_input(network), '--boundary', '1,2,3')
        assert_allclose(data['omega'], [0.1, -0.1, 0.0], atol=1e-12)
        self.assertEqual(len(data['assessments']), 3)

    def test_needs_omega(self):
        code, _, _ = self.run_command('sync', '--input', self.write_input(STAR), '--boundary', '1,2,3')
        self.assertEqual(code, 2)

    def test_omega_length_is_checked(self):
        code, out, _ = self.run_command(
            'sync', '--input', self.write_input(STAR), '--boundary', '1,2,3', '--omega', '0.1,0.2',
        )
        self.assertEqual(code, 2)
        self.assertEqual(out, '')

    def test_uniformity_tolerance(self):
        # Boundary {1,2,4} of the star: R_12 = 2 but R_14 = R_24 = 1.
        argv = (
            'sync', '--input', self.write_input(STAR), '--boundary', '1,2,4',
            '--omega', '0,0,0', '--resistance-uniform',
        )
        code, _, _ = self.run_command(*argv)
        self.assertEqual(code, 5)
        data = self.run_json(*argv, '--tol', '0.6')
        self.assertEqual(data['assessments'][-1]['condition'], 'NonReducedResistive')


class VerifyCommandTests(CommandTestCase):

    def test_star_passes(self):
        data = self.run_json('verify', '--input', self.write_input(STAR))
        self.assertTrue(data['passed'])
        self.assertEqual(data['boundary_sets'], 10)
        names = [result['name'] for result in data['properties']]
        self.assertEqual(names, sorted(names))
        self.assertIn('closure', names)

    def test_loopy_star_passes(self):
        data = self.run_json('verify', '--input', self.write_input(STAR_WITH_LOOP))
        failed = [r['name'] for r in data['properties'] if not r['passed']]
        self.assertEqual(failed, [])

    def test_corruption_fails_closure(self):
        code, out, _ = self.run_command('verify', '--input', self.write_input(STAR), '--debug-corrupt')
        self.assertEqual(code, 5)
        data = json.loads(out)
        self.assertFalse(data['passed'])
        failed = {r['name']: r for r in data['properties'] if not r['passed']}
        self.assertEqual(list(failed), ['closure'])
        self.assertTrue(failed['closure']['detail'].startswith('q_red'))
        self.assertTrue(failed['closure']['boundary'])

    def test_seeded_sampling_is_deterministic(self):
        rng = np.random.default_rng(15)
        graph = serialize_graph(random_connected_graph(rng, 15, density=0.3, loop_probability=0.3))
        path = self.write_input(graph)
        argv = ('verify', '--input', path, '--cap', '10', '--seed', '7')
        first = self.run_command(*argv)
        second = self.run_command(*argv, '--workers', '1')
        self.assertEqual(first[0], 0, msg=first[2])
        self.assertEqual(first[1], second[1])

    def test_rejects_nonpositive_tolerance(self):
        code, _, err = self.run_command('verify', '--input', self.write_input(STAR), '--tol', '0')
        self.assertEqual(code, 2)
        self.assertTrue(err.startswith('--tol:'))

    def test_rejects_zero_workers(self):
        code, _, err = self.run_command('verify', '--input', self.write_input(STAR), '--workers', '0')
        self.assertEqual(code, 2)
        self.assertTrue(err.startswith('--workers:'))


class CommandLineTests(SimpleTestCase):
    """The exit status seen by a shell running ``manage.py``."""

    def run_manage(self, *argv):
        stdout, stderr = io.StringIO(), io.StringIO()
        with redirect_stdout(stdout), redirect_stderr(stderr):
            try:
                execute_from_command_line(['manage.py', *argv])
            except SystemExit as e:
                return e.code, stdout.getvalue(), stderr.getvalue()
        return 0, stdout.getvalue(), stderr.getvalue()

    def test_success(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / 'star.json'
            path.write_text(json.dumps(STAR))
            code, out, _ = self.run_manage('reduce', '--input', str(path), '--boundary', '1,2,3')
        self.assertEqual(code, 0)
        self.assertEqual(json.loads(out)['permutation'], [1, 2, 3])

    def test_disconnected_exit_status(self):
        graph = {'n': 4, 'edges': [{'i': 1, 'j': 2, 'w': 1.0}, {'i': 3, 'j': 4, 'w': 1.0}]}
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / 'split.json'
            path.write_text(json.dumps(graph))
            code, out, err = self.run_manage('reduce', '--input', str(path), '--boundary', '1,3')
        self.assertEqual(code, 3)
        self.assertEqual(out, '')
        self.assertIn('CommandError:', err)

    def test_unknown_flag(self):
        code, _, _ = self.run_manage('reduce', '--input', 'x.json', '--no-such-flag')
        self.assertEqual(code, 2)


class FlagFormTests(SimpleTestCase):

    def options(self, **overrides):
        return dict({'input': 'graph.json', 'fmt': 'json'}, **overrides)

    def test_defaults(self):
        cfg = RunConfigForm(self.options(), 'reduce').save()
        self.assertEqual(cfg.command, 'reduce')
        self.assertIsNone(cfg.boundary)
        self.assertIsNone(cfg.output)
        self.assertEqual(cfg.v_lower, 1.0)
        self.assertEqual(cfg.seed, 42)

    def test_lists(self):
        cfg = RunConfigForm(
            self.options(boundary='1, 2,3', omega='-0.5,0.5', perturb='3,4,-0.25'), 'sync'
        ).save()
        self.assertEqual(cfg.boundary, (1, 2, 3))
        self.assertEqual(cfg.omega, (-0.5, 0.5))
        self.assertEqual(cfg.perturb, (3, 4, -0.25))

    def test_flag_names_in_errors(self):
        for options, flag in (
            ({'boundary': '1,x'}, '--boundary'),
            ({'perturb': '1,2'}, '--perturb'),
            ({'v_lower': -1.0}, '--v-lower'),
            ({'cap': 0}, '--cap'),
        ):
            form = RunConfigForm(self.options(**options), 'verify')
            self.assertFalse(form.is_valid())
            self.assertEqual(form.error().field, flag)

    def test_format_restricted_per_command(self):
        form = RunConfigForm(self.options(fmt='tsv'), 'sync', formats=('json',))
        self.assertFalse(form.is_valid())
        self.assertEqual(form.error().field, '--format')

    def test_boundary_and_perturbation(self):
        self.assertEqual(BoundaryForm((2, 1), 3).save().boundary, (0, 1))
        self.assertEqual(PerturbationForm((3, 4, 0.5), 4).save(), (2, 3, 0.5))
        form = PerturbationForm((3, 5, 0.5), 4)
        self.assertFalse(form.is_valid())
        self.assertEqual(form.error().field, '--perturb.j')


class VerificationSuiteTests(SimpleTestCase):

    def test_exhaustive_enumeration(self):
        sets = boundary_sets(5, cap=20)
        self.assertEqual(len(sets), 10 + 10 + 5)
        self.assertEqual(sets[0].boundary, (0, 1))

    def test_sampling(self):
        first = boundary_sets(30, cap=20, samples=8, seed=3)
        second = boundary_sets(30, cap=20, samples=8, seed=3)
        self.assertEqual([p.boundary for p in first], [p.boundary for p in second])
        self.assertLessEqual(len(first), 8)

    def test_run_suite(self):
        rng = np.random.default_rng(4)
        q = laplacian_from_graph(random_connected_graph(rng, 7, density=0.4, loop_probability=0.4))
        report = run_suite(q, cap=7, workers=2, seed=1)
        self.assertTrue(report['passed'], msg=report['properties'])
        self.assertEqual(report['boundary_sets'], 2 ** 7 - 7 - 2)


class FailingCommand(KronredCommand):

    def __init__(self, error):
        super().__init__(stdout=io.StringIO(), stderr=io.StringIO())
        self.error = error

    def build(self, cfg):
        raise self.error


class ExitCodeTests(SimpleTestCase):

    def returncode(self, error):
        with self.assertRaises(CommandError) as ctx:
            call_command(FailingCommand(error), '--input', 'unused.json')
        return ctx.exception.returncode

    def test_exit_codes(self):
        self.assertEqual(self.returncode(IllConditionedError('singular', estimate=1e20)), 4)
        self.assertEqual(self.returncode(ConnectivityError('split')), 3)
        self.assertEqual(self.returncode(RuntimeError('bug')), 1)
