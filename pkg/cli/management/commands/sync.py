import numpy as np

from kronred.exceptions import InvalidInput
from graphcore.forms import GraphForm
from graphcore.utils import laplacian_from_graph, loopless_part
from kron.utils import kron_reduce, reduced_self_loops
from power.forms import DcNetworkForm
from power.utils import (
    check_uniform_resistance,
    coupling_weights,
    effective_power_inputs,
    sync_reduced,
    sync_resistive_nonreduced,
    sync_spectral_nonreduced,
)
from resistance.utils import effective_resistance
from cli.management.base import KronredCommand
from cli.utils import json_response, labels, partition, read_json


class Command(KronredCommand):
    help = "Evaluate the synchronization conditions on the reduced network."
    tol_help = "Relative slack of the uniform-resistance check (default: KRONRED_TOL_UNIFORM)."

    def add_arguments(self, parser):
        super().add_arguments(parser)
        parser.add_argument('--boundary', help="1-based boundary nodes.")
        parser.add_argument('--omega', help="Effective power inputs of the boundary nodes.")
        parser.add_argument('--v-lower', type=float, default=1.0, help="Lower voltage bound V.")
        parser.add_argument('--v-mag', help="Boundary voltage magnitudes (default: V).")
        parser.add_argument(
            '--resistance-uniform', action='store_true',
            help="Also evaluate the resistive condition under verified uniform resistance.",
        )

    def build(self, cfg):
        data = read_json(cfg)
        has_injections = isinstance(data, dict) and 'p' in data
        saved = (DcNetworkForm if has_injections else GraphForm)(data).save()
        b = saved.b if has_injections else laplacian_from_graph(saved)
        p = partition(cfg, b.n)
        m = len(p.boundary)
        if cfg.omega is not None:
            omega = np.array(cfg.omega)
        elif has_injections:
            omega = effective_power_inputs(saved, p)
        else:
            raise InvalidInput("give --omega or power injections 'p'", field='--omega')

        kr = kron_reduce(b, p)
        loops = reduced_self_loops(b, p, kr)
        v_mag = np.full(m, cfg.v_lower) if cfg.v_mag is None else np.array(cfg.v_mag)
        if np.any(v_mag < cfg.v_lower):
            raise InvalidInput("voltage magnitudes must not be below --v-lower", field='--v-mag')
        pij = coupling_weights(kr.q_red, v_mag)
        assessments = list(sync_reduced(pij, omega))
        assessments.append(sync_spectral_nonreduced(loopless_part(b), omega, cfg.v_lower, loops))
        if cfg.resistance_uniform:
            resistance = effective_resistance(b).restrict(p.boundary)
            off = ~np.eye(m, dtype=bool)
            r_uniform = float(resistance.entries[off].mean())
            check_uniform_resistance(resistance, r_uniform, tol_uniform=cfg.tol)
            assessments.append(sync_resistive_nonreduced(r_uniform, omega, cfg.v_lower, loops))
        return json_response({
            'boundary': labels(p),
            'omega': omega,
            'coupling': pij,
            'assessments': [a.as_dict() for a in assessments],
        })
