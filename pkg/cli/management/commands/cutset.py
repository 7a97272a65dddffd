from cli.forms import PerturbationForm
from cli.management.base import KronredCommand
from cli.utils import json_response, labels, load_network, partition
from kron.utils import kron_reduce
from power.forms import SigmaForm
from power.utils import cutset, cutset_after_perturbation


class Command(KronredCommand):
    help = "Cutset flow, susceptance and angle difference of a DC network."
    tol_help = "Weights below this count as absent in the reduction (default: KRONRED_TOL_EDGE)."

    def add_arguments(self, parser):
        super().add_arguments(parser)
        parser.add_argument('--boundary', help="1-based boundary nodes.")
        parser.add_argument('--sigma', help="Cut indicator over the sorted boundary, e.g. 1,0.")
        parser.add_argument('--perturb', help="Also report the cut after interior edge change i,j,delta.")

    def build(self, cfg):
        net, data = load_network(cfg)
        p = partition(cfg, net.n)
        sigma = SigmaForm(
            {'sigma': list(cfg.sigma) if cfg.sigma is not None else data.get('sigma')},
            len(p.boundary),
        ).save()
        reduction = kron_reduce(net.b, p, tol_edge=cfg.tol)
        result = cutset(net, p, sigma, reduction=reduction).as_dict()
        result['boundary'] = labels(p)
        if cfg.perturb is not None:
            i, j, delta = PerturbationForm(cfg.perturb, net.n).save()
            result['perturbed'] = cutset_after_perturbation(
                net, p, sigma, i, j, delta, reduction=reduction
            ).as_dict()
        return json_response(result)
