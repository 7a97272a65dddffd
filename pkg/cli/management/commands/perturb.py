from cli.forms import PerturbationForm
from cli.management.base import KronredCommand
from cli.utils import labels, load_laplacian, matrix_response, partition
from kron.utils import perturb_interior_edge
from resistance.utils import perturbed_resistance


class Command(KronredCommand):
    help = "Rank-one update of the reduction for an interior edge change."
    formats = ('json', 'tsv')
    tol_help = "Weights below this count as absent (default: KRONRED_TOL_EDGE)."

    def add_arguments(self, parser):
        super().add_arguments(parser)
        parser.add_argument('--boundary', help="1-based boundary nodes.")
        parser.add_argument('--perturb', help="Interior edge change i,j,delta (1-based).")

    def build(self, cfg):
        q = load_laplacian(cfg)
        p = partition(cfg, q.n)
        i, j, delta = PerturbationForm(cfg.perturb, q.n).save()
        q_new, detail = perturb_interior_edge(q, p, i, j, delta, tol_edge=cfg.tol)
        r = perturbed_resistance(q, p, i, j, delta, tol_edge=cfg.tol)
        return matrix_response(cfg, {
            'q_red': q_new.entries,
            'permutation': labels(p),
            'r_int': detail.r_int,
            'denominator': detail.denominator,
            'resistance': r.entries,
        }, q_new.entries)
