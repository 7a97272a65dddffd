from django.conf import settings

from graphcore.forms import serialize_graph
from kron.utils import kron_reduce
from kronred.utils import resolve
from cli.management.base import KronredCommand
from cli.utils import labels, load_laplacian, matrix_response, partition


class Command(KronredCommand):
    help = "Kron-reduce the input onto --boundary."
    formats = ('json', 'tsv')
    tol_help = "Weights below this count as absent in the reduced graph (default: KRONRED_TOL_EDGE)."

    def add_arguments(self, parser):
        super().add_arguments(parser)
        parser.add_argument('--boundary', help="1-based boundary nodes, e.g. 1,2,3.")

    def build(self, cfg):
        q = load_laplacian(cfg)
        kr = kron_reduce(q, partition(cfg, q.n), tol_edge=cfg.tol)
        return matrix_response(cfg, {
            'q_red': kr.q_red.entries,
            'q_ac': kr.q_ac,
            'a_red': serialize_graph(kr.a_red, resolve(cfg.tol, settings.TOL_EDGE)),
            'permutation': labels(kr.partition),
            'class': kr.q_red.laplacian_class.value,
        }, kr.q_red.entries)
