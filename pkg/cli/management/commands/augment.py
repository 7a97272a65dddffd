from django.conf import settings

from graphcore.forms import serialize_graph
from graphcore.utils import augment, graph_from_laplacian
from kronred.utils import resolve
from cli.management.base import KronredCommand
from cli.utils import load_laplacian, matrix_response


class Command(KronredCommand):
    help = "Attach the grounded node that absorbs every self-loop."
    formats = ('json', 'tsv')
    tol_help = "Weights below this are left out of the graph (default: KRONRED_TOL_EDGE)."

    def add_arguments(self, parser):
        super().add_arguments(parser)
        parser.add_argument('--ground', action='store_true', help="Report the ground node index.")

    def build(self, cfg):
        q_hat = augment(load_laplacian(cfg))
        data = serialize_graph(
            graph_from_laplacian(q_hat), resolve(cfg.tol, settings.TOL_EDGE)
        )
        if cfg.ground:
            data['ground'] = q_hat.n
        return matrix_response(cfg, data, q_hat.entries)
