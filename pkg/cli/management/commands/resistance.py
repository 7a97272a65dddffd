from cli.management.base import KronredCommand
from cli.utils import load_laplacian, matrix_response, partition
from resistance.utils import effective_resistance


class Command(KronredCommand):
    help = "Effective resistance matrix, optionally restricted to --boundary."
    formats = ('json', 'tsv')
    tol_help = "Relative cutoff for zero eigenvalues in the pseudo-inverse (default: KRONRED_TOL_EIG)."

    def add_arguments(self, parser):
        super().add_arguments(parser)
        parser.add_argument('--boundary', help="Report only these 1-based nodes.")

    def build(self, cfg):
        q = load_laplacian(cfg)
        r = effective_resistance(q, tol_eig=cfg.tol)
        if cfg.boundary is not None:
            r = r.restrict(partition(cfg, q.n).boundary)
        return matrix_response(
            cfg, {'resistance': r.entries, 'labels': [k + 1 for k in r.labels]}, r.entries
        )
