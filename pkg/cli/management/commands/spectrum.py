from cli.management.base import KronredCommand
from cli.utils import json_response, load_laplacian, partition
from spectral.utils import (
    algebraic_connectivity,
    eigenvalues,
    verify_augmented_interlacing,
    verify_interlacing,
    verify_loop_shift_bounds,
)


def _report(report, tol):
    return dict(report.as_dict(), holds=report.holds(tol))


class Command(KronredCommand):
    help = "Eigenvalues, interlacing and loop-shift checks."
    tol_help = "Slack allowed on spectral inequalities (default: KRONRED_TOL_EIG_ABS)."

    def add_arguments(self, parser):
        super().add_arguments(parser)
        parser.add_argument('--boundary', help="Check interlacing against this reduction.")

    def build(self, cfg):
        q = load_laplacian(cfg)
        data = {
            'eigenvalues': eigenvalues(q),
            'class': q.laplacian_class.value,
        }
        if q.is_loopless and q.n > 1:
            data['algebraic_connectivity'] = algebraic_connectivity(q)
        if q.is_strictly_loopy:
            data['augmented'] = _report(verify_augmented_interlacing(q, cfg.tol), cfg.tol)
        if cfg.boundary is not None:
            p = partition(cfg, q.n)
            data['interlacing'] = _report(verify_interlacing(q, p), cfg.tol)
            data['loop_shift'] = _report(verify_loop_shift_bounds(q, p), cfg.tol)
        return json_response(data)
