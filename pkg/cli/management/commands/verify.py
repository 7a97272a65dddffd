import argparse

from django.conf import settings

from kronred.exceptions import InvariantBreach
from cli.management.base import KronredCommand
from cli.utils import json_response, load_laplacian
from cli.verification import run_suite


class Command(KronredCommand):
    help = "Run the property suite over boundary sets of the input."
    tol_help = "Max-norm slack of every identity check (default: KRONRED_TOL)."

    def add_arguments(self, parser):
        super().add_arguments(parser)
        parser.add_argument('--seed', type=int, default=settings.DEFAULT_SEED)
        parser.add_argument('--cap', type=int, help="Largest n with exhaustive boundary enumeration.")
        parser.add_argument('--workers', type=int, help="Thread pool size.")
        parser.add_argument('--debug-corrupt', action='store_true', help=argparse.SUPPRESS)

    def build(self, cfg):
        q = load_laplacian(cfg)
        report = run_suite(
            q,
            cap=cfg.cap,
            workers=cfg.workers,
            seed=cfg.seed,
            tol=cfg.tol,
            corrupt=cfg.debug_corrupt,
        )
        return json_response(report, 0 if report['passed'] else InvariantBreach.exit_code)
