import logging

from django.conf import settings
from django.core.management.base import BaseCommand, CommandError

from kronred.exceptions import KronredError
from ..forms import FORMATS, RunConfigForm
from ..utils import write_output

logger = logging.getLogger(__name__)


class KronredCommand(BaseCommand):
    """
    Shared flags, validation and exit codes of the kronred commands.

    Subclasses implement ``build(cfg)`` and return a Response. The body is
    rendered in memory and written only after ``build`` succeeded; library
    errors leave as CommandError carrying their exit code.
    """
    requires_system_checks = []
    formats = ('json',)
    tol_help = "Check tolerance."

    @property
    def name(self):
        return self.__module__.rpartition('.')[2]

    def add_arguments(self, parser):
        parser.add_argument('--input', required=True, help="Input JSON file.")
        parser.add_argument('--output', help="Output file (default: stdout).")
        parser.add_argument('--format', dest='fmt', choices=FORMATS, default='json')
        parser.add_argument('--tol', type=float, help=self.tol_help)
        parser.add_argument('--verbose', action='store_true', help="Log progress at INFO.")

    def execute(self, *args, **options):
        if options.get('verbose') or options.get('verbosity', 1) > 1:
            for name in settings.LOGGING['loggers']:
                logging.getLogger(name).setLevel(logging.INFO)
        try:
            return super().execute(*args, **options)
        except KronredError as e:
            logger.error(f"{self.name} failed: {e}")
            raise CommandError(str(e), returncode=e.exit_code) from e
        except CommandError:
            raise
        except Exception as e:
            logger.exception(f"{self.name} failed unexpectedly")
            raise CommandError(f"unexpected failure: {e}", returncode=1) from e

    def handle(self, *args, **options):
        cfg = RunConfigForm(options, self.name, self.formats).save()
        response = self.build(cfg)
        write_output(cfg, response, self.stdout)
        if response.status:
            raise CommandError(
                f"{self.name} finished with failures", returncode=response.status
            )

    def build(self, cfg):
        raise NotImplementedError
