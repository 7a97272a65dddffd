"""
Django settings for kronred.

Every tunable is read through python-decouple, so values can come from the
environment or from a ``.env`` file next to ``manage.py``. Library code reads
them through ``django.conf.settings``.
"""

from pathlib import Path
from decouple import config


# ========================
# Core Configuration
# ========================
BASE_DIR = Path(__file__).resolve().parent.parent

SECRET_KEY = config('SECRET_KEY', default='kronred-local')

DEBUG = config('DEBUG', default=False, cast=bool)


# ========================
# Applications
# ========================
INSTALLED_APPS = [
    'graphcore',
    'kron',
    'resistance',
    'spectral',
    'power',
    'cli',
]

# No persistence: inputs and results are files.
DATABASES = {}

USE_I18N = False


# ========================
# Tolerances
# ========================
# Construction exactness: symmetry and row-sum validation.
TOL_SYM = config('KRONRED_TOL_SYM', default=1e-12, cast=float)

# Topology decisions ("is there an edge / a self-loop") after Schur complements.
TOL_EDGE = config('KRONRED_TOL_EDGE', default=1e-9, cast=float)

# Max-norm slack for every algebraic identity check.
TOL_QUOT = config('KRONRED_TOL', default=1e-9, cast=float)

# Relative cutoff for treating an eigenvalue as zero in pseudo-inverses.
TOL_EIG = config('KRONRED_TOL_EIG', default=1e-10, cast=float)

# Absolute slack on spectral inequalities.
TOL_EIG_ABS = config('KRONRED_TOL_EIG_ABS', default=1e-8, cast=float)

# Interior blocks with a larger condition estimate are refused.
COND_MAX = config('KRONRED_COND_MAX', default=1e12, cast=float)

# Relative slack of the uniform-resistance hypothesis.
TOL_UNIFORM = config('KRONRED_TOL_UNIFORM', default=1e-6, cast=float)


# ========================
# Verification Suite
# ========================
VERIFY_CAP = config('KRONRED_VERIFY_CAP', default=20, cast=int)
VERIFY_SAMPLES = config('KRONRED_VERIFY_SAMPLES', default=64, cast=int)
VERIFY_WORKERS = config('KRONRED_VERIFY_WORKERS', default=4, cast=int)
DEFAULT_SEED = config('KRONRED_SEED', default=42, cast=int)


# ========================
# Output
# ========================
# 17 significant digits round-trip every double.
FLOAT_DIGITS = 17


# ========================
# Logging
# ========================
LOG_LEVEL = config('KRONRED_LOG_LEVEL', default='WARNING')

LOGGING = {
    'version': 1,
    'disable_existing_loggers': False,
    'formatters': {
        'simple': {
            'format': '%(levelname)s %(name)s: %(message)s',
        },
    },
    'handlers': {
        'console': {
            'class': 'logging.StreamHandler',
            'stream': 'ext://sys.stderr',
            'formatter': 'simple',
        },
    },
    'loggers': {
        app: {
            'handlers': ['console'],
            'level': LOG_LEVEL,
            'propagate': False,
        }
        for app in (
            'kronred', 'graphcore', 'kron', 'resistance',
            'spectral', 'power', 'cli',
        )
    },
}
