"""
Django settings for the netbandit project.

The project has no web surface and no database: Django provides the
settings layer, the management command CLI, form validation of experiment
parameters and the test runner.

For the full list of settings and their values, see
https://docs.djangoproject.com/en/5.2/ref/settings/
"""

from pathlib import Path
from django.core.management.utils import get_random_secret_key

import os

# Build paths inside the project like this: BASE_DIR / 'subdir'.
BASE_DIR = Path(__file__).resolve(strict=True).parent.parent


# SECURITY WARNING: keep the secret key used in production secret!
SECRET_KEY = os.environ.get("DJANGO_SECRET_KEY")
if not SECRET_KEY:
    SECRET_KEY = get_random_secret_key()

DEBUG = False

ALLOWED_HOSTS: list[str] = []


def _env_path(name: str, default: Path) -> Path:
    value = (os.environ.get(name) or "").strip()
    if not value:
        return default
    return Path(value).expanduser()


def _env_int(name: str, default: int) -> int:
    value = (os.environ.get(name) or "").strip()
    try:
        return max(1, int(value))
    except ValueError:
        return default


# Experiment environment

# One subdirectory per dataset holding Planetoid-style *.content / *.cites.
NETBANDIT_DATA_ROOT = _env_path("NETBANDIT_DATA_ROOT", BASE_DIR / "data")

# Clusterings and matchings are reused by every design of a dataset.
NETBANDIT_CACHE_DIR = _env_path("NETBANDIT_CACHE_DIR", BASE_DIR / "cache")

NETBANDIT_WORKERS = _env_int("NETBANDIT_WORKERS", 1)

NETBANDIT_LOG_LEVEL = os.environ.get("NETBANDIT_LOG_LEVEL", "INFO").strip().upper() or "INFO"


# Application definition

INSTALLED_APPS = [
    ## Programmer-defined ##
    'netbandit.apps.NetbanditConfig',
]

# Results are files, never rows.
DATABASES: dict = {}


LOGGING = {
    "version": 1,
    "disable_existing_loggers": False,
    "formatters": {
        "plain": {
            "format": "%(asctime)s %(levelname)s %(name)s: %(message)s",
        },
    },
    "handlers": {
        "console": {
            "class": "logging.StreamHandler",
            "formatter": "plain",
        },
    },
    "loggers": {
        "netbandit": {
            "handlers": ["console"],
            "level": NETBANDIT_LOG_LEVEL,
            "propagate": False,
        },
    },
}


# Internationalization
# https://docs.djangoproject.com/en/5.2/topics/i18n/

LANGUAGE_CODE = 'en-us'

TIME_ZONE = 'UTC'

USE_I18N = False

USE_TZ = True
