"""Shared filesystem paths used by the experiment harness."""

from __future__ import annotations

from pathlib import Path

from django.conf import settings as django_settings


def data_root() -> Path:
    return Path(django_settings.NETBANDIT_DATA_ROOT)


def cache_root() -> Path:
    return Path(django_settings.NETBANDIT_CACHE_DIR)


def resolve_dataset_dir(dataset: str) -> Path:
    """Return the directory holding ``dataset``.

    A bare name (``cora``) is looked up beneath ``NETBANDIT_DATA_ROOT``; an
    existing directory path is used as given.
    """

    candidate = Path(dataset).expanduser()
    if candidate.is_dir():
        return candidate
    return data_root() / dataset


def ensure_cache_dir_exists(dataset_name: str) -> Path:
    """Ensure the per-dataset cache directory exists before we attempt to use it."""

    directory = cache_root() / dataset_name
    directory.mkdir(parents=True, exist_ok=True)
    return directory
