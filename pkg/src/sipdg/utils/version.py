"""Installed package version, as recorded by setuptools-scm at build time."""
from functools import lru_cache
from importlib.metadata import PackageNotFoundError, version as pkg_version

PACKAGE_NAME = "sipdg"


@lru_cache(maxsize=1)
def get_version() -> str:
    """Version of the installed distribution, ``unknown`` in an uninstalled checkout."""
    try:
        return pkg_version(PACKAGE_NAME)
    except PackageNotFoundError:
        return "unknown"


def version_banner() -> str:
    return f"{PACKAGE_NAME} v{get_version()}"
