"""Configuration models and the configuration file shipped with the package.

``config.yml.default`` documents every key with its default value; loading
it yields the same settings as running without ``--config``.
"""
from importlib.resources import files

DEFAULT_CONFIG_PATH = str(files(__name__) / "config.yml.default")
