"""Configuration service: the one place a run's settings come from.

The command line hands over the ``--config`` path; everything below it
(solver, penalty, sampling, experiment defaults) is read from the
:class:`~sipdg.config.config.AppConfig` this service produces.
"""
import os
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Tuple

from sipdg.config.config import AppConfig, load_config as _read_yaml_config
from sipdg.models.common.error_models import ConfigurationError
from sipdg.utils.logging import get_logger
from sipdg.utils.validation import ValidationResult

logger = get_logger(__name__)

# (check, error code, message template); evaluated in order, first failure wins
_PATH_CHECKS: List[Tuple[Callable[[Path], bool], str, str]] = [
    (Path.exists, "CONFIG_FILE_NOT_FOUND", "Configuration file not found: {path}"),
    (Path.is_file, "CONFIG_PATH_NOT_FILE", "Configuration path is not a file: {path}"),
    (lambda path: os.access(path, os.R_OK), "CONFIG_FILE_NOT_READABLE", "Configuration file is not readable: {path}"),
]


@dataclass
class ConfigLoadResult:
    """Outcome of reading a configuration file.

    Attributes:
        config: The settings, or None when loading failed
        validation_result: Why loading failed, if it did
    """
    config: Optional[AppConfig]
    validation_result: ValidationResult

    @classmethod
    def success(cls, config: AppConfig) -> 'ConfigLoadResult':
        return cls(config=config, validation_result=ValidationResult.success())

    @classmethod
    def failure(cls, error_message: str, error_code: str = 'CONFIG_LOAD_ERROR') -> 'ConfigLoadResult':
        return cls(config=None, validation_result=ValidationResult.failure(error_message, error_code))


class ConfigurationService:
    """Loads, checks and summarizes the solver and experiment settings."""

    def load_config(self, file_path: Optional[str] = None) -> ConfigLoadResult:
        """Read a YAML configuration file, or take the defaults when no path is given.

        Args:
            file_path: Path passed with ``--config``

        Returns:
            ConfigLoadResult holding the settings or the reason they could not be read
        """
        if file_path:
            path_check = self.validate_config_path(file_path)
            if not path_check.is_valid:
                return ConfigLoadResult(config=None, validation_result=path_check)
        try:
            return ConfigLoadResult.success(_read_yaml_config(file_path))
        except ConfigurationError as e:
            return ConfigLoadResult.failure(e.message, e.category)

    def load_or_raise(self, file_path: Optional[str] = None) -> AppConfig:
        """Like :meth:`load_config`, raising instead of returning a failed result.

        Raises:
            ConfigurationError: The file is missing, unreadable or invalid
        """
        result = self.load_config(file_path)
        if result.config is None:
            failure = result.validation_result
            raise ConfigurationError(failure.error_message or "Configuration could not be loaded",
                                     {"error_code": failure.error_code, "path": file_path})
        logger.debug("Effective configuration", context=self.describe(result.config))
        return result.config

    def get_default_config(self) -> AppConfig:
        return AppConfig()

    def validate_config_path(self, file_path: str) -> ValidationResult:
        """Check that ``file_path`` names a readable file.

        Returns:
            ValidationResult with one of the ``CONFIG_*`` error codes on failure
        """
        if not file_path:
            return ValidationResult.failure("Configuration file path is empty", "EMPTY_CONFIG_PATH")
        path = Path(file_path)
        for check, code, message in _PATH_CHECKS:
            if not check(path):
                return ValidationResult.failure(message.format(path=file_path), code, {"path": file_path})
        return ValidationResult.success()

    @staticmethod
    def describe(config: AppConfig) -> Dict[str, Any]:
        """Flatten the settings into ``section.key`` entries for log context."""
        return {
            f"{section}.{key}": value
            for section, values in config.model_dump().items()
            for key, value in values.items()
        }
