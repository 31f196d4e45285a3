"""Service container for one command line run.

Services are built on first use and then reused; the experiment and
formatting services are wired to the run's :class:`AppConfig`.
"""
from typing import Any, Callable, Dict, Optional, Type, TypeVar, cast

from sipdg.config.config import AppConfig
from sipdg.services.configuration_service import ConfigurationService
from sipdg.services.experiment_service import ExperimentService
from sipdg.services.response_formatting_service import ResponseFormattingService

T = TypeVar('T')


class ServiceContainer:
    """Lazily built, cached services sharing one configuration."""

    def __init__(self, config: Optional[AppConfig] = None):
        """
        Args:
            config: Settings of this run; the defaults are used when omitted
        """
        self._config: Optional[AppConfig] = config
        self._services: Dict[Type[Any], Any] = {}
        self._factories: Dict[Type[Any], Callable[[], Any]] = {
            ConfigurationService: ConfigurationService,
            ExperimentService: lambda: ExperimentService(config=self.config),
            ResponseFormattingService: lambda: ResponseFormattingService(
                float_format=self.config.experiments.csv_float_format
            ),
        }

    @property
    def config(self) -> AppConfig:
        if self._config is None:
            self._config = self.get_service(ConfigurationService).get_default_config()
        return self._config

    def get_service(self, service_class: Type[T]) -> T:
        """Return the cached instance of ``service_class``, building it on first request.

        Raises:
            ValueError: No factory is registered for ``service_class``
        """
        if service_class not in self._services:
            factory = self._factories.get(service_class)
            if factory is None:
                raise ValueError(f"Unknown service class: {service_class}")
            self._services[service_class] = factory()
        return cast(T, self._services[service_class])

    @property
    def configuration_service(self) -> ConfigurationService:
        return self.get_service(ConfigurationService)

    @property
    def experiment_service(self) -> ExperimentService:
        return self.get_service(ExperimentService)

    @property
    def response_formatting_service(self) -> ResponseFormattingService:
        """Formatter using the configured CSV float format."""
        return self.get_service(ResponseFormattingService)


def create_service_container(config: Optional[AppConfig] = None) -> ServiceContainer:
    return ServiceContainer(config)
