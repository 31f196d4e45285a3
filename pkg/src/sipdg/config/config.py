'''
The configuration is coming from two directions:
1. arguments passed to the main method (AppArgs object)
2. read from a configuration file (AppConfig object).

Command line values win over the file; the file wins over the defaults below.
'''
from dataclasses import dataclass
from typing import List, Literal, Optional

import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator

from sipdg.models.common.error_models import ConfigurationError
from sipdg.utils.logging import get_logger

logger = get_logger(__name__)


@dataclass
class AppArgs:
    """Parsed command line arguments of one subcommand.

    Options a subcommand does not define stay ``None``.
    """
    command: str
    config: Optional[str] = None
    domain: str = "square"
    n: Optional[int] = None
    degree: int = 1
    sigma: Optional[float] = None
    levels: Optional[int] = None
    problem: str = "manufactured"
    rect: Optional[str] = None
    csv: Optional[str] = None
    out: Optional[str] = None
    plot_data: Optional[str] = None
    sigma_sweep: Optional[str] = None
    export_matrix: Optional[str] = None
    quiet: bool = False
    log_level: str = "WARN"
    log_output: str = "stdout"
    log_format: str = "text"


class SolverConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    method: Literal["direct", "cg"] = "direct"
    direct_tol: float = Field(default=1e-12, gt=0)
    iterative_tol: float = Field(default=1e-10, gt=0)
    cg_max_iter_factor: int = Field(default=20, ge=1)  # cap = factor * dofs
    fallback_to_cg: bool = True
    refinement_steps: int = Field(default=3, ge=0)


class PenaltyConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    sigma_factor: float = Field(default=10.0, gt=0)

    def default_sigma(self, r: int) -> float:
        """sigma = sigma_factor * r^2."""
        return self.sigma_factor * r * r


class SamplingConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    lattice_resolution: int = Field(default=20, ge=1)
    dense_lattice_resolution: int = Field(default=40, ge=1)


class ExperimentConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    wmp_square_n: List[int] = Field(default_factory=lambda: [9, 18])
    wmp_lshape_n: List[int] = Field(default_factory=lambda: [9, 18])
    convergence_base_n: int = Field(default=4, ge=1)
    interior_base_n: int = Field(default=2, ge=1)
    interior_rect: List[float] = Field(default_factory=lambda: [-0.9, 0.3, -0.3, 0.9])
    csv_float_format: str = "%.12e"

    @field_validator("interior_rect")
    @classmethod
    def _four_numbers(cls, value: List[float]) -> List[float]:
        if len(value) != 4:
            raise ValueError("interior_rect needs exactly four numbers x0, y0, x1, y1")
        return value


class AppConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    solver: SolverConfig = Field(default_factory=SolverConfig)
    penalty: PenaltyConfig = Field(default_factory=PenaltyConfig)
    sampling: SamplingConfig = Field(default_factory=SamplingConfig)
    experiments: ExperimentConfig = Field(default_factory=ExperimentConfig)


class AppContext:
    """
    AppContext encapsulates the application configuration and arguments.

    Attributes:
        config (AppConfig): The application configuration.
        args (AppArgs): The application arguments.
    """
    def __init__(self, config: AppConfig, args: AppArgs):
        self.config: AppConfig = config
        self.args: AppArgs = args

    def sigma_for(self, r: int) -> float:
        """The ``--sigma`` flag if given, else the configured default for degree r."""
        if self.args.sigma is not None:
            return float(self.args.sigma)
        return self.config.penalty.default_sigma(r)


def load_config(config_path: str | None) -> AppConfig:
    """
    Load the application configuration from a YAML file.

    :param config_path: Path to the YAML configuration file, or None for defaults.
    :return: An AppConfig object.
    :raises ConfigurationError: Missing file, invalid YAML or schema violation.
    """
    if not config_path:
        logger.warning("No configuration file provided, using default settings")
        return AppConfig()
    try:
        with open(config_path, 'r', encoding='utf-8') as file:
            config_data = yaml.safe_load(file) or {}
        if not isinstance(config_data, dict):
            raise ConfigurationError(f"Configuration file '{config_path}' must contain a mapping")
        return AppConfig(**config_data)
    except yaml.YAMLError as e:
        logger.error(f"Configuration file '{config_path}' is not a valid YAML: {e}")
        raise ConfigurationError(f"Configuration file '{config_path}' is not a valid YAML: {e}") from e
    except ValidationError as e:
        logger.error(f"Configuration validation error: {e}")
        raise ConfigurationError(f"Configuration validation error: {e}") from e
    except FileNotFoundError as e:
        logger.error(f"Configuration file '{config_path}' not found")
        raise ConfigurationError(f"Configuration file '{config_path}' not found") from e
