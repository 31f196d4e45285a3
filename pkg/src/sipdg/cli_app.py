"""CLI application entrypoint for sipdg."""
import sys
import time
from dataclasses import asdict
from typing import Callable, Dict, List, Optional, Sequence

from sipdg.config.config import AppArgs, AppContext
from sipdg.controllers.cli_controller import CLIController
from sipdg.models.common.error_models import ErrorResponse, ExperimentError, SipdgError
from sipdg.models.common.run_metadata import RunMetadata
from sipdg.models.domain.mesh import mesh_metrics
from sipdg.models.domain.norms import Rectangle
from sipdg.models.domain.reports import ConvergenceTable, ExtremaReport
from sipdg.services.configuration_service import ConfigurationService
from sipdg.services.service_container import ServiceContainer, create_service_container
from sipdg.utils.logging import configure_logging, get_logger
from sipdg.utils.validation import ValidationError
from sipdg.utils.version import get_version
from sipdg.view.report_printer import print_convergence_table, print_extrema_reports, print_mesh_summary

logger = get_logger(__name__)

EXIT_IO_ERROR = 1
EXIT_DOMAIN_ERROR = 2

_LOGGING_ARGS = ("log_level", "log_output", "log_format", "quiet")


def parse_sigmas(text: str) -> List[float]:
    """Parse the ``--sigma-sweep`` list ``s1,s2,...``."""
    try:
        sigmas = [float(part) for part in text.split(",") if part.strip()]
    except ValueError as e:
        raise ExperimentError(f"Sigma sweep must be a comma separated list of numbers, got '{text}'") from e
    if not sigmas:
        raise ExperimentError("Sigma sweep needs at least one value")
    return sigmas


def run_mesh(context: AppContext, container: ServiceContainer) -> None:
    args = context.args
    assert args.n is not None and args.out is not None
    mesh = container.experiment_service.export_mesh(args.domain, args.n, args.out)
    if not args.quiet:
        print_mesh_summary(mesh, mesh_metrics(mesh), args.out)


def run_wmp(context: AppContext, container: ServiceContainer) -> None:
    args = context.args
    service = container.experiment_service
    configured = (context.config.experiments.wmp_square_n if args.domain == "square"
                  else context.config.experiments.wmp_lshape_n)
    reports: List[ExtremaReport]
    if args.sigma_sweep:
        n = args.n if args.n is not None else configured[0]
        reports = service.run_wmp_sigma_sweep(args.domain, n, args.degree, parse_sigmas(args.sigma_sweep))
    else:
        resolutions = [args.n] if args.n is not None else list(configured)
        if args.export_matrix and len(resolutions) > 1:
            raise ExperimentError("--export-matrix needs a single resolution, pass --n")
        sigma = context.sigma_for(args.degree)
        reports = [service.run_wmp(args.domain, n, args.degree, sigma, args.export_matrix) for n in resolutions]

    formatter = container.response_formatting_service
    if args.csv:
        formatter.emit_csv(reports, args.csv)
    if not args.quiet:
        print_extrema_reports(reports, formatter)


def _emit_study(context: AppContext, container: ServiceContainer, table: ConvergenceTable, plot_column: str) -> None:
    args = context.args
    formatter = container.response_formatting_service
    if args.csv:
        formatter.emit_csv(table, args.csv)
    if args.plot_data:
        formatter.emit_plotdata(table, args.plot_data, plot_column)
    if not args.quiet:
        print_convergence_table(table, formatter)


def run_convergence(context: AppContext, container: ServiceContainer) -> None:
    args = context.args
    assert args.levels is not None
    table = container.experiment_service.run_convergence(
        domain=args.domain,
        r=args.degree,
        levels=args.levels,
        sigma=context.sigma_for(args.degree),
        problem=args.problem,
    )
    _emit_study(context, container, table, "linf_error")


def run_interior(context: AppContext, container: ServiceContainer) -> None:
    args = context.args
    assert args.levels is not None
    table = container.experiment_service.run_interior(
        r=args.degree,
        levels=args.levels,
        sigma=context.sigma_for(args.degree),
        rect=Rectangle.parse(args.rect) if args.rect else None,
        problem=args.problem,
    )
    _emit_study(context, container, table, "linf_subdomain")


COMMANDS: Dict[str, Callable[[AppContext, ServiceContainer], None]] = {
    "mesh": run_mesh,
    "wmp": run_wmp,
    "convergence": run_convergence,
    "interior": run_interior,
}


def execute(args: AppArgs) -> RunMetadata:
    """Load the configuration, run one subcommand and describe the run.

    Raises:
        SipdgError: Invalid input or a numerical failure
        ValidationError: An output path cannot be written
        OSError: Reading or writing a file failed
    """
    start = time.perf_counter()
    config = ConfigurationService().load_or_raise(args.config)
    container = create_service_container(config)
    logger.info("Services initialized via factory")
    COMMANDS[args.command](AppContext(config, args), container)
    parameters = {key: value for key, value in asdict(args).items() if key not in _LOGGING_ARGS}
    return RunMetadata(command=args.command, parameters=parameters, version=get_version(),
                       wall_time=time.perf_counter() - start)


def _fail(error: BaseException, exit_code: int) -> None:
    response = ErrorResponse.from_exception(error)
    logger.error(f"Command failed: {response.message}", context={"category": response.category})
    print(response.one_line(), file=sys.stderr)
    sys.exit(exit_code)


def main(argv: Optional[Sequence[str]] = None) -> None:
    """Main CLI entrypoint using service factory and dependency injection."""
    controller = CLIController()
    args = controller.parse_arguments(argv)

    configure_logging(log_level=args.log_level, log_output=args.log_output, log_format=args.log_format)
    logger.info("Starting CLI application")
    logger.debug("CLI arguments parsed", context={"command": args.command, "config": args.config})

    try:
        metadata = execute(args)
    except SipdgError as e:
        _fail(e, EXIT_DOMAIN_ERROR)
    except (ValidationError, OSError) as e:
        _fail(e, EXIT_IO_ERROR)
    else:
        logger.info("Command finished", context=metadata.model_dump())


if __name__ == "__main__":
    main()
