"""CLI controller for sipdg."""
import argparse
from typing import NoReturn, Optional, Sequence

from sipdg.config.config import AppArgs
from sipdg.models.common.error_models import ErrorResponse
from sipdg.models.domain.dgspace import MAX_SPACE_DEGREE
from sipdg.models.domain.fields import PROBLEMS
from sipdg.utils.logging import LOG_FORMATS, LOG_LEVELS
from sipdg.utils.version import version_banner

DOMAINS = ("square", "lshape")
EXACT_PROBLEMS = sorted(name for name in PROBLEMS if name != "wmp_boundary")
USAGE_CATEGORY = "USAGE_INVALID"
EXIT_USAGE_ERROR = 2


class OneLineErrorParser(argparse.ArgumentParser):
    """Argument parser reporting usage errors as one ``error: USAGE_INVALID: ...`` line on stderr."""

    def error(self, message: str) -> NoReturn:
        response = ErrorResponse(category=USAGE_CATEGORY, message=f"{self.prog}: {message}")
        self.exit(EXIT_USAGE_ERROR, response.one_line() + "\n")


def _add_common_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument('--config', '-c', type=str, help='Path to the configuration file.')
    parser.add_argument('--quiet', '-q', action='store_true', help='Do not print the result table.')
    parser.add_argument('--log-level', type=str.upper, default='WARN', choices=LOG_LEVELS, help='Set the logging level (DEBUG, INFO, WARN, ERROR). Default: WARN')
    parser.add_argument('--log-output', type=str, default='stdout', help='Set the logging output (stdout or filename). Default: stdout')
    parser.add_argument('--log-format', type=str.lower, default='text', choices=LOG_FORMATS, help='Set the logging format (text or json). Default: text')


def _add_study_arguments(parser: argparse.ArgumentParser, default_levels: int) -> None:
    parser.add_argument('--degree', '-r', type=int, default=1, help=f'Polynomial degree, 1 <= r <= {MAX_SPACE_DEGREE}. Default: 1')  # noqa: E501
    parser.add_argument('--levels', '-l', type=int, default=default_levels, help=f'Number of refinement levels, at least 3. Default: {default_levels}')  # noqa: E501
    parser.add_argument('--sigma', type=float, help='Penalty parameter. Default: sigma_factor * r^2 from the configuration.')  # noqa: E501
    parser.add_argument('--problem', '-p', type=str, default='manufactured', choices=EXACT_PROBLEMS, help='Model problem with known exact solution. Default: manufactured')  # noqa: E501
    parser.add_argument('--csv', type=str, help='Write the convergence table into this CSV file.')
    parser.add_argument('--plot-data', type=str, help='Write log10(h), log10(error) pairs and the fitted slope into this file.')  # noqa: E501


class CLIController:
    def __init__(self) -> None:
        self.parser = self._setup_parser()

    def _setup_parser(self) -> argparse.ArgumentParser:
        parser = OneLineErrorParser(description="SIPDG solver for the Poisson problem on triangular meshes, with maximum principle and convergence experiments.")  # noqa: E501
        parser.add_argument('--version', action='version', version=version_banner(), help='Show the version of the program.')  # noqa: E501
        subparsers = parser.add_subparsers(dest="command", required=True)

        mesh_parser = subparsers.add_parser("mesh", help="Build a uniform mesh and write it to a file")
        mesh_parser.add_argument('--domain', '-d', type=str, default='square', choices=DOMAINS, help='Domain to mesh. Default: square')  # noqa: E501
        mesh_parser.add_argument('--n', '-n', type=int, required=True, help='Subdivisions per unit length.')
        mesh_parser.add_argument('--out', '-o', type=str, required=True, help='Target mesh file.')
        _add_common_arguments(mesh_parser)

        wmp_parser = subparsers.add_parser("wmp", help="Compare extrema of a discrete harmonic function on the domain and its boundary")  # noqa: E501
        wmp_parser.add_argument('--domain', '-d', type=str, default='square', choices=DOMAINS, help='Domain. Default: square')
        wmp_parser.add_argument('--n', '-n', type=int, help='Subdivisions per unit length. Default: every resolution in the configuration.')  # noqa: E501
        wmp_parser.add_argument('--degree', '-r', type=int, default=1, choices=(1, 2), help='Polynomial degree. Default: 1')
        wmp_parser.add_argument('--sigma', type=float, help='Penalty parameter. Default: sigma_factor * r^2 from the configuration.')  # noqa: E501
        wmp_parser.add_argument('--sigma-sweep', type=str, help='Comma separated penalty parameters; one row per value.')
        wmp_parser.add_argument('--csv', type=str, help='Write the extrema into this CSV file.')
        wmp_parser.add_argument('--export-matrix', type=str, help='Write the system matrix as "i j value" lines (single resolution only).')  # noqa: E501
        _add_common_arguments(wmp_parser)

        convergence_parser = subparsers.add_parser("convergence", help="Errors on a sequence of uniformly refined meshes")
        convergence_parser.add_argument('--domain', '-d', type=str, default='square', choices=DOMAINS, help='Domain. Default: square')  # noqa: E501
        _add_study_arguments(convergence_parser, default_levels=5)
        _add_common_arguments(convergence_parser)

        interior_parser = subparsers.add_parser("interior", help="Global and interior max errors on the L-shape")
        interior_parser.add_argument('--rect', type=str, help='Subdomain x0,y0,x1,y1 away from the re-entrant corner. Default: from the configuration.')  # noqa: E501
        _add_study_arguments(interior_parser, default_levels=4)
        _add_common_arguments(interior_parser)
        return parser

    def parse_arguments(self, argv: Optional[Sequence[str]] = None) -> AppArgs:
        parsed_args = self.parser.parse_args(argv)
        return AppArgs(
            command=parsed_args.command,
            config=parsed_args.config,
            domain=getattr(parsed_args, 'domain', 'lshape'),
            n=getattr(parsed_args, 'n', None),
            degree=getattr(parsed_args, 'degree', 1),
            sigma=getattr(parsed_args, 'sigma', None),
            levels=getattr(parsed_args, 'levels', None),
            problem=getattr(parsed_args, 'problem', 'manufactured'),
            rect=getattr(parsed_args, 'rect', None),
            csv=getattr(parsed_args, 'csv', None),
            out=getattr(parsed_args, 'out', None),
            plot_data=getattr(parsed_args, 'plot_data', None),
            sigma_sweep=getattr(parsed_args, 'sigma_sweep', None),
            export_matrix=getattr(parsed_args, 'export_matrix', None),
            quiet=parsed_args.quiet,
            log_level=parsed_args.log_level,
            log_output=parsed_args.log_output,
            log_format=parsed_args.log_format
        )
