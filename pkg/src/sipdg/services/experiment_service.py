"""Experiment service: the numerical studies behind the command line.

Each run builds meshes, assembles and solves the SIPDG system and measures
the result:

- ``run_wmp``: extrema of the discrete harmonic function with boundary data
  cos(pi x) cos(pi y), over the domain and over its boundary;
- ``run_convergence``: errors on a sequence of uniform refinements;
- ``run_interior``: like ``run_convergence`` on the L-shape, adding the max
  error on a rectangle away from the re-entrant corner.

Levels are computed one after another, each mesh refined from the previous.
"""
import math
from dataclasses import dataclass
from typing import Callable, List, Optional, Sequence

import numpy as np
import scipy.sparse as sp

from sipdg.config.config import AppConfig
from sipdg.models.common.error_models import ExperimentError
from sipdg.models.domain.assembly import (
    assemble_matrix,
    assemble_rhs,
    discrete_harmonic_residual,
    export_triplets,
)
from sipdg.models.domain.dgspace import MAX_SPACE_DEGREE, DgSpace, build_space
from sipdg.models.domain.fields import Problem, get_problem
from sipdg.models.domain.linsolve import solve
from sipdg.models.domain.mesh import Mesh, build_lshape_mesh, build_square_mesh, mesh_metrics, refine_uniform
from sipdg.models.domain.mesh_io import write_mesh
from sipdg.models.domain.norms import (
    Rectangle,
    boundary_extrema,
    error_report,
    global_extrema,
)
from sipdg.models.domain.rate_estimation import successive_rates
from sipdg.models.domain.reports import ConvergenceRow, ConvergenceTable, ExtremaReport, SolveReport
from sipdg.utils.logging import get_logger, log_duration
from sipdg.utils.validation import validate_output_path

logger = get_logger(__name__)

MIN_LEVELS = 3
MIN_CORNER_DISTANCE = 0.2

MESH_BUILDERS: dict[str, Callable[[int], Mesh]] = {
    "square": build_square_mesh,
    "lshape": build_lshape_mesh,
}


@dataclass
class DiscreteSolution:
    """A solved discrete problem and what it was solved with."""
    space: DgSpace
    matrix: sp.csr_matrix
    coeffs: np.ndarray
    report: SolveReport
    sigma: float


class ExperimentService:
    """Runs the maximum principle and convergence studies."""

    def __init__(self, config: Optional[AppConfig] = None) -> None:
        self.config = config or AppConfig()

    def default_sigma(self, r: int) -> float:
        return self.config.penalty.default_sigma(r)

    def build_mesh(self, domain: str, n: int) -> Mesh:
        """Uniform mesh of a named domain.

        Raises:
            ExperimentError: Unknown domain name
        """
        try:
            builder = MESH_BUILDERS[domain]
        except KeyError:
            raise ExperimentError(f"Unknown domain '{domain}'", {"available": sorted(MESH_BUILDERS)}) from None
        return builder(n)

    def export_mesh(self, domain: str, n: int, path: str) -> Mesh:
        mesh = self.build_mesh(domain, n)
        write_mesh(mesh, path)
        return mesh

    def solve_problem(self, mesh: Mesh, r: int, sigma: float, problem: Problem) -> DiscreteSolution:
        """Assemble and solve the SIPDG system of ``problem`` on ``mesh``."""
        space = build_space(mesh, r)
        matrix = assemble_matrix(space, sigma)
        rhs = assemble_rhs(space, problem.f, problem.g, sigma)
        coeffs, report = solve(matrix, rhs, config=self.config.solver)
        return DiscreteSolution(space=space, matrix=matrix, coeffs=coeffs, report=report, sigma=sigma)

    def run_wmp(self, domain: str, n: int, r: int, sigma: Optional[float] = None,
                export_matrix: Optional[str] = None) -> ExtremaReport:
        """Extrema of the discrete harmonic function with data cos(pi x) cos(pi y).

        Args:
            domain: ``square`` or ``lshape``
            n: Mesh resolution
            r: Polynomial degree
            sigma: Penalty parameter, defaults to the configured sigma_factor * r^2
            export_matrix: Optional path for the system matrix as ``i j value`` triplets

        Returns:
            Domain and boundary extrema plus the discrete harmonic residual
        """
        self._validate_degree(r)
        if export_matrix:
            validate_output_path(export_matrix).raise_if_invalid()
        sigma = self.default_sigma(r) if sigma is None else sigma
        with log_duration(logger, "Maximum principle run", domain=domain, n=n, r=r, sigma=sigma) as extra:
            mesh = self.build_mesh(domain, n)
            solution = self.solve_problem(mesh, r, sigma, get_problem("wmp_boundary"))
            if export_matrix:
                export_triplets(solution.matrix, export_matrix)
            resolution = self.config.sampling.dense_lattice_resolution
            inner = global_extrema(solution.space, solution.coeffs, resolution)
            outer = boundary_extrema(solution.space, solution.coeffs, resolution)
            report = ExtremaReport(
                domain=domain,
                h=mesh_metrics(mesh).h,
                r=r,
                sigma=sigma,
                min_omega=inner.min_omega,
                min_boundary=outer.min_boundary,
                max_omega=inner.max_omega,
                max_boundary=outer.max_boundary,
                harmonic_residual=discrete_harmonic_residual(solution.space, solution.matrix, solution.coeffs),
            )
            extra.update({"gap": report.extrema_gap(), "dofs": solution.space.total_dofs})
        if not report.within_sanity_window():
            logger.warning("Extrema outside the expected magnitude window",
                           context={"min_omega": report.min_omega, "max_omega": report.max_omega})
        return report

    def run_wmp_sigma_sweep(self, domain: str, n: int, r: int, sigmas: Sequence[float]) -> List[ExtremaReport]:
        """``run_wmp`` for each penalty parameter in ``sigmas``."""
        if not sigmas:
            raise ExperimentError("Sigma sweep needs at least one value")
        return [self.run_wmp(domain, n, r, sigma) for sigma in sigmas]

    @staticmethod
    def _validate_degree(r: int) -> None:
        if isinstance(r, bool) or not isinstance(r, int) or not 1 <= r <= MAX_SPACE_DEGREE:
            raise ExperimentError(f"Polynomial degree r must be an integer in [1, {MAX_SPACE_DEGREE}], got {r!r}",
                                  {"r": r})

    def _validate_study(self, r: int, levels: int, problem: Problem) -> None:
        self._validate_degree(r)
        if isinstance(levels, bool) or not isinstance(levels, int) or levels < MIN_LEVELS:
            raise ExperimentError(f"A convergence study needs at least {MIN_LEVELS} levels, got {levels!r}")
        if problem.exact is None:
            raise ExperimentError(f"Problem '{problem.name}' has no exact solution to measure errors against")

    def _study(self, domain: str, r: int, levels: int, sigma: float, problem: Problem, base_n: int,
               subdomain: Optional[Rectangle]) -> ConvergenceTable:
        assert problem.exact is not None
        resolution = self.config.sampling.lattice_resolution
        mesh = self.build_mesh(domain, base_n)
        reports = []
        for level in range(levels):
            if level:
                mesh = refine_uniform(mesh)
            solution = self.solve_problem(mesh, r, sigma, problem)
            report = error_report(solution.space, solution.coeffs, problem.exact, subdomain, resolution)
            logger.info("Refinement level done", context={
                "level": level, "h": report.h, "dofs": report.dofs, "linf": report.linf, "l2": report.l2,
                "broken_h1": report.broken_h1, "linf_boundary": report.linf_boundary,
                "linf_subdomain": report.linf_subdomain,
            })
            reports.append(report)

        hs = [report.h for report in reports]
        rates = successive_rates(hs, [report.linf for report in reports])
        subdomain_rates: List[Optional[float]] = [None] * levels
        if subdomain is not None:
            subdomain_rates = successive_rates(hs, [report.linf_subdomain or 0.0 for report in reports])
        rows = [
            ConvergenceRow(
                level=level,
                h=report.h,
                dofs=report.dofs,
                linf_error=report.linf,
                l2_error=report.l2,
                broken_h1_error=report.broken_h1,
                rate_linf=rates[level],
                linf_boundary_error=report.linf_boundary,
                linf_subdomain=report.linf_subdomain,
                rate_subdomain=subdomain_rates[level],
            )
            for level, report in enumerate(reports)
        ]
        return ConvergenceTable(domain=domain, r=r, sigma=sigma, problem=problem.name, rows=rows)

    def run_convergence(self, domain: str, r: int, levels: int, sigma: Optional[float] = None,
                        problem: str = "manufactured", base_n: Optional[int] = None) -> ConvergenceTable:
        """Errors of the SIPDG solution on ``levels`` uniformly refined meshes.

        Raises:
            ExperimentError: Degree outside [1, 4], fewer than three levels, unknown domain or a problem
                without exact solution
        """
        chosen = get_problem(problem)
        self._validate_study(r, levels, chosen)
        sigma = self.default_sigma(r) if sigma is None else sigma
        base = self.config.experiments.convergence_base_n if base_n is None else base_n
        with log_duration(logger, "Convergence study", domain=domain, r=r, levels=levels, problem=problem):
            return self._study(domain, r, levels, sigma, chosen, base, None)

    def run_interior(self, r: int, levels: int, sigma: Optional[float] = None, rect: Optional[Rectangle] = None,
                     problem: str = "manufactured", base_n: Optional[int] = None) -> ConvergenceTable:
        """Global and interior max errors on the L-shape.

        The rectangle must stay at least 0.2 away from the re-entrant corner.
        """
        chosen = get_problem(problem)
        self._validate_study(r, levels, chosen)
        if rect is None:
            rect = Rectangle(*self.config.experiments.interior_rect)
        distance = rect.distance_to(0.0, 0.0)
        if distance < MIN_CORNER_DISTANCE:
            raise ExperimentError(
                f"Subdomain must keep distance {MIN_CORNER_DISTANCE} from the re-entrant corner, got {distance:.3g}",
                {"rect": [rect.x0, rect.y0, rect.x1, rect.y1]},
            )
        sigma = self.default_sigma(r) if sigma is None else sigma
        base = self.config.experiments.interior_base_n if base_n is None else base_n
        with log_duration(logger, "Interior study", r=r, levels=levels, problem=problem):
            table = self._study("lshape", r, levels, sigma, chosen, base, rect)
        last = table.rows[-1]
        if last.rate_subdomain is not None and last.rate_linf is not None and math.isfinite(last.rate_subdomain):
            logger.info("Interior versus global rate", context={"interior": last.rate_subdomain,
                                                                "global": last.rate_linf})
        return table
