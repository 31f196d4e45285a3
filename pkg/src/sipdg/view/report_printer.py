from typing import Sequence

from sipdg.models.domain.mesh import Mesh
from sipdg.models.domain.reports import ConvergenceTable, ExtremaReport, MeshMetrics
from sipdg.services.response_formatting_service import ResponseFormattingService


def print_mesh_summary(mesh: Mesh, metrics: MeshMetrics, path: str) -> None:
    """
    Prints the size and regularity of a written mesh.

    Args:
        mesh (Mesh): The mesh that was written.
        metrics (MeshMetrics): Its granularity and regularity metrics.
        path (str): The file it was written to.

    Returns:
        None
    """
    print(f"mesh written to {path}")
    print(f"vertices={mesh.n_vertices} triangles={mesh.n_triangles} edges={mesh.n_edges} "
          f"interior_edges={len(mesh.interior_edges)} boundary_edges={len(mesh.boundary_edges)}")
    print(f"h={metrics.h:.6e} max_shape_ratio={metrics.max_shape_ratio:.6f} "
          f"quasi_uniformity={metrics.quasi_uniformity:.6f}")


def print_extrema_reports(reports: Sequence[ExtremaReport], formatter: ResponseFormattingService) -> None:
    """
    Prints the extrema table followed by the domain/boundary gap of every row.

    Args:
        reports (Sequence[ExtremaReport]): One report per mesh or penalty parameter.
        formatter (ResponseFormattingService): Renders the table.

    Returns:
        None
    """
    print(formatter.format_table(reports))
    for report in reports:
        residual = "-" if report.harmonic_residual is None else f"{report.harmonic_residual:.3e}"
        print(f"{report.domain} h={report.h:.4f} sigma={report.sigma:g}: "
              f"extrema gap={report.extrema_gap():.3e} harmonic residual={residual}")


def print_convergence_table(table: ConvergenceTable, formatter: ResponseFormattingService) -> None:
    """
    Prints a convergence table, the boundary errors and the asymptotic rates.

    Args:
        table (ConvergenceTable): The study to print.
        formatter (ResponseFormattingService): Renders the table and the rate summary.

    Returns:
        None
    """
    print(f"domain={table.domain} r={table.r} sigma={table.sigma:g} problem={table.problem}")
    print(formatter.format_table(table))
    boundary = " ".join(f"{row.linf_boundary_error:.3e}" for row in table.rows)
    print(f"linf_boundary: {boundary}")
    for line in formatter.format_summary(table):
        print(line)
