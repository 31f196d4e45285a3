"""Solution of the SIPDG linear system A u = b.

The direct path factorizes A with SuperLU in symmetric mode: a fixed
fill-reducing ordering of A + A^T and diagonal pivots only. For a symmetric
matrix that factorization is an LDL^T factorization in disguise, so A is
positive definite exactly when every diagonal entry of U is positive. A
non-positive pivot is reported as :class:`IndefiniteSystemError`, which is
what a penalty parameter below the coercivity threshold looks like.

The iterative path is Jacobi-preconditioned conjugate gradients.
"""
import time
from typing import Literal, Optional

import numpy as np
import scipy.sparse as sp
from numpy.typing import ArrayLike, NDArray
from scipy.sparse.linalg import LinearOperator, cg, splu

from sipdg.config.config import SolverConfig
from sipdg.models.common.error_models import IndefiniteSystemError, SolverToleranceError
from sipdg.models.domain.reports import SolveReport
from sipdg.utils.logging import get_logger

logger = get_logger(__name__)

FloatArray = NDArray[np.float64]


def _relative_residual(matrix: sp.spmatrix, x: FloatArray, b: FloatArray, b_norm: float) -> float:
    return float(np.linalg.norm(matrix @ x - b) / b_norm)


def _solve_direct(
    matrix: sp.csc_matrix, b: FloatArray, b_norm: float, tol: float, refinement_steps: int
) -> tuple[FloatArray, float]:
    try:
        lu = splu(
            matrix,
            permc_spec="MMD_AT_PLUS_A",
            diag_pivot_thresh=0.0,
            options={"SymmetricMode": True},
        )
    except RuntimeError as e:
        raise IndefiniteSystemError(f"Factorization failed, system is singular: {e}") from e

    pivots = lu.U.diagonal()
    if not np.array_equal(lu.perm_r, lu.perm_c) or np.any(pivots <= 0.0):
        index = int(np.argmin(pivots))
        raise IndefiniteSystemError(
            "System matrix is not positive definite; the penalty parameter is below the coercivity threshold",
            {"min_pivot": float(pivots[index]), "pivot_index": index},
        )

    x = lu.solve(b)
    residual = _relative_residual(matrix, x, b, b_norm)
    steps = 0
    while residual > tol and steps < refinement_steps:
        x = x + lu.solve(b - matrix @ x)
        residual = _relative_residual(matrix, x, b, b_norm)
        steps += 1
    if steps:
        logger.debug("Iterative refinement", context={"steps": steps, "residual": residual})
    return x, residual


def _solve_cg(
    matrix: sp.csr_matrix, b: FloatArray, b_norm: float, tol: float, max_iter: int
) -> tuple[FloatArray, int, float]:
    diagonal = matrix.diagonal()
    if np.any(diagonal <= 0.0):
        raise IndefiniteSystemError("Non-positive diagonal entry, the system cannot be positive definite")
    inverse_diagonal = 1.0 / diagonal
    preconditioner = LinearOperator(matrix.shape, matvec=lambda v: inverse_diagonal * v, dtype=float)

    iterations = 0

    def count(_: FloatArray) -> None:
        nonlocal iterations
        iterations += 1

    # the true residual, not the recurrence one, must end up <= tol
    x, info = cg(matrix, b, rtol=0.5 * tol, atol=0.0, maxiter=max_iter, M=preconditioner, callback=count)
    if info != 0:
        raise IndefiniteSystemError(
            "Conjugate gradients did not converge within the iteration cap; "
            "the penalty parameter is probably below the coercivity threshold",
            {"iterations": iterations, "max_iter": max_iter},
        )
    return np.asarray(x, dtype=float), iterations, _relative_residual(matrix, x, b, b_norm)


def solve(
    matrix: sp.spmatrix,
    b: ArrayLike,
    tol: Optional[float] = None,
    method: Optional[Literal["direct", "cg"]] = None,
    config: Optional[SolverConfig] = None,
) -> tuple[FloatArray, SolveReport]:
    """Solve A u = b for a symmetric positive definite A.

    Args:
        matrix: Square sparse system matrix
        b: Right-hand side
        tol: Relative residual tolerance; defaults to the configured tolerance of the chosen path
        method: ``direct`` or ``cg``; defaults to the configured method
        config: Solver settings

    Returns:
        The solution and a report whose relative residual is <= tol

    Raises:
        IndefiniteSystemError: Non-positive pivot or conjugate gradient failure
        SolverToleranceError: The residual stays above tol
    """
    settings = config or SolverConfig()
    chosen = method or settings.method
    rhs = np.asarray(b, dtype=float)
    n = matrix.shape[0]
    if matrix.shape != (n, n) or rhs.shape != (n,):
        raise ValueError(f"Incompatible shapes: matrix {matrix.shape}, right-hand side {rhs.shape}")

    start = time.perf_counter()
    b_norm = float(np.linalg.norm(rhs))
    if b_norm == 0.0:
        report = SolveReport(method="direct" if chosen == "direct" else "iterative",
                             iterations=0, relative_residual=0.0, wall_time=time.perf_counter() - start)
        return np.zeros(n, dtype=float), report

    max_iter = settings.cg_max_iter_factor * n
    if chosen == "direct":
        direct_tol = settings.direct_tol if tol is None else tol
        x, residual = _solve_direct(sp.csc_matrix(matrix), rhs, b_norm, direct_tol, settings.refinement_steps)
        if residual <= direct_tol:
            report = SolveReport(method="direct", iterations=0, relative_residual=residual,
                                 wall_time=time.perf_counter() - start)
            logger.info("Solved linear system", context={"method": "direct", "dofs": n, "residual": residual,
                                                         "seconds": round(report.wall_time, 4)})
            return x, report
        if not settings.fallback_to_cg:
            raise SolverToleranceError(
                f"Direct solve reached relative residual {residual:.3e} above tolerance {direct_tol:.3e}",
                {"residual": residual, "tol": direct_tol},
            )
        logger.warning("Direct residual above tolerance, falling back to conjugate gradients",
                       context={"residual": residual, "tol": direct_tol})

    cg_tol = settings.iterative_tol if tol is None or chosen == "direct" else tol
    x, iterations, residual = _solve_cg(sp.csr_matrix(matrix), rhs, b_norm, cg_tol, max_iter)
    if residual > cg_tol:
        raise SolverToleranceError(
            f"Conjugate gradients reached relative residual {residual:.3e} above tolerance {cg_tol:.3e}",
            {"residual": residual, "tol": cg_tol},
        )
    report = SolveReport(method="iterative", iterations=iterations, relative_residual=residual,
                         wall_time=time.perf_counter() - start)
    logger.info("Solved linear system", context={"method": "cg", "dofs": n, "iterations": iterations,
                                                 "residual": residual, "seconds": round(report.wall_time, 4)})
    return x, report
