"""Result models produced by the solver, the norms and the experiments.

These are plain pydantic records: everything numerical has already happened
by the time one is built, and the response formatting service turns them
into CSV rows or console tables.
"""
import math
from typing import Literal, Optional

from pydantic import BaseModel, ConfigDict, Field

from sipdg.models.domain.rate_estimation import asymptotic_rate


class MeshMetrics(BaseModel):
    """Size and regularity metrics of a triangulation.

    Attributes:
        h (float): Granularity, the largest circumscribed-circle diameter.
        max_shape_ratio (float): Largest h_K / rho_K over all elements.
        quasi_uniformity (float): Largest h / h_K over all elements.
    """
    model_config = ConfigDict(frozen=True, allow_inf_nan=False)

    h: float = Field(gt=0)
    max_shape_ratio: float = Field(gt=0)
    quasi_uniformity: float = Field(gt=0)


class SolveReport(BaseModel):
    """Outcome of one linear solve."""
    model_config = ConfigDict(frozen=True)

    method: Literal["direct", "iterative"]
    iterations: int = Field(ge=0, description="0 for the direct path")
    relative_residual: float = Field(ge=0, description="||Au - b|| / ||b||")
    wall_time: float = Field(ge=0, description="Seconds spent in the solve")


class BoundaryExtrema(BaseModel):
    model_config = ConfigDict(frozen=True, allow_inf_nan=False)

    min_boundary: float
    max_boundary: float


class GlobalExtrema(BaseModel):
    model_config = ConfigDict(frozen=True, allow_inf_nan=False)

    min_omega: float
    max_omega: float


class ErrorReport(BaseModel):
    """All error measures of one discrete solution against an exact one.

    ``broken_h1`` is the broken H1 seminorm; ``v2`` is the full V^2 norm
    including edge jump and mean-gradient terms, so ``l2 <= v2`` always holds.
    """
    model_config = ConfigDict(frozen=True, allow_inf_nan=False)

    l2: float = Field(ge=0)
    broken_h1: float = Field(ge=0)
    v2: float = Field(ge=0)
    linf: float = Field(ge=0)
    linf_boundary: float = Field(ge=0)
    linf_subdomain: Optional[float] = Field(default=None, ge=0)
    h: float = Field(gt=0)
    dofs: int = Field(gt=0)


class ExtremaReport(BaseModel):
    """Extrema of a discrete harmonic function over the domain and its boundary."""
    model_config = ConfigDict(frozen=True, allow_inf_nan=False)

    domain: str
    h: float = Field(gt=0)
    r: int = Field(ge=1)
    sigma: float = Field(gt=0)
    min_omega: float
    min_boundary: float
    max_omega: float
    max_boundary: float
    harmonic_residual: Optional[float] = Field(
        default=None,
        description="max |a(u_h, chi)| over test functions supported away from the boundary"
    )

    def extrema_gap(self) -> float:
        """Largest disagreement between the domain and the boundary extrema."""
        return max(abs(self.min_omega - self.min_boundary), abs(self.max_omega - self.max_boundary))

    def within_sanity_window(self, low: float = 0.5, high: float = 2.0) -> bool:
        return all(low <= abs(value) <= high for value in (self.min_omega, self.max_omega))


class ConvergenceRow(BaseModel):
    """One refinement level of a convergence study."""
    model_config = ConfigDict(frozen=True)

    level: int = Field(ge=0)
    h: float = Field(gt=0)
    dofs: int = Field(gt=0)
    linf_error: float = Field(ge=0)
    l2_error: float = Field(ge=0)
    broken_h1_error: float = Field(ge=0)
    rate_linf: Optional[float] = None
    linf_boundary_error: float = Field(ge=0)
    linf_subdomain: Optional[float] = Field(default=None, ge=0)
    rate_subdomain: Optional[float] = None


class ConvergenceTable(BaseModel):
    """Errors on a sequence of uniformly refined meshes."""
    model_config = ConfigDict(frozen=True)

    domain: str
    r: int = Field(ge=1)
    sigma: float = Field(gt=0)
    problem: str
    rows: list[ConvergenceRow] = Field(default_factory=list)

    def column(self, name: str) -> list[float]:
        """Values of an error column (``linf_error``, ``l2_error``, ...) in level order."""
        values = [getattr(row, name) for row in self.rows]
        if any(value is None for value in values):
            raise ValueError(f"Column '{name}' is not populated on every row")
        return [float(value) for value in values]

    def asymptotic_rate(self, name: str = "linf_error", last: int = 3) -> float:
        """Least-squares slope of log(error) against log(h) over the last rows."""
        return asymptotic_rate([row.h for row in self.rows], self.column(name), last=last)

    def has_finite_rates(self) -> bool:
        return all(row.rate_linf is not None and math.isfinite(row.rate_linf) for row in self.rows[1:])
