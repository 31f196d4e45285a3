"""Error types and the machine-readable error response.

Every failure raised by the numerical layer derives from :class:`SipdgError`
and carries a stable ``category`` string. The command line prints that
category on a single line so scripted runs can branch on it.
"""
from typing import Any, Dict, Optional

from pydantic import BaseModel, Field


class SipdgError(Exception):
    """Base class of all sipdg failures."""

    category = "SIPDG_ERROR"

    def __init__(self, message: str, details: Optional[Dict[str, Any]] = None) -> None:
        super().__init__(message)
        self.message = message
        self.details = details or {}


class MeshValidationError(SipdgError):
    """Degenerate, clockwise or otherwise malformed triangulation."""

    category = "MESH_INVALID"


class NonConformingMeshError(MeshValidationError):
    """A vertex pair is shared by three or more triangles."""

    category = "MESH_NONCONFORMING"


class QuadratureDegreeError(SipdgError):
    category = "QUADRATURE_UNSUPPORTED"


class BasisDegreeError(SipdgError):
    category = "DEGREE_INVALID"


class PointLocationError(SipdgError):
    """Evaluation point outside the closure of the requested element."""

    category = "POINT_OUTSIDE_ELEMENT"


class PenaltyParameterError(SipdgError):
    category = "PENALTY_INVALID"


class IndefiniteSystemError(SipdgError):
    """The system matrix is not positive definite.

    This is what a penalty parameter below the coercivity threshold looks like
    to the user: a non-positive pivot in the factorization, or conjugate
    gradients hitting the iteration cap.
    """

    category = "PENALTY_TOO_SMALL"


class SolverToleranceError(SipdgError):
    category = "SOLVER_TOLERANCE"


class NormParameterError(SipdgError):
    category = "NORM_PARAMETER_INVALID"


class SubdomainError(SipdgError):
    category = "SUBDOMAIN_EMPTY"


class ExperimentError(SipdgError):
    category = "EXPERIMENT_INVALID"


class ConfigurationError(SipdgError):
    category = "CONFIG_INVALID"


class ErrorResponse(BaseModel):
    """Machine-readable description of a failed command.

    Attributes:
        category: Stable error category (e.g. ``PENALTY_TOO_SMALL``)
        message: Human-readable error description
        details: Optional additional context
    """
    category: str = Field(
        description="Stable error category",
        examples=["MESH_INVALID", "PENALTY_TOO_SMALL", "IO_ERROR"]
    )
    message: str = Field(description="Human-readable error message")
    details: Optional[Dict[str, Any]] = Field(
        default=None,
        description="Additional error details for debugging"
    )

    @classmethod
    def from_exception(cls, error: BaseException) -> "ErrorResponse":
        """Build a response from any exception raised during a command."""
        if isinstance(error, SipdgError):
            return cls(category=error.category, message=error.message, details=error.details or None)
        category = getattr(error, "category", None)
        if isinstance(category, str):
            return cls(category=category, message=str(error))
        if isinstance(error, OSError):
            return cls(category="IO_ERROR", message=str(error))
        return cls(category="INTERNAL_ERROR", message=str(error))

    def one_line(self) -> str:
        """Render as ``error: CATEGORY: message`` with newlines flattened."""
        message = " ".join(self.message.split())
        return f"error: {self.category}: {message}"
