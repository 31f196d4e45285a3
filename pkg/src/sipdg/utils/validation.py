"""Validation result types shared by the configuration and output layers.

Path checks (configuration files, CSV / plot / mesh output targets) report a
:class:`ValidationResult` instead of raising, so callers decide whether a
failure is fatal.
"""
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, Optional


@dataclass
class ValidationResult:
    """Result of a validation operation.

    Attributes:
        is_valid: Whether validation passed
        error_message: Human-readable error message if validation failed
        error_code: Machine-readable error category
        details: Additional context about the failure
    """
    is_valid: bool
    error_message: Optional[str] = None
    error_code: Optional[str] = None
    details: Dict[str, Any] = field(default_factory=dict)

    @classmethod
    def success(cls) -> 'ValidationResult':
        """Create a successful validation result."""
        return cls(is_valid=True)

    @classmethod
    def failure(
        cls,
        error_message: str,
        error_code: str = 'VALIDATION_ERROR',
        details: Optional[Dict[str, Any]] = None
    ) -> 'ValidationResult':
        """Create a failed validation result."""
        return cls(
            is_valid=False,
            error_message=error_message,
            error_code=error_code,
            details=details or {}
        )

    def raise_if_invalid(self) -> None:
        """Raise :class:`ValidationError` when this result is a failure."""
        if not self.is_valid:
            raise ValidationError(self)


class ValidationError(Exception):
    """Exception wrapping a failed :class:`ValidationResult`."""

    def __init__(self, result: ValidationResult):
        self.result = result
        self.category = result.error_code or 'VALIDATION_ERROR'
        super().__init__(result.error_message)


def validate_output_path(file_path: str) -> ValidationResult:
    """Check that ``file_path`` can be created or overwritten.

    Args:
        file_path: Target file for CSV, plot data, mesh or matrix output

    Returns:
        ValidationResult indicating success or failure
    """
    if not file_path:
        return ValidationResult.failure("Output path is empty", "EMPTY_OUTPUT_PATH")

    path = Path(file_path)
    if path.is_dir():
        return ValidationResult.failure(
            f"Output path is a directory: {file_path}",
            "OUTPUT_PATH_IS_DIRECTORY",
            {"path": file_path}
        )

    parent = path.parent if str(path.parent) else Path(".")
    if not parent.exists():
        return ValidationResult.failure(
            f"Output directory does not exist: {parent}",
            "OUTPUT_DIRECTORY_MISSING",
            {"path": file_path}
        )

    if not os.access(parent, os.W_OK) or (path.exists() and not os.access(path, os.W_OK)):
        return ValidationResult.failure(
            f"Output path is not writable: {file_path}",
            "OUTPUT_PATH_NOT_WRITABLE",
            {"path": file_path}
        )

    return ValidationResult.success()
