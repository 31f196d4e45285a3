import pytest

from sipdg.models.common import error_models
from sipdg.models.common.error_models import (
    ErrorResponse,
    IndefiniteSystemError,
    MeshValidationError,
    NonConformingMeshError,
    SipdgError,
)
from sipdg.utils.validation import ValidationResult, ValidationError


def test_categories_are_unique():
    classes = [value for value in vars(error_models).values()
               if isinstance(value, type) and issubclass(value, SipdgError)]
    categories = [cls.category for cls in classes]
    assert len(categories) == len(set(categories))


def test_non_conforming_is_a_mesh_error():
    error = NonConformingMeshError("edge shared by three triangles", {"edge": [0, 1]})
    assert isinstance(error, MeshValidationError)
    assert error.category == "MESH_NONCONFORMING"
    assert error.details == {"edge": [0, 1]}


class TestErrorResponse:

    def test_from_sipdg_error(self):
        response = ErrorResponse.from_exception(IndefiniteSystemError("pivot -1.0 at column 3", {"column": 3}))
        assert response.category == "PENALTY_TOO_SMALL"
        assert response.message == "pivot -1.0 at column 3"
        assert response.details == {"column": 3}

    def test_from_os_error(self):
        response = ErrorResponse.from_exception(FileNotFoundError("no such file"))
        assert response.category == "IO_ERROR"

    def test_from_validation_error(self):
        error = ValidationError(ValidationResult.failure("Output directory does not exist: x",
                                                         "OUTPUT_DIRECTORY_MISSING"))
        assert ErrorResponse.from_exception(error).category == "OUTPUT_DIRECTORY_MISSING"

    def test_from_unexpected_error(self):
        assert ErrorResponse.from_exception(RuntimeError("boom")).category == "INTERNAL_ERROR"

    @pytest.mark.parametrize("message", ["first line\nsecond line", "  padded   message  "])
    def test_one_line(self, message):
        line = ErrorResponse(category="MESH_INVALID", message=message).one_line()
        assert "\n" not in line
        assert line.startswith("error: MESH_INVALID: ")
        assert "  " not in line.removeprefix("error: MESH_INVALID: ")
