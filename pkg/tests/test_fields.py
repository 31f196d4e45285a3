import math

import numpy as np
import pytest

from sipdg.models.common.error_models import ExperimentError
from sipdg.models.domain.fields import (
    PROBLEMS,
    constant_field,
    corner_field,
    cosine_product,
    get_problem,
    gradient_consistency,
    linear_field,
    paraboloid_field,
    saddle_field,
    sine_product,
    sine_product_source,
)

SAMPLES = np.array([[0.1, 0.2], [0.7, 0.3], [0.45, 0.9], [-0.6, 0.4], [-0.3, -0.8], [0.8, 0.05]])


def _laplacian(field, x, y, step=1e-4):
    center = field.value(x, y)
    return (field.value(x + step, y) + field.value(x - step, y) + field.value(x, y + step)
            + field.value(x, y - step) - 4 * center) / step ** 2


class TestScalarField:

    def test_value_broadcasts(self):
        values = linear_field().value(np.zeros((2, 3)), 1.0)
        assert values.shape == (2, 3)
        assert np.all(values == 1.0)

    def test_gradient_stacks_on_last_axis(self):
        gradient = saddle_field().gradient(np.array([1.0, 2.0]), np.array([3.0, 4.0]))
        assert gradient.shape == (2, 2)
        assert np.allclose(gradient, [[2.0, -6.0], [4.0, -8.0]])

    def test_constant_field(self):
        field = constant_field(2.5)
        assert np.all(field.value(SAMPLES[:, 0], SAMPLES[:, 1]) == 2.5)
        assert np.all(field.gradient(SAMPLES[:, 0], SAMPLES[:, 1]) == 0.0)


@pytest.mark.parametrize("field", [
    sine_product(), sine_product_source(), cosine_product(), linear_field(), saddle_field(), paraboloid_field(),
    corner_field(),
])
def test_gradient_consistency(field):
    assert gradient_consistency(field, SAMPLES) < 1e-6


class TestModelProblems:

    @pytest.mark.parametrize("name", ["manufactured", "linear", "quadratic_harmonic", "quadratic", "corner"])
    def test_source_is_minus_laplacian(self, name):
        problem = get_problem(name)
        x, y = SAMPLES[:, 0], SAMPLES[:, 1]
        assert np.allclose(-_laplacian(problem.exact, x, y), problem.f.value(x, y), atol=1e-4)

    def test_manufactured_source(self):
        x, y = SAMPLES[:, 0], SAMPLES[:, 1]
        expected = 2 * math.pi ** 2 * sine_product().value(x, y)
        assert np.allclose(sine_product_source().value(x, y), expected, atol=1e-12)

    def test_wmp_boundary_has_no_exact_solution(self):
        problem = get_problem("wmp_boundary")
        assert problem.exact is None
        assert problem.g.value(0.0, 0.0) == pytest.approx(1.0)

    def test_every_problem_constructs(self):
        for name in PROBLEMS:
            assert get_problem(name).name == name

    def test_unknown_problem(self):
        with pytest.raises(ExperimentError) as excinfo:
            get_problem("helmholtz")
        assert "manufactured" in excinfo.value.details["available"]


class TestCornerField:

    def test_vanishes_on_edges_at_reentrant_corner(self):
        field = corner_field()
        t = np.linspace(0.01, 1.0, 7)
        assert np.allclose(field.value(t, 0 * t), 0.0, atol=1e-14)
        assert np.allclose(field.value(0 * t, -t), 0.0, atol=1e-14)

    def test_positive_inside_lshape(self):
        field = corner_field()
        assert np.all(field.value(SAMPLES[:, 0], SAMPLES[:, 1]) > 0)

    def test_scaling(self):
        field = corner_field()
        assert field.value(-0.5, 0.5) * 2 ** (2 / 3) == pytest.approx(field.value(-1.0, 1.0), rel=1e-13)

    def test_gradient_zero_at_origin(self):
        assert np.all(corner_field().gradient(0.0, 0.0) == 0.0)
