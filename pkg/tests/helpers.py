import numpy as np

from sipdg.models.domain.assembly import assemble_matrix, assemble_rhs
from sipdg.models.domain.dgspace import DgSpace, build_space
from sipdg.models.domain.fields import get_problem
from sipdg.models.domain.linsolve import solve
from sipdg.models.domain.mesh import Mesh


def solve_named_problem(mesh: Mesh, r: int, problem_name: str, sigma: float | None = None):
    """Assemble and solve a model problem; returns the space, matrix and coefficients."""
    problem = get_problem(problem_name)
    sigma = 10.0 * r * r if sigma is None else sigma
    space = build_space(mesh, r)
    matrix = assemble_matrix(space, sigma)
    coeffs, _ = solve(matrix, assemble_rhs(space, problem.f, problem.g, sigma))
    return space, matrix, coeffs


def element_indicator(space: DgSpace, values: dict[int, float]) -> np.ndarray:
    """Coefficients of the piecewise constant function taking values[k] on element k (0 elsewhere)."""
    local = np.zeros((space.mesh.n_triangles, space.basis.n_loc))
    for element, value in values.items():
        local[element, :] = value
    return local.ravel()


def random_points_in_triangle(rng: np.random.Generator, corners: np.ndarray, count: int) -> np.ndarray:
    """Uniform random interior points of the triangle with the given (3, 2) corners."""
    weights = rng.dirichlet(np.ones(3), size=count)
    return weights @ corners
