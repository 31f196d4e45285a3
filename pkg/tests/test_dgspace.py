import numpy as np
import pytest

from sipdg.models.common.error_models import BasisDegreeError, PointLocationError
from sipdg.models.domain.dgspace import (
    MAX_SPACE_DEGREE,
    DofMap,
    build_space,
    eval_gradient_on_element,
    eval_on_element,
    interior_dofs,
    interpolate,
    make_basis,
)
from sipdg.models.domain.fields import ScalarField, constant_field, linear_field, paraboloid_field, saddle_field
from sipdg.models.domain.mesh import Point2, build_square_mesh

from .helpers import random_points_in_triangle

x_field = ScalarField(
    value_fn=lambda x, y: x,
    gradient_fn=lambda x, y: (np.ones_like(x), np.zeros_like(x)),
    name="x",
    smoothness="polynomial",
)


class TestReferenceBasis:

    def test_linear_basis_is_barycentric(self, rng):
        basis = make_basis(1)
        assert basis.n_loc == 3
        points = rng.random((10, 2)) * 0.5
        expected = np.column_stack((1 - points[:, 0] - points[:, 1], points[:, 0], points[:, 1]))
        assert np.allclose(basis.values(points), expected, atol=1e-14)
        assert basis.values(np.array([[0.0, 0.0]]))[0, 0] == pytest.approx(1.0)

    @pytest.mark.parametrize("r", [1, 2, 3])
    def test_nodal_property(self, r):
        basis = make_basis(r)
        assert np.allclose(basis.values(basis.nodes), np.eye(basis.n_loc), atol=1e-12)

    @pytest.mark.parametrize("r", [1, 2, 3])
    def test_partition_of_unity(self, r):
        basis = make_basis(r)
        centroid = np.array([[1 / 3, 1 / 3]])
        assert basis.values(centroid).sum() == pytest.approx(1.0, abs=1e-12)
        assert np.allclose(basis.gradients(centroid).sum(axis=1), 0.0, atol=1e-12)

    def test_quadratic_edge_node_is_product_of_barycentrics(self, rng):
        basis = make_basis(2)
        assert basis.n_loc == 6
        points = rng.random((10, 2)) * 0.5
        lam0 = 1 - points[:, 0] - points[:, 1]
        lam1 = points[:, 0]
        # node 3 is the midpoint of local edge 0, between vertices 0 and 1
        assert np.allclose(basis.nodes[3], [0.5, 0.0])
        assert np.allclose(basis.values(points)[:, 3], 4 * lam0 * lam1, atol=1e-12)

    def test_gradients_match_finite_differences(self, rng):
        basis = make_basis(2)
        points = rng.random((5, 2)) * 0.5
        step = 1e-6
        fd_xi = (basis.values(points + [step, 0]) - basis.values(points - [step, 0])) / (2 * step)
        fd_eta = (basis.values(points + [0, step]) - basis.values(points - [0, step])) / (2 * step)
        grads = basis.gradients(points)
        assert np.allclose(grads[..., 0], fd_xi, atol=1e-7)
        assert np.allclose(grads[..., 1], fd_eta, atol=1e-7)

    @pytest.mark.parametrize("r", [0, -1, 1.5, False])
    def test_invalid_degree(self, r):
        with pytest.raises(BasisDegreeError):
            make_basis(r)


class TestDofMap:

    def test_numbering_is_element_major(self):
        dofmap = DofMap(n_loc=3, n_elements=4)
        assert dofmap.total_dofs == 12
        assert dofmap.global_index(2, 1) == 7
        assert dofmap.local_index(7) == (2, 1)
        assert list(dofmap.element_dofs(3)) == [9, 10, 11]
        assert dofmap.all_element_dofs().shape == (4, 3)

    def test_out_of_range(self):
        dofmap = DofMap(n_loc=3, n_elements=2)
        with pytest.raises(IndexError):
            dofmap.global_index(2, 0)
        with pytest.raises(IndexError):
            dofmap.local_index(6)


class TestDgSpace:

    def test_dimensions(self, square_mesh):
        space = build_space(square_mesh, 2)
        assert space.total_dofs == 8 * 6
        assert np.allclose(space.determinants, 2 * square_mesh.areas())

    def test_reference_round_trip(self, p2_square, rng):
        elements = np.arange(p2_square.mesh.n_triangles)
        ref = rng.random((len(elements), 4, 2)) * 0.5
        physical = p2_square.to_physical(elements, ref)
        assert np.allclose(p2_square.to_reference(elements, physical), ref, atol=1e-14)

    def test_element_coefficients_shape_check(self, p1_square):
        with pytest.raises(ValueError):
            p1_square.element_coefficients(np.zeros(5))

    def test_highest_supported_degree(self, two_triangle_square):
        assert MAX_SPACE_DEGREE == 4
        assert build_space(two_triangle_square, MAX_SPACE_DEGREE).basis.n_loc == 15

    @pytest.mark.parametrize("r", [5, 6])
    def test_degree_beyond_quadrature_rules(self, two_triangle_square, r):
        with pytest.raises(BasisDegreeError, match=f"r={r}"):
            build_space(two_triangle_square, r)


class TestEvaluation:

    def test_linear_interpolant_reproduces_x(self, p1_square, rng):
        coeffs = interpolate(p1_square, x_field)
        mesh = p1_square.mesh
        for element in range(mesh.n_triangles):
            for x, y in random_points_in_triangle(rng, mesh.vertices[mesh.triangles[element]], 3):
                assert eval_on_element(p1_square, element, coeffs, Point2(x, y)) == pytest.approx(x, abs=1e-13)
                gradient = eval_gradient_on_element(p1_square, element, coeffs, Point2(x, y))
                assert np.allclose(gradient, [1.0, 0.0], atol=1e-12)

    def test_quadratic_interpolant_is_exact(self, rng):
        mesh = build_square_mesh(1)
        space = build_space(mesh, 2)
        field = ScalarField(value_fn=lambda x, y: x * x, gradient_fn=lambda x, y: (2 * x, 0 * x))
        coeffs = interpolate(space, field)
        for x, y in random_points_in_triangle(rng, mesh.vertices[mesh.triangles[0]], 10):
            assert eval_on_element(space, 0, coeffs, Point2(x, y)) == pytest.approx(x * x, abs=1e-12)

    def test_point_outside_element(self, p1_square):
        coeffs = np.zeros(p1_square.total_dofs)
        with pytest.raises(PointLocationError):
            eval_on_element(p1_square, 0, coeffs, Point2(0.1, 0.9))

    def test_vertex_is_inside_closure(self, p1_square):
        coeffs = interpolate(p1_square, linear_field())
        assert eval_on_element(p1_square, 0, coeffs, Point2(0.0, 0.0)) == pytest.approx(0.0, abs=1e-14)


class TestInterpolate:

    def test_constant_gives_unit_coefficients(self, p2_square):
        assert np.array_equal(interpolate(p2_square, constant_field(1.0)), np.ones(p2_square.total_dofs))

    def test_linear_field_at_barycenters(self, p1_square):
        coeffs = interpolate(p1_square, linear_field())
        centers = p1_square.mesh.barycenters()
        for element, (x, y) in enumerate(centers):
            assert eval_on_element(p1_square, element, coeffs, Point2(x, y)) == pytest.approx(x + y, abs=1e-13)

    @pytest.mark.parametrize("field", [saddle_field(), paraboloid_field()])
    def test_quadratics_reproduced_at_nodes(self, p2_square, field):
        coeffs = interpolate(p2_square, field)
        nodes = p2_square.nodal_points()
        assert np.allclose(coeffs, field.value(nodes[..., 0], nodes[..., 1]).ravel(), atol=1e-14)


class TestInteriorDofs:

    def test_coarse_square_has_none(self, p1_square):
        assert interior_dofs(p1_square).size == 0

    def test_four_by_four_square(self, square_mesh_4):
        space = build_space(square_mesh_4, 1)
        dofs = interior_dofs(space)
        assert dofs.size == 8 * 3
        elements = np.unique(dofs // space.basis.n_loc)
        assert not square_mesh_4.boundary_vertex_flags[square_mesh_4.triangles[elements]].any()
