import math

import numpy as np
import pytest

from sipdg.models.common.error_models import MeshValidationError, NonConformingMeshError
from sipdg.models.domain.mesh import (
    build_lshape_mesh,
    build_square_mesh,
    domain_area,
    extract_edges,
    mesh_from_arrays,
    mesh_metrics,
    refine_uniform,
    swap_edge_orientation,
)


class TestBuildSquareMesh:

    def test_smallest_mesh(self, two_triangle_square):
        assert two_triangle_square.n_vertices == 4
        assert two_triangle_square.n_triangles == 2
        assert two_triangle_square.n_edges == 5
        assert len(two_triangle_square.interior_edges) == 1

    def test_two_by_two_counts(self, square_mesh):
        assert square_mesh.n_vertices == 9
        assert square_mesh.n_triangles == 8
        assert square_mesh.n_edges == 16
        assert len(square_mesh.interior_edges) == 8
        assert len(square_mesh.boundary_edges) == 8

    def test_granularity_and_regularity(self):
        metrics = mesh_metrics(build_square_mesh(8))
        assert metrics.h == pytest.approx(math.sqrt(2) / 8, abs=1e-14)
        assert metrics.max_shape_ratio == pytest.approx(1 + math.sqrt(2), abs=1e-12)
        assert metrics.quasi_uniformity == pytest.approx(1.0, abs=1e-12)

    def test_triangles_are_counterclockwise(self, square_mesh_4):
        assert np.all(square_mesh_4.areas() > 0)
        assert domain_area(square_mesh_4) == pytest.approx(1.0, abs=1e-14)

    @pytest.mark.parametrize("n", [0, -3, 2.5, True])
    def test_invalid_resolution(self, n):
        with pytest.raises(MeshValidationError):
            build_square_mesh(n)


class TestBuildLshapeMesh:

    def test_smallest_mesh(self):
        mesh = build_lshape_mesh(1)
        assert mesh.n_triangles == 6
        assert mesh.n_vertices == 8

    def test_boundary_loop(self, lshape_mesh):
        assert lshape_mesh.n_triangles == 24
        assert len(lshape_mesh.boundary_edges) == 16

    @pytest.mark.parametrize("n", [1, 2, 5])
    def test_reentrant_corner_is_vertex(self, n):
        mesh = build_lshape_mesh(n)
        assert np.any(np.all(mesh.vertices == 0.0, axis=1))
        assert domain_area(mesh) == pytest.approx(3.0, abs=1e-13)

    def test_boundary_edges_lie_on_boundary_segments(self, lshape_mesh):
        segments = [
            lambda p: p[0] == -1.0,
            lambda p: p[1] == 1.0,
            lambda p: p[0] == 1.0 and 0.0 <= p[1],
            lambda p: p[1] == 0.0 and 0.0 <= p[0],
            lambda p: p[0] == 0.0 and p[1] <= 0.0,
            lambda p: p[1] == -1.0 and p[0] <= 0.0,
        ]
        for edge in lshape_mesh.boundary_edges:
            a, b = (lshape_mesh.vertices[v] for v in lshape_mesh.edges.endpoints[edge])
            assert any(on(a) and on(b) for on in segments)

    def test_boundary_normals_point_out(self, lshape_mesh):
        table = lshape_mesh.edges
        for edge in lshape_mesh.boundary_edges:
            a, b = lshape_mesh.vertices[table.endpoints[edge]]
            element = table.elems[edge, 0]
            center = lshape_mesh.barycenters()[element]
            midpoint = 0.5 * (a + b)
            assert np.dot(table.normals[edge], midpoint - center) > 0


class TestRefineUniform:

    def test_refine_smallest_square(self, two_triangle_square):
        refined = refine_uniform(two_triangle_square)
        assert refined.n_triangles == 8
        assert mesh_metrics(refined).h == pytest.approx(math.sqrt(2) / 2, abs=1e-14)

    def test_refinement_matches_finer_generator(self, square_mesh):
        refined = refine_uniform(square_mesh)
        direct = build_square_mesh(4)
        assert refined.n_vertices == direct.n_vertices
        assert refined.n_edges == direct.n_edges
        assert mesh_metrics(refined).h == pytest.approx(mesh_metrics(direct).h, abs=1e-14)

    def test_refined_lshape_keeps_area_and_regularity(self, lshape_mesh):
        refined = refine_uniform(lshape_mesh)
        assert refined.n_triangles == 4 * lshape_mesh.n_triangles
        assert domain_area(refined) == pytest.approx(3.0, abs=1e-13)
        assert mesh_metrics(refined).max_shape_ratio == pytest.approx(mesh_metrics(lshape_mesh).max_shape_ratio)


class TestMeshMetrics:

    def test_right_isoceles_triangle(self, single_triangle):
        metrics = mesh_metrics(single_triangle)
        assert metrics.h == pytest.approx(math.sqrt(2), abs=1e-14)
        assert single_triangle.inscribed_diameters()[0] == pytest.approx(2 - math.sqrt(2), abs=1e-14)
        assert metrics.max_shape_ratio == pytest.approx(math.sqrt(2) / (2 - math.sqrt(2)), abs=1e-12)

    def test_equilateral_triangle(self):
        mesh = mesh_from_arrays([[0.0, 0.0], [1.0, 0.0], [0.5, math.sqrt(3) / 2]], [[0, 1, 2]])
        assert mesh.element_diameters()[0] == pytest.approx(2 / math.sqrt(3), abs=1e-14)
        assert mesh.inscribed_diameters()[0] == pytest.approx(1 / math.sqrt(3), abs=1e-14)
        assert mesh_metrics(mesh).max_shape_ratio == pytest.approx(2.0, abs=1e-12)

    @pytest.mark.parametrize("n", [1, 3, 8])
    def test_uniform_square_is_quasi_uniform(self, n):
        assert mesh_metrics(build_square_mesh(n)).quasi_uniformity == pytest.approx(1.0, abs=1e-12)


class TestExtractEdges:

    def test_two_triangle_square(self, two_triangle_square):
        table = two_triangle_square.edges
        interior = two_triangle_square.interior_edges
        assert len(interior) == 1
        assert sorted(table.endpoints[interior[0]]) == [0, 3]
        assert int(np.sum(table.is_boundary)) == 4

    def test_edges_sorted_and_unique(self, square_mesh_4):
        endpoints = square_mesh_4.edges.endpoints
        assert np.all(endpoints[:, 0] < endpoints[:, 1])
        keys = [tuple(pair) for pair in endpoints.tolist()]
        assert keys == sorted(set(keys))

    def test_interior_normal_points_out_of_first_element(self, square_mesh_4):
        table = square_mesh_4.edges
        centers = square_mesh_4.barycenters()
        for edge in square_mesh_4.interior_edges:
            first, second = table.elems[edge]
            assert first < second
            assert np.dot(table.normals[edge], centers[second] - centers[first]) > 0

    def test_tri_edges_consistent(self, lshape_mesh):
        for element in range(lshape_mesh.n_triangles):
            for k in range(3):
                edge = lshape_mesh.tri_edges[element, k]
                pair = sorted((lshape_mesh.triangles[element, k], lshape_mesh.triangles[element, (k + 1) % 3]))
                assert list(lshape_mesh.edges.endpoints[edge]) == pair

    def test_h_e_is_mean_of_neighbours(self, square_mesh):
        assert np.allclose(square_mesh.edges.h_e, math.sqrt(2) / 2, atol=1e-14)

    def test_non_conforming_pair(self):
        vertices = np.array([[0.0, 0.0], [1.0, 0.0], [0.5, 1.0], [0.5, -1.0], [0.5, 0.5]])
        triangles = np.array([[0, 1, 2], [1, 0, 3], [0, 1, 4]])
        with pytest.raises(NonConformingMeshError):
            extract_edges(triangles, vertices)

    def test_edge_record_view(self, two_triangle_square):
        edge = two_triangle_square.edge(int(two_triangle_square.interior_edges[0]))
        assert edge.kind == "interior"
        assert edge.elems == (0, 1)
        assert edge.length == pytest.approx(math.sqrt(2))


class TestMeshFromArrays:

    def test_rejects_clockwise(self):
        with pytest.raises(MeshValidationError):
            mesh_from_arrays([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]], [[0, 2, 1]])

    def test_rejects_degenerate(self):
        with pytest.raises(MeshValidationError):
            mesh_from_arrays([[0.0, 0.0], [1.0, 0.0], [2.0, 0.0]], [[0, 1, 2]])

    def test_rejects_out_of_range_index(self):
        with pytest.raises(MeshValidationError):
            mesh_from_arrays([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]], [[0, 1, 3]])

    def test_rejects_unused_vertex(self):
        with pytest.raises(MeshValidationError):
            mesh_from_arrays([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [5.0, 5.0]], [[0, 1, 2]])

    def test_rejects_repeated_vertex(self):
        with pytest.raises(MeshValidationError):
            mesh_from_arrays([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]], [[0, 1, 1]])

    def test_arrays_are_read_only(self, square_mesh):
        with pytest.raises(ValueError):
            square_mesh.vertices[0, 0] = 3.0


class TestSwapEdgeOrientation:

    def test_swap_reverses_elements_and_normal(self, square_mesh):
        interior = square_mesh.interior_edges
        swapped = swap_edge_orientation(square_mesh, interior)
        assert np.array_equal(swapped.edges.elems[interior], square_mesh.edges.elems[interior][:, ::-1])
        assert np.allclose(swapped.edges.normals[interior], -square_mesh.edges.normals[interior])

    def test_boundary_edges_cannot_swap(self, square_mesh):
        with pytest.raises(MeshValidationError):
            swap_edge_orientation(square_mesh, square_mesh.boundary_edges[:1])
