"""Broken norms, error measures and extrema of discrete functions.

Integrals are evaluated with the quadrature of :mod:`quadrature`; maxima
and minima by sampling. The sample set of an element is a barycentric
lattice plus all volume and edge quadrature points of that element; the
boundary sample set holds the one-sided traces on boundary edges together
with every element's value at each of its boundary vertices, so boundary
samples are always a subset of the domain samples.

Regions: a :class:`Rectangle` is clipped exactly against elements and edges;
a :class:`PredicateRegion` selects whole elements by their barycenter.
"""
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Optional, Union

import numpy as np
import scipy.sparse as sp
from numpy.typing import ArrayLike, NDArray

from sipdg.models.common.error_models import NormParameterError, SubdomainError
from sipdg.models.domain.assembly import bilinear_form, edge_points, edge_side_basis, load_degree, matrix_degree
from sipdg.models.domain.dgspace import DgSpace
from sipdg.models.domain.fields import ScalarField
from sipdg.models.domain.quadrature import make_quad_edge, make_quad_tri
from sipdg.models.domain.reports import BoundaryExtrema, ErrorReport, GlobalExtrema
from sipdg.utils.logging import get_logger

logger = get_logger(__name__)

FloatArray = NDArray[np.float64]
IntArray = NDArray[np.int64]

DEFAULT_RESOLUTION = 20


@dataclass(frozen=True)
class Rectangle:
    """Closed axis-aligned rectangle [x0, x1] x [y0, y1]."""
    x0: float
    y0: float
    x1: float
    y1: float

    def __post_init__(self) -> None:
        values = (self.x0, self.y0, self.x1, self.y1)
        if not all(math.isfinite(v) for v in values) or self.x0 >= self.x1 or self.y0 >= self.y1:
            raise SubdomainError(f"Malformed rectangle {values}: need x0 < x1 and y0 < y1")

    @classmethod
    def parse(cls, text: str) -> "Rectangle":
        """Parse ``x0,y0,x1,y1``."""
        try:
            x0, y0, x1, y1 = (float(part) for part in text.split(","))
        except ValueError as e:
            raise SubdomainError(f"Rectangle must be given as x0,y0,x1,y1, got '{text}'") from e
        return cls(x0, y0, x1, y1)

    def contains(self, x: ArrayLike, y: ArrayLike) -> NDArray[np.bool_]:
        xs = np.asarray(x, dtype=float)
        ys = np.asarray(y, dtype=float)
        return np.asarray((xs >= self.x0) & (xs <= self.x1) & (ys >= self.y0) & (ys <= self.y1))

    def distance_to(self, x: float, y: float) -> float:
        dx = max(self.x0 - x, 0.0, x - self.x1)
        dy = max(self.y0 - y, 0.0, y - self.y1)
        return math.hypot(dx, dy)


@dataclass(frozen=True)
class PredicateRegion:
    """General region; an element belongs to it when its barycenter does."""
    predicate: Callable[[FloatArray, FloatArray], NDArray[np.bool_]]
    name: str = "region"


Region = Union[Rectangle, PredicateRegion]


@dataclass(frozen=True, eq=False)
class VolumeQuadrature:
    """Quadrature over integration cells: whole elements or clipped pieces of them.

    Attributes:
        elements: (C,) owning element of each cell
        points: (C, Q, 2) physical points
        weights: (C, Q) physical weights
        values: (C, Q, n_loc) basis values
        gradients: (C, Q, n_loc, 2) physical basis gradients
    """
    elements: IntArray
    points: FloatArray
    weights: FloatArray
    values: FloatArray
    gradients: FloatArray


@dataclass(frozen=True, eq=False)
class EdgeQuadrature:
    """Quadrature over edge pieces with the basis data of both sides.

    On boundary edges the second side repeats the first; callers mask it
    with ``is_boundary``.

    Attributes:
        edges: (E,) edge indices
        points: (E, T, 2) physical points
        weights: (E, T) physical weights
        is_boundary: (E,) boundary flags
        elements: (E, 2) element of each side
        values: (2, E, T, n_loc) basis values per side
        gradients: (2, E, T, n_loc, 2) physical basis gradients per side
    """
    edges: IntArray
    points: FloatArray
    weights: FloatArray
    is_boundary: NDArray[np.bool_]
    elements: IntArray
    values: FloatArray
    gradients: FloatArray


def _check_p(p: float) -> float:
    value = float(p)
    if math.isnan(value) or value < 1.0:
        raise NormParameterError(f"Norm exponent must lie in [1, inf], got {p!r}")
    return value


def _clip_polygon(polygon: list[tuple[float, float]], rect: Rectangle) -> list[tuple[float, float]]:
    """Clip a convex counterclockwise polygon against the closed rectangle."""
    planes = ((0, rect.x0, True), (0, rect.x1, False), (1, rect.y0, True), (1, rect.y1, False))
    for axis, bound, keep_greater in planes:
        def inside(point: tuple[float, float]) -> bool:
            return point[axis] >= bound if keep_greater else point[axis] <= bound

        clipped: list[tuple[float, float]] = []
        for i, current in enumerate(polygon):
            previous = polygon[i - 1]
            if inside(current) != inside(previous):
                t = (bound - previous[axis]) / (current[axis] - previous[axis])
                clipped.append((previous[0] + t * (current[0] - previous[0]),
                                previous[1] + t * (current[1] - previous[1])))
            if inside(current):
                clipped.append(current)
        polygon = clipped
        if not polygon:
            break
    return polygon


def _region_cells(space: DgSpace, region: Optional[Region]) -> tuple[IntArray, FloatArray]:
    """Integration cells (element, triangle corners) covering K intersected with the region."""
    mesh = space.mesh
    corners = mesh.vertices[mesh.triangles]
    all_elements = np.arange(mesh.n_triangles, dtype=np.int64)
    if region is None:
        return all_elements, corners
    if isinstance(region, PredicateRegion):
        centers = mesh.barycenters()
        chosen = np.flatnonzero(np.asarray(region.predicate(centers[:, 0], centers[:, 1]), dtype=bool))
        return chosen.astype(np.int64), corners[chosen]

    low = corners.min(axis=1)
    high = corners.max(axis=1)
    inside = (low[:, 0] >= region.x0) & (high[:, 0] <= region.x1) & (low[:, 1] >= region.y0) & (high[:, 1] <= region.y1)
    outside = (high[:, 0] <= region.x0) | (low[:, 0] >= region.x1) | (high[:, 1] <= region.y0) | (low[:, 1] >= region.y1)

    elements = [int(k) for k in np.flatnonzero(inside)]
    cells = [corners[k] for k in elements]
    for k in np.flatnonzero(~inside & ~outside):
        polygon = _clip_polygon([tuple(point) for point in corners[k].tolist()], region)
        scale = float(np.max(high[k] - low[k])) ** 2
        for i in range(1, len(polygon) - 1):
            triangle = np.array([polygon[0], polygon[i], polygon[i + 1]], dtype=float)
            area = 0.5 * ((triangle[1, 0] - triangle[0, 0]) * (triangle[2, 1] - triangle[0, 1])
                          - (triangle[1, 1] - triangle[0, 1]) * (triangle[2, 0] - triangle[0, 0]))
            if area > 1e-14 * scale:
                elements.append(int(k))
                cells.append(triangle)
    if not cells:
        return np.zeros(0, dtype=np.int64), np.zeros((0, 3, 2), dtype=float)
    order = np.argsort(np.asarray(elements), kind="stable")
    return np.asarray(elements, dtype=np.int64)[order], np.asarray(cells, dtype=float)[order]


def volume_quadrature(space: DgSpace, degree: int, region: Optional[Region] = None) -> VolumeQuadrature:
    """Quadrature of the given degree over every element intersected with ``region``.

    Raises:
        SubdomainError: The region meets no element
    """
    elements, cells = _region_cells(space, region)
    if elements.size == 0:
        raise SubdomainError("Subdomain does not intersect the mesh")
    rule = make_quad_tri(degree)
    origin = cells[:, 0, :]
    e1 = cells[:, 1, :] - origin
    e2 = cells[:, 2, :] - origin
    points = (origin[:, None, :] + rule.points[None, :, 0:1] * e1[:, None, :]
              + rule.points[None, :, 1:2] * e2[:, None, :])
    det = np.abs(e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0])
    weights = rule.weights[None, :] * det[:, None]

    ref = space.to_reference(elements, points)
    n_cells, n_q = ref.shape[0], ref.shape[1]
    flat = ref.reshape(-1, 2)
    values = space.basis.values(flat).reshape(n_cells, n_q, -1)
    gradients = space.physical_gradients(elements, space.basis.gradients(flat).reshape(n_cells, n_q, -1, 2))
    return VolumeQuadrature(elements=elements, points=points, weights=weights, values=values, gradients=gradients)


def _edge_pieces(space: DgSpace, region: Optional[Region]) -> tuple[IntArray, FloatArray, FloatArray]:
    """Edges meeting the closed region and their parameter intervals [t0, t1]."""
    mesh = space.mesh
    n_edges = mesh.n_edges
    if region is None:
        ids = np.arange(n_edges, dtype=np.int64)
        return ids, np.zeros(n_edges), np.ones(n_edges)
    if isinstance(region, PredicateRegion):
        centers = mesh.barycenters()
        selected = np.asarray(region.predicate(centers[:, 0], centers[:, 1]), dtype=bool)
        elems = mesh.edges.elems
        touching = selected[elems[:, 0]] | ((elems[:, 1] >= 0) & selected[np.maximum(elems[:, 1], 0)])
        ids = np.flatnonzero(touching).astype(np.int64)
        return ids, np.zeros(ids.size), np.ones(ids.size)

    # Liang-Barsky against the closed rectangle, in the first element's parameterization
    ids = np.arange(n_edges, dtype=np.int64)
    ends = edge_points(space, ids, np.array([0.0, 1.0]))
    start = ends[:, 0, :]
    delta = ends[:, 1, :] - start
    t0 = np.zeros(n_edges)
    t1 = np.ones(n_edges)
    keep = np.ones(n_edges, dtype=bool)
    checks = ((-delta[:, 0], start[:, 0] - region.x0), (delta[:, 0], region.x1 - start[:, 0]),
              (-delta[:, 1], start[:, 1] - region.y0), (delta[:, 1], region.y1 - start[:, 1]))
    for p, q in checks:
        parallel = p == 0.0
        keep &= ~(parallel & (q < 0.0))
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = np.where(parallel, 0.0, q / np.where(parallel, 1.0, p))
        t0 = np.where(~parallel & (p < 0.0), np.maximum(t0, ratio), t0)
        t1 = np.where(~parallel & (p > 0.0), np.minimum(t1, ratio), t1)
    keep &= t1 > t0
    return ids[keep], t0[keep], t1[keep]


def edge_quadrature(space: DgSpace, degree: int, region: Optional[Region] = None) -> EdgeQuadrature:
    """Quadrature on every edge piece inside the closed region, with the basis data of both sides."""
    edges, t0, t1 = _edge_pieces(space, region)
    rule = make_quad_edge(degree)
    table = space.mesh.edges
    n_loc = space.basis.n_loc
    is_boundary = table.is_boundary[edges]
    params = t0[:, None] + (t1 - t0)[:, None] * rule.points[None, :]
    weights = rule.weights[None, :] * ((t1 - t0) * table.lengths[edges])[:, None]
    n_edges, n_t = params.shape
    values = np.zeros((2, n_edges, n_t, n_loc))
    gradients = np.zeros((2, n_edges, n_t, n_loc, 2))
    elements = np.repeat(table.elems[edges, 0:1], 2, axis=1)
    if n_edges == 0:
        return EdgeQuadrature(edges, np.zeros((0, n_t, 2)), weights, is_boundary, elements, values, gradients)

    first = edge_side_basis(space, edges, 0, params)
    values[0] = values[1] = first.values
    gradients[0] = gradients[1] = first.gradients
    interior = np.flatnonzero(~is_boundary)
    if interior.size:
        second = edge_side_basis(space, edges[interior], 1, params[interior])
        values[1, interior] = second.values
        gradients[1, interior] = second.gradients
        elements[interior, 1] = second.elements
    return EdgeQuadrature(
        edges=edges,
        points=edge_points(space, edges, params),
        weights=weights,
        is_boundary=is_boundary,
        elements=elements,
        values=values,
        gradients=gradients,
    )


def _local(space: DgSpace, coeffs: ArrayLike) -> FloatArray:
    return space.element_coefficients(np.asarray(coeffs, dtype=float))


def _vp_norm(space: DgSpace, coeffs: ArrayLike, p: float, region: Optional[Region],
             exact: Optional[ScalarField] = None) -> float:
    """V^p norm of u_h - exact (u_h alone when exact is None)."""
    degree = load_degree(space.degree)
    local = _local(space, coeffs)
    mesh = space.mesh

    vol = volume_quadrature(space, degree, region)
    value = np.einsum("cqi,ci->cq", vol.values, local[vol.elements])
    grad = np.einsum("cqia,ci->cqa", vol.gradients, local[vol.elements])
    if exact is not None:
        value = value - exact.value(vol.points[..., 0], vol.points[..., 1])
        grad = grad - exact.gradient(vol.points[..., 0], vol.points[..., 1])

    edges = edge_quadrature(space, degree, region)
    if edges.edges.size:
        local_pair = local[edges.elements]
        v1 = np.einsum("eti,ei->et", edges.values[0], local_pair[:, 0])
        g1 = np.einsum("etia,ei->eta", edges.gradients[0], local_pair[:, 0])
        v2 = np.einsum("eti,ei->et", edges.values[1], local_pair[:, 1])
        g2 = np.einsum("etia,ei->eta", edges.gradients[1], local_pair[:, 1])
        boundary = edges.is_boundary[:, None]
        jump = np.where(boundary, v1, v1 - v2)
        mean_grad = np.where(boundary[..., None], g1, 0.5 * (g1 + g2))
        if exact is not None:
            xs, ys = edges.points[..., 0], edges.points[..., 1]
            jump = jump - np.where(boundary, exact.value(xs, ys), 0.0)
            mean_grad = mean_grad - exact.gradient(xs, ys)
        jump_abs = np.abs(jump)
        mean_abs = np.hypot(mean_grad[..., 0], mean_grad[..., 1])
        h_e = mesh.edges.h_e[edges.edges][:, None]
    else:
        jump_abs = mean_abs = h_e = np.zeros((0, 1))

    if math.isinf(p):
        volume_max = float(np.max(np.maximum(np.abs(value), np.abs(grad).max(axis=-1))))
        volume_max = max(volume_max, _sampled_w1inf(space, local, region, exact))
        jump_max = float(np.max(jump_abs / h_e)) if jump_abs.size else 0.0
        mean_max = float(np.max(mean_abs)) if mean_abs.size else 0.0
        return volume_max + jump_max + mean_max

    volume = float(np.sum(vol.weights * (np.abs(value) ** p + np.sum(np.abs(grad) ** p, axis=-1))))
    edge_terms = 0.0
    if jump_abs.size:
        edge_terms = float(np.sum(edges.weights * (h_e ** (1.0 - p) * jump_abs ** p + h_e * mean_abs ** p)))
    return float((volume + edge_terms) ** (1.0 / p))


def norm_vp(space: DgSpace, coeffs: ArrayLike, p: float, subdomain: Optional[Region] = None) -> float:
    """Broken V^p norm with edge jump and mean-gradient terms, p in [1, inf].

    Both edge sums run over all edges, boundary edges included.

    Raises:
        NormParameterError: p < 1
        SubdomainError: The subdomain meets no element
    """
    return _vp_norm(space, coeffs, _check_p(p), subdomain)


@lru_cache(maxsize=None)
def _element_sample_points(r: int, resolution: int) -> FloatArray:
    """Reference sample points: barycentric lattice, volume and edge quadrature points."""
    lattice = [(i / resolution, j / resolution)
               for j in range(resolution + 1) for i in range(resolution + 1 - j)]
    volume = make_quad_tri(load_degree(r)).points
    t = make_quad_edge(matrix_degree(r)[1]).points
    reference = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])
    edges = [reference[k] + t[:, None] * (reference[(k + 1) % 3] - reference[k]) for k in range(3)]
    points = np.vstack([np.asarray(lattice, dtype=float), volume, *edges])
    points.setflags(write=False)
    return points


def _check_resolution(resolution: int) -> None:
    if isinstance(resolution, bool) or not isinstance(resolution, (int, np.integer)) or resolution < 1:
        raise NormParameterError(f"Sampling resolution must be a positive integer, got {resolution!r}")


def _element_samples(space: DgSpace, local: FloatArray, region: Optional[Region], resolution: int,
                     with_gradients: bool = False) -> tuple[FloatArray, FloatArray, Optional[FloatArray]]:
    """Sample points (S, 2), values (S,) and optionally gradients (S, 2) over the region."""
    _check_resolution(resolution)
    ref = _element_sample_points(space.degree, resolution)
    mesh = space.mesh
    elements = np.arange(mesh.n_triangles)
    if isinstance(region, PredicateRegion):
        centers = mesh.barycenters()
        elements = np.flatnonzero(np.asarray(region.predicate(centers[:, 0], centers[:, 1]), dtype=bool))

    points = space.to_physical(elements, ref)
    values = local[elements] @ space.basis.values(ref).T
    gradients = None
    if with_gradients:
        gradients = np.einsum("kqia,ki->kqa", space.physical_gradients(elements, space.basis.gradients(ref)),
                              local[elements])
    mask = np.ones(values.shape, dtype=bool)
    if isinstance(region, Rectangle):
        mask = region.contains(points[..., 0], points[..., 1])
    if not np.any(mask):
        raise SubdomainError("Subdomain contains no sample point")
    grads_out = gradients[mask] if gradients is not None else None
    return points[mask], values[mask], grads_out


def _sampled_w1inf(space: DgSpace, local: FloatArray, region: Optional[Region],
                   exact: Optional[ScalarField]) -> float:
    points, values, gradients = _element_samples(space, local, region, DEFAULT_RESOLUTION, with_gradients=True)
    assert gradients is not None
    if exact is not None:
        values = values - exact.value(points[:, 0], points[:, 1])
        gradients = gradients - exact.gradient(points[:, 0], points[:, 1])
    return float(np.max(np.maximum(np.abs(values), np.abs(gradients).max(axis=1))))


def _boundary_samples(space: DgSpace, local: FloatArray, resolution: int) -> tuple[FloatArray, FloatArray]:
    """Boundary sample points (S, 2) and one-sided values (S,)."""
    _check_resolution(resolution)
    mesh = space.mesh
    boundary = mesh.boundary_edges
    t = np.concatenate((np.linspace(0.0, 1.0, resolution + 1), make_quad_edge(matrix_degree(space.degree)[1]).points))
    side = edge_side_basis(space, boundary, 0, t)
    edge_values = np.einsum("eti,ei->et", side.values, local[side.elements])
    edge_pts = edge_points(space, boundary, t)

    # the nodal value at a vertex node is the element's trace at that vertex
    on_boundary = mesh.boundary_vertex_flags[mesh.triangles]
    vertex_values = local[:, :3][on_boundary]
    vertex_pts = mesh.vertices[mesh.triangles][on_boundary]

    points = np.vstack((edge_pts.reshape(-1, 2), vertex_pts))
    values = np.concatenate((edge_values.ravel(), vertex_values))
    return points, values


def error_linf(space: DgSpace, coeffs: ArrayLike, exact: Optional[ScalarField] = None,
               subdomain: Optional[Region] = None, resolution: int = DEFAULT_RESOLUTION) -> float:
    """max |u_h - u| (or max |u_h| without ``exact``) over the sample set.

    Raises:
        SubdomainError: No sample point inside the subdomain
    """
    points, values, _ = _element_samples(space, _local(space, coeffs), subdomain, resolution)
    if exact is not None:
        values = values - exact.value(points[:, 0], points[:, 1])
    return float(np.max(np.abs(values)))


def error_linf_boundary(space: DgSpace, coeffs: ArrayLike, exact: Optional[ScalarField] = None,
                        resolution: int = DEFAULT_RESOLUTION) -> float:
    """max |u_h - u| over the boundary samples, using one-sided traces."""
    points, values = _boundary_samples(space, _local(space, coeffs), resolution)
    if exact is not None:
        values = values - exact.value(points[:, 0], points[:, 1])
    return float(np.max(np.abs(values)))


def boundary_extrema(space: DgSpace, coeffs: ArrayLike, resolution: int = DEFAULT_RESOLUTION) -> BoundaryExtrema:
    _, values = _boundary_samples(space, _local(space, coeffs), resolution)
    return BoundaryExtrema(min_boundary=float(values.min()), max_boundary=float(values.max()))


def global_extrema(space: DgSpace, coeffs: ArrayLike, resolution: int = DEFAULT_RESOLUTION) -> GlobalExtrema:
    _, values, _ = _element_samples(space, _local(space, coeffs), None, resolution)
    return GlobalExtrema(min_omega=float(values.min()), max_omega=float(values.max()))


def _volume_errors(space: DgSpace, coeffs: ArrayLike, exact: ScalarField,
                   subdomain: Optional[Region]) -> tuple[FloatArray, FloatArray, FloatArray]:
    vol = volume_quadrature(space, load_degree(space.degree), subdomain)
    local = _local(space, coeffs)[vol.elements]
    xs, ys = vol.points[..., 0], vol.points[..., 1]
    value_error = np.einsum("cqi,ci->cq", vol.values, local) - exact.value(xs, ys)
    grad_error = np.einsum("cqia,ci->cqa", vol.gradients, local) - exact.gradient(xs, ys)
    return vol.weights, value_error, grad_error


def error_l2(space: DgSpace, coeffs: ArrayLike, exact: ScalarField, subdomain: Optional[Region] = None) -> float:
    weights, value_error, _ = _volume_errors(space, coeffs, exact, subdomain)
    return float(math.sqrt(max(float(np.sum(weights * value_error ** 2)), 0.0)))


def error_broken_h1(space: DgSpace, coeffs: ArrayLike, exact: ScalarField,
                    subdomain: Optional[Region] = None) -> float:
    """Broken H1 seminorm of u_h - u."""
    weights, _, grad_error = _volume_errors(space, coeffs, exact, subdomain)
    return float(math.sqrt(max(float(np.sum(weights * np.sum(grad_error ** 2, axis=-1))), 0.0)))


def error_v2(space: DgSpace, coeffs: ArrayLike, exact: ScalarField, subdomain: Optional[Region] = None) -> float:
    """V^2 norm of u_h - u, with the exact solution's trace entering boundary jumps."""
    return _vp_norm(space, coeffs, 2.0, subdomain, exact)


def error_report(space: DgSpace, coeffs: ArrayLike, exact: ScalarField, subdomain: Optional[Region] = None,
                 resolution: int = DEFAULT_RESOLUTION) -> ErrorReport:
    """Every error measure of u_h against ``exact`` in one record."""
    report = ErrorReport(
        l2=error_l2(space, coeffs, exact),
        broken_h1=error_broken_h1(space, coeffs, exact),
        v2=error_v2(space, coeffs, exact),
        linf=error_linf(space, coeffs, exact, resolution=resolution),
        linf_boundary=error_linf_boundary(space, coeffs, exact, resolution=resolution),
        linf_subdomain=None if subdomain is None else error_linf(space, coeffs, exact, subdomain, resolution),
        h=float(space.mesh.element_diameters().max()),
        dofs=space.total_dofs,
    )
    logger.debug("Error report", context=report.model_dump())
    return report


def coercivity_constant(space: DgSpace, matrix: sp.spmatrix, samples: int = 20,
                        rng: Optional[np.random.Generator] = None) -> float:
    """min a(chi, chi) / ||chi||_{V^2}^2 over seeded random coefficient vectors."""
    generator = rng if rng is not None else np.random.default_rng(0)
    ratios = []
    for _ in range(samples):
        chi = generator.standard_normal(space.total_dofs)
        ratios.append(bilinear_form(matrix, chi, chi) / norm_vp(space, chi, 2.0) ** 2)
    return float(min(ratios))


def continuity_constant(space: DgSpace, matrix: sp.spmatrix, samples: int = 20,
                        rng: Optional[np.random.Generator] = None) -> float:
    """max |a(u, v)| / (||u||_{V^2} ||v||_{V^2}) over seeded random pairs."""
    generator = rng if rng is not None else np.random.default_rng(0)
    ratios = []
    for _ in range(samples):
        u = generator.standard_normal(space.total_dofs)
        v = generator.standard_normal(space.total_dofs)
        ratios.append(abs(bilinear_form(matrix, u, v)) / (norm_vp(space, u, 2.0) * norm_vp(space, v, 2.0)))
    return float(max(ratios))
