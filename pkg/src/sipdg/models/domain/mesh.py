"""Conforming triangular meshes and their edge topology.

A :class:`Mesh` holds vertex coordinates, counterclockwise triangles and the
derived :class:`EdgeTable`. Edges are identified by their sorted endpoint
pair and stored in lexicographic order of that pair; the normal of an
interior edge points out of the first (lower-indexed) adjacent element, the
normal of a boundary edge points out of the domain.

Local edge ``k`` of a triangle ``(v0, v1, v2)`` joins ``v[k]`` and ``v[(k+1) % 3]``.
"""
import math
from dataclasses import dataclass
from typing import Literal, NamedTuple, Sequence

import numpy as np
from numpy.typing import ArrayLike, NDArray

from sipdg.models.common.error_models import MeshValidationError, NonConformingMeshError
from sipdg.models.domain.reports import MeshMetrics
from sipdg.utils.logging import get_logger

logger = get_logger(__name__)

FloatArray = NDArray[np.float64]
IntArray = NDArray[np.int64]
BoolArray = NDArray[np.bool_]

MIN_AREA_FACTOR = 1e-14


class Point2(NamedTuple):
    x: float
    y: float


@dataclass(frozen=True)
class Triangle:
    """Vertex indices of one element, counterclockwise."""
    v: tuple[int, int, int]


@dataclass(frozen=True)
class Edge:
    """Record view of one row of the :class:`EdgeTable`."""
    endpoints: tuple[int, int]
    elems: tuple[int, ...]
    kind: Literal["interior", "boundary"]
    normal: tuple[float, float]
    length: float
    h_e: float


def _frozen(array: np.ndarray) -> np.ndarray:
    array.setflags(write=False)
    return array


@dataclass(frozen=True, eq=False)
class EdgeTable:
    """Struct-of-arrays edge list.

    Attributes:
        endpoints: (E, 2) sorted vertex indices
        elems: (E, 2) adjacent elements; the second column is -1 on boundary edges
        local: (E, 2) local edge index of the edge inside each adjacent element (-1 if absent)
        normals: (E, 2) unit normals, outward from ``elems[:, 0]``
        lengths: (E,) edge lengths
        h_e: (E,) mean of the adjacent element diameters (the single diameter on the boundary)
        is_boundary: (E,) boundary flags
    """
    endpoints: IntArray
    elems: IntArray
    local: IntArray
    normals: FloatArray
    lengths: FloatArray
    h_e: FloatArray
    is_boundary: BoolArray

    def __len__(self) -> int:
        return int(self.endpoints.shape[0])


@dataclass(frozen=True, eq=False)
class Mesh:
    """Immutable conforming triangulation.

    Attributes:
        vertices: (N, 2) coordinates
        triangles: (M, 3) counterclockwise vertex indices
        edges: derived edge topology
        tri_edges: (M, 3) edge index of each local edge
        boundary_vertex_flags: (N,) True for vertices on the domain boundary
    """
    vertices: FloatArray
    triangles: IntArray
    edges: EdgeTable
    tri_edges: IntArray
    boundary_vertex_flags: BoolArray

    @property
    def n_vertices(self) -> int:
        return int(self.vertices.shape[0])

    @property
    def n_triangles(self) -> int:
        return int(self.triangles.shape[0])

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    @property
    def interior_edges(self) -> IntArray:
        return np.flatnonzero(~self.edges.is_boundary)

    @property
    def boundary_edges(self) -> IntArray:
        return np.flatnonzero(self.edges.is_boundary)

    def vertex(self, index: int) -> Point2:
        x, y = self.vertices[index]
        return Point2(float(x), float(y))

    def triangle(self, index: int) -> Triangle:
        a, b, c = (int(v) for v in self.triangles[index])
        return Triangle((a, b, c))

    def edge(self, index: int) -> Edge:
        table = self.edges
        boundary = bool(table.is_boundary[index])
        elems = (int(table.elems[index, 0]),) if boundary else (int(table.elems[index, 0]), int(table.elems[index, 1]))
        return Edge(
            endpoints=(int(table.endpoints[index, 0]), int(table.endpoints[index, 1])),
            elems=elems,
            kind="boundary" if boundary else "interior",
            normal=(float(table.normals[index, 0]), float(table.normals[index, 1])),
            length=float(table.lengths[index]),
            h_e=float(table.h_e[index]),
        )

    def areas(self) -> FloatArray:
        return _signed_areas(self.vertices, self.triangles)

    def element_diameters(self) -> FloatArray:
        """h_K: diameters of the circumscribed circles."""
        return _circumdiameters(self.vertices, self.triangles)

    def inscribed_diameters(self) -> FloatArray:
        """rho_K: diameters of the inscribed circles."""
        return _indiameters(self.vertices, self.triangles)

    def barycenters(self) -> FloatArray:
        return np.asarray(self.vertices[self.triangles].mean(axis=1), dtype=float)


def _side_lengths(vertices: FloatArray, triangles: IntArray) -> FloatArray:
    corners = vertices[triangles]
    return np.asarray(np.linalg.norm(np.roll(corners, -1, axis=1) - corners, axis=2), dtype=float)


def _signed_areas(vertices: FloatArray, triangles: IntArray) -> FloatArray:
    p0, p1, p2 = (vertices[triangles[:, k]] for k in range(3))
    cross = (p1[:, 0] - p0[:, 0]) * (p2[:, 1] - p0[:, 1]) - (p1[:, 1] - p0[:, 1]) * (p2[:, 0] - p0[:, 0])
    return np.asarray(0.5 * cross, dtype=float)


def _circumdiameters(vertices: FloatArray, triangles: IntArray) -> FloatArray:
    sides = _side_lengths(vertices, triangles)
    return np.asarray(np.prod(sides, axis=1) / (2.0 * _signed_areas(vertices, triangles)), dtype=float)


def _indiameters(vertices: FloatArray, triangles: IntArray) -> FloatArray:
    sides = _side_lengths(vertices, triangles)
    return np.asarray(4.0 * _signed_areas(vertices, triangles) / sides.sum(axis=1), dtype=float)


def _validate_geometry(vertices: FloatArray, triangles: IntArray) -> None:
    if vertices.ndim != 2 or vertices.shape[1] != 2 or vertices.shape[0] < 3:
        raise MeshValidationError("Vertices must be an (N, 2) array with N >= 3", {"shape": list(vertices.shape)})
    if triangles.ndim != 2 or triangles.shape[1] != 3 or triangles.shape[0] < 1:
        raise MeshValidationError("Triangles must be an (M, 3) array with M >= 1", {"shape": list(triangles.shape)})
    if not np.all(np.isfinite(vertices)):
        raise MeshValidationError("Vertex coordinates must be finite")
    if triangles.min() < 0 or triangles.max() >= vertices.shape[0]:
        raise MeshValidationError("Triangle vertex index out of range")

    a, b, c = triangles[:, 0], triangles[:, 1], triangles[:, 2]
    repeated = np.flatnonzero((a == b) | (b == c) | (a == c))
    if repeated.size:
        raise MeshValidationError("Triangle with repeated vertices", {"triangle": int(repeated[0])})

    areas = _signed_areas(vertices, triangles)
    clockwise = np.flatnonzero(areas <= 0.0)
    if clockwise.size:
        raise MeshValidationError("Triangle is not counterclockwise", {"triangle": int(clockwise[0])})
    longest = _side_lengths(vertices, triangles).max(axis=1)
    degenerate = np.flatnonzero(areas < MIN_AREA_FACTOR * longest ** 2)
    if degenerate.size:
        raise MeshValidationError("Degenerate triangle", {"triangle": int(degenerate[0])})

    unused = np.setdiff1d(np.arange(vertices.shape[0]), triangles.ravel())
    if unused.size:
        raise MeshValidationError("Vertex not used by any triangle", {"vertex": int(unused[0])})


def extract_edges(triangles: IntArray, vertices: FloatArray) -> tuple[EdgeTable, IntArray]:
    """Derive the edge table of a counterclockwise triangulation.

    A vertex pair found in exactly one triangle is a boundary edge, in exactly
    two an interior edge. Edges are ordered lexicographically by their sorted
    endpoints; the adjacent elements of an interior edge are listed in
    increasing index order.

    Args:
        triangles: (M, 3) counterclockwise vertex indices
        vertices: (N, 2) coordinates

    Returns:
        The edge table and the (M, 3) map from local edges to edge indices

    Raises:
        NonConformingMeshError: A vertex pair appears in three or more triangles
        MeshValidationError: Two triangles traverse a shared edge in the same direction (overlap)
    """
    n_vertices = vertices.shape[0]
    n_triangles = triangles.shape[0]
    start = triangles.ravel()
    end = np.roll(triangles, -1, axis=1).ravel()
    lo = np.minimum(start, end).astype(np.int64)
    hi = np.maximum(start, end).astype(np.int64)
    forward = start < end
    owner = np.repeat(np.arange(n_triangles, dtype=np.int64), 3)
    local = np.tile(np.arange(3, dtype=np.int64), n_triangles)

    keys = lo * n_vertices + hi
    order = np.lexsort((owner, keys))
    unique_keys, first, counts = np.unique(keys[order], return_index=True, return_counts=True)
    if np.any(counts > 2):
        bad = int(np.flatnonzero(counts > 2)[0])
        pair = [int(unique_keys[bad] // n_vertices), int(unique_keys[bad] % n_vertices)]
        raise NonConformingMeshError("Vertex pair shared by more than two triangles", {"edge": pair})

    n_edges = unique_keys.shape[0]
    halfedge_to_edge = np.empty(3 * n_triangles, dtype=np.int64)
    halfedge_to_edge[order] = np.repeat(np.arange(n_edges, dtype=np.int64), counts)
    tri_edges = halfedge_to_edge.reshape(n_triangles, 3)

    interior = counts == 2
    primary = order[first]
    secondary = order[first[interior] + 1]
    if np.any(forward[primary[interior]] == forward[secondary]):
        raise MeshValidationError("Adjacent triangles overlap (shared edge traversed in the same direction)")

    elems = np.full((n_edges, 2), -1, dtype=np.int64)
    locs = np.full((n_edges, 2), -1, dtype=np.int64)
    elems[:, 0] = owner[primary]
    locs[:, 0] = local[primary]
    elems[interior, 1] = owner[secondary]
    locs[interior, 1] = local[secondary]

    tail = vertices[triangles[elems[:, 0], locs[:, 0]]]
    head = vertices[triangles[elems[:, 0], (locs[:, 0] + 1) % 3]]
    tangent = head - tail
    lengths = np.hypot(tangent[:, 0], tangent[:, 1])
    normals = np.column_stack((tangent[:, 1], -tangent[:, 0])) / lengths[:, None]

    diameters = _circumdiameters(vertices, triangles)
    h_e = diameters[elems[:, 0]].copy()
    h_e[interior] = 0.5 * (diameters[elems[interior, 0]] + diameters[elems[interior, 1]])

    endpoints = np.column_stack((unique_keys // n_vertices, unique_keys % n_vertices)).astype(np.int64)
    table = EdgeTable(
        endpoints=_frozen(endpoints),
        elems=_frozen(elems),
        local=_frozen(locs),
        normals=_frozen(np.asarray(normals, dtype=float)),
        lengths=_frozen(np.asarray(lengths, dtype=float)),
        h_e=_frozen(np.asarray(h_e, dtype=float)),
        is_boundary=_frozen(~interior),
    )
    return table, _frozen(tri_edges)


def check_topology(mesh: Mesh, simply_connected: bool = True) -> None:
    """Check that the boundary closes into loops and, optionally, Euler's formula V - E + T = 1.

    Raises:
        MeshValidationError: When an invariant fails
    """
    boundary_endpoints = mesh.edges.endpoints[mesh.edges.is_boundary].ravel()
    degree = np.bincount(boundary_endpoints, minlength=mesh.n_vertices)
    if np.any(degree % 2 == 1):
        raise MeshValidationError("Boundary edges do not form closed loops",
                                  {"vertex": int(np.flatnonzero(degree % 2 == 1)[0])})
    if simply_connected:
        euler = mesh.n_vertices - mesh.n_edges + mesh.n_triangles
        if euler != 1:
            raise MeshValidationError("Euler characteristic V - E + T differs from 1", {"euler": euler})


def mesh_from_arrays(vertices: ArrayLike, triangles: ArrayLike, simply_connected: bool = False) -> Mesh:
    """Validate raw arrays and build a :class:`Mesh` with its edge topology.

    Args:
        vertices: (N, 2) coordinates
        triangles: (M, 3) vertex indices, counterclockwise
        simply_connected: Also enforce Euler's formula for a simply connected domain

    Returns:
        The validated mesh
    """
    vertex_array = np.array(vertices, dtype=float)
    try:
        triangle_array = np.array(triangles, dtype=np.int64)
    except (TypeError, ValueError) as e:
        raise MeshValidationError(f"Triangle indices must be integers: {e}") from e
    _validate_geometry(vertex_array, triangle_array)

    edges, tri_edges = extract_edges(triangle_array, vertex_array)
    flags = np.zeros(vertex_array.shape[0], dtype=bool)
    flags[edges.endpoints[edges.is_boundary].ravel()] = True

    mesh = Mesh(
        vertices=_frozen(vertex_array),
        triangles=_frozen(triangle_array),
        edges=edges,
        tri_edges=tri_edges,
        boundary_vertex_flags=_frozen(flags),
    )
    check_topology(mesh, simply_connected=simply_connected)
    return mesh


def _check_resolution(n: int) -> None:
    if isinstance(n, bool) or not isinstance(n, (int, np.integer)) or n < 1:
        raise MeshValidationError(f"Mesh resolution must be a positive integer, got {n!r}")


def _grid_triangles(cells_i: IntArray, cells_j: IntArray, row_length: int) -> IntArray:
    """Split grid cells along the (0,0)-(1,1) diagonal into two counterclockwise triangles."""
    v00 = cells_j * row_length + cells_i
    v10 = v00 + 1
    v01 = v00 + row_length
    v11 = v01 + 1
    lower = np.column_stack((v00, v10, v11))
    upper = np.column_stack((v00, v11, v01))
    return np.stack((lower, upper), axis=1).reshape(-1, 3)


def build_square_mesh(n: int) -> Mesh:
    """Uniform mesh of the unit square (0,1)^2 with 2 n^2 triangles.

    Args:
        n: Number of cells per side

    Returns:
        Mesh with (n+1)^2 vertices and granularity sqrt(2)/n
    """
    _check_resolution(n)
    coords = np.arange(n + 1, dtype=float) / n
    xx, yy = np.meshgrid(coords, coords)
    vertices = np.column_stack((xx.ravel(), yy.ravel()))
    cj, ci = np.divmod(np.arange(n * n, dtype=np.int64), n)
    mesh = mesh_from_arrays(vertices, _grid_triangles(ci, cj, n + 1), simply_connected=True)
    logger.info("Built square mesh", context={"n": int(n), "triangles": mesh.n_triangles, "edges": mesh.n_edges})
    return mesh


def build_lshape_mesh(n: int) -> Mesh:
    """Uniform mesh of the L-shape (-1,1)^2 minus [0,1]x[-1,0].

    The three unit blocks are each split into n x n cells, so the mesh has
    6 n^2 triangles and the re-entrant corner (0, 0) is a vertex.

    Args:
        n: Number of cells per unit length

    Returns:
        Mesh of the L-shaped domain with granularity sqrt(2)/n
    """
    _check_resolution(n)
    row_length = 2 * n + 1
    coords = (np.arange(row_length, dtype=float) - n) / n
    xx, yy = np.meshgrid(coords, coords)
    grid = np.column_stack((xx.ravel(), yy.ravel()))

    cj, ci = np.divmod(np.arange(4 * n * n, dtype=np.int64), 2 * n)
    keep = ~((ci >= n) & (cj < n))
    triangles = _grid_triangles(ci[keep], cj[keep], row_length)

    used = np.unique(triangles)
    renumbered = np.searchsorted(used, triangles)
    mesh = mesh_from_arrays(grid[used], renumbered, simply_connected=True)
    logger.info("Built L-shape mesh", context={"n": int(n), "triangles": mesh.n_triangles, "edges": mesh.n_edges})
    return mesh


def refine_uniform(mesh: Mesh) -> Mesh:
    """Split every triangle into four congruent children through its edge midpoints.

    Midpoint of edge ``e`` becomes vertex ``n_vertices + e``. Children of
    ``(a, b, c)`` are ``(a, ab, ca)``, ``(ab, b, bc)``, ``(ca, bc, c)`` and
    ``(ab, bc, ca)``, in that order.
    """
    endpoints = mesh.edges.endpoints
    midpoints = 0.5 * (mesh.vertices[endpoints[:, 0]] + mesh.vertices[endpoints[:, 1]])
    vertices = np.vstack((mesh.vertices, midpoints))

    a, b, c = mesh.triangles[:, 0], mesh.triangles[:, 1], mesh.triangles[:, 2]
    mid = mesh.tri_edges + mesh.n_vertices
    ab, bc, ca = mid[:, 0], mid[:, 1], mid[:, 2]
    children = np.stack((
        np.column_stack((a, ab, ca)),
        np.column_stack((ab, b, bc)),
        np.column_stack((ca, bc, c)),
        np.column_stack((ab, bc, ca)),
    ), axis=1).reshape(-1, 3)

    euler = mesh.n_vertices - mesh.n_edges + mesh.n_triangles
    refined = mesh_from_arrays(vertices, children, simply_connected=euler == 1)
    logger.debug("Refined mesh", context={"triangles": refined.n_triangles, "vertices": refined.n_vertices})
    return refined


def mesh_metrics(mesh: Mesh) -> MeshMetrics:
    """Granularity h = max h_K, the largest h_K / rho_K and the largest h / h_K."""
    h_k = mesh.element_diameters()
    rho_k = mesh.inscribed_diameters()
    if not (np.all(np.isfinite(h_k)) and np.all(rho_k > 0)):
        raise MeshValidationError("Degenerate triangle in metric computation")
    h = float(h_k.max())
    return MeshMetrics(
        h=h,
        max_shape_ratio=float((h_k / rho_k).max()),
        quasi_uniformity=float(h / h_k.min()),
    )


def swap_edge_orientation(mesh: Mesh, edge_ids: Sequence[int]) -> Mesh:
    """Return a copy in which the listed interior edges store their elements in reverse order.

    The normal of each swapped edge is negated so it keeps pointing out of
    the first listed element. Jump and mean pairings are invariant under this.
    """
    ids = np.asarray(edge_ids, dtype=np.int64)
    if np.any(mesh.edges.is_boundary[ids]):
        raise MeshValidationError("Only interior edges have a second element to swap with")
    elems = mesh.edges.elems.copy()
    local = mesh.edges.local.copy()
    normals = mesh.edges.normals.copy()
    elems[ids] = elems[ids][:, ::-1]
    local[ids] = local[ids][:, ::-1]
    normals[ids] = -normals[ids]
    edges = EdgeTable(
        endpoints=mesh.edges.endpoints,
        elems=_frozen(elems),
        local=_frozen(local),
        normals=_frozen(normals),
        lengths=mesh.edges.lengths,
        h_e=mesh.edges.h_e,
        is_boundary=mesh.edges.is_boundary,
    )
    return Mesh(mesh.vertices, mesh.triangles, edges, mesh.tri_edges, mesh.boundary_vertex_flags)


def domain_area(mesh: Mesh) -> float:
    return math.fsum(mesh.areas().tolist())
