"""Discontinuous piecewise polynomial spaces.

:class:`ReferenceBasis` is the nodal Lagrange basis of degree r on the
reference triangle, :class:`DofMap` numbers element-local DOFs globally
without any sharing between elements, and :class:`DgSpace` ties both to a
mesh through the affine element maps x = p0 + B_K xi.
"""
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from numpy.typing import NDArray

from sipdg.models.common.error_models import BasisDegreeError, PointLocationError
from sipdg.models.domain.fields import ScalarField
from sipdg.models.domain.mesh import Mesh, Point2
from sipdg.models.domain.quadrature import MAX_DEGREE
from sipdg.utils.logging import get_logger

logger = get_logger(__name__)

FloatArray = NDArray[np.float64]
IntArray = NDArray[np.int64]

BARYCENTRIC_TOLERANCE = 1e-12
# edge terms of the system matrix integrate polynomials of degree 2r + 2
MAX_SPACE_DEGREE = (MAX_DEGREE - 2) // 2


def _lattice_nodes(r: int) -> FloatArray:
    """Degree-r lattice ordered vertices, then edge nodes along local edges 0, 1, 2, then interior nodes."""
    vertices = [(0, 0), (r, 0), (0, r)]
    edge_nodes = [(k, 0) for k in range(1, r)]
    edge_nodes += [(r - k, k) for k in range(1, r)]
    edge_nodes += [(0, r - k) for k in range(1, r)]
    interior = [(i, j) for j in range(1, r) for i in range(1, r) if i + j < r]
    return np.asarray(vertices + edge_nodes + interior, dtype=float) / r


def _exponents(r: int) -> IntArray:
    return np.asarray([(a, total - a) for total in range(r + 1) for a in range(total, -1, -1)], dtype=np.int64)


@dataclass(frozen=True, eq=False)
class ReferenceBasis:
    """Nodal Lagrange basis of P^r on the reference triangle.

    Basis function i is sum_m xi^a_m eta^b_m coefficients[m, i] and equals
    one at ``nodes[i]``, zero at every other node.
    """
    degree: int
    nodes: FloatArray
    exponents: IntArray
    coefficients: FloatArray

    @property
    def n_loc(self) -> int:
        return (self.degree + 1) * (self.degree + 2) // 2

    def values(self, points: FloatArray) -> FloatArray:
        """(Q, n_loc) basis values at (Q, 2) reference points."""
        pts = np.asarray(points, dtype=float).reshape(-1, 2)
        monomials = pts[:, 0:1] ** self.exponents[:, 0] * pts[:, 1:2] ** self.exponents[:, 1]
        return np.asarray(monomials @ self.coefficients, dtype=float)

    def gradients(self, points: FloatArray) -> FloatArray:
        """(Q, n_loc, 2) reference gradients at (Q, 2) reference points."""
        pts = np.asarray(points, dtype=float).reshape(-1, 2)
        a = self.exponents[:, 0]
        b = self.exponents[:, 1]
        xi, eta = pts[:, 0:1], pts[:, 1:2]
        d_xi = a * xi ** np.maximum(a - 1, 0) * eta ** b
        d_eta = b * xi ** a * eta ** np.maximum(b - 1, 0)
        return np.stack((d_xi @ self.coefficients, d_eta @ self.coefficients), axis=2)


@lru_cache(maxsize=None, typed=True)
def make_basis(r: int) -> ReferenceBasis:
    """Lagrange basis of degree r at the standard equispaced lattice.

    Args:
        r: Polynomial degree, at least 1

    Returns:
        The reference basis; for r = 1 these are the barycentric coordinates
    """
    if isinstance(r, bool) or not isinstance(r, (int, np.integer)) or r < 1:
        raise BasisDegreeError(f"Polynomial degree must be an integer >= 1, got {r!r}")
    nodes = _lattice_nodes(int(r))
    exponents = _exponents(int(r))
    vandermonde = nodes[:, 0:1] ** exponents[:, 0] * nodes[:, 1:2] ** exponents[:, 1]
    coefficients = np.linalg.solve(vandermonde, np.eye(nodes.shape[0]))
    for array in (nodes, exponents, coefficients):
        array.setflags(write=False)
    return ReferenceBasis(degree=int(r), nodes=nodes, exponents=exponents, coefficients=coefficients)


@dataclass(frozen=True)
class DofMap:
    """Global DOF g = element * n_loc + local; no DOF is shared between elements."""
    n_loc: int
    n_elements: int

    @property
    def total_dofs(self) -> int:
        return self.n_loc * self.n_elements

    def global_index(self, element: int, local: int) -> int:
        if not (0 <= element < self.n_elements and 0 <= local < self.n_loc):
            raise IndexError(f"(element={element}, local={local}) outside the DOF map")
        return element * self.n_loc + local

    def local_index(self, dof: int) -> tuple[int, int]:
        if not 0 <= dof < self.total_dofs:
            raise IndexError(f"DOF {dof} outside [0, {self.total_dofs})")
        element, local = divmod(dof, self.n_loc)
        return element, local

    def element_dofs(self, element: int) -> IntArray:
        return np.arange(element * self.n_loc, (element + 1) * self.n_loc, dtype=np.int64)

    def all_element_dofs(self) -> IntArray:
        """(M, n_loc) DOF indices of every element."""
        return np.arange(self.total_dofs, dtype=np.int64).reshape(self.n_elements, self.n_loc)


@dataclass(frozen=True, eq=False)
class DgSpace:
    """V_h on a mesh: reference basis, DOF map and affine element geometry.

    Attributes:
        origins: (M, 2) first vertex p0 of each element
        jacobians: (M, 2, 2) B_K with columns p1 - p0 and p2 - p0
        inverse_jacobians: (M, 2, 2) B_K^{-1}
        determinants: (M,) det B_K = 2 |K|
    """
    mesh: Mesh
    basis: ReferenceBasis
    dofmap: DofMap
    origins: FloatArray
    jacobians: FloatArray
    inverse_jacobians: FloatArray
    determinants: FloatArray

    @property
    def degree(self) -> int:
        return self.basis.degree

    @property
    def total_dofs(self) -> int:
        return self.dofmap.total_dofs

    def to_physical(self, elements: IntArray, ref_points: FloatArray) -> FloatArray:
        """Map reference points to physical coordinates.

        ``ref_points`` is either (Q, 2), shared by all elements, or (K, Q, 2).
        Returns (K, Q, 2).
        """
        ref = np.asarray(ref_points, dtype=float)
        if ref.ndim == 2:
            mapped = np.einsum("kab,qb->kqa", self.jacobians[elements], ref)
        else:
            mapped = np.einsum("kab,kqb->kqa", self.jacobians[elements], ref)
        return np.asarray(mapped + self.origins[elements][:, None, :], dtype=float)

    def to_reference(self, elements: IntArray, points: FloatArray) -> FloatArray:
        """Map (K, Q, 2) physical points to the reference coordinates of the given elements."""
        shifted = np.asarray(points, dtype=float) - self.origins[elements][:, None, :]
        return np.asarray(np.einsum("kab,kqb->kqa", self.inverse_jacobians[elements], shifted), dtype=float)

    def physical_gradients(self, elements: IntArray, ref_gradients: FloatArray) -> FloatArray:
        """Apply B_K^{-T} to reference gradients.

        ``ref_gradients`` is (Q, n_loc, 2) shared by all elements or
        (K, Q, n_loc, 2); the result is (K, Q, n_loc, 2).
        """
        inv = self.inverse_jacobians[elements]
        if ref_gradients.ndim == 3:
            return np.asarray(np.einsum("kba,qib->kqia", inv, ref_gradients), dtype=float)
        return np.asarray(np.einsum("kba,kqib->kqia", inv, ref_gradients), dtype=float)

    def nodal_points(self) -> FloatArray:
        """(M, n_loc, 2) physical coordinates of every element's nodes."""
        return self.to_physical(np.arange(self.mesh.n_triangles), self.basis.nodes)

    def element_coefficients(self, coeffs: FloatArray) -> FloatArray:
        """Reshape a global coefficient vector to (M, n_loc)."""
        vector = np.asarray(coeffs, dtype=float)
        if vector.shape != (self.total_dofs,):
            raise ValueError(f"Coefficient vector has shape {vector.shape}, expected ({self.total_dofs},)")
        return vector.reshape(self.dofmap.n_elements, self.dofmap.n_loc)


def build_space(mesh: Mesh, r: int) -> DgSpace:
    """Assemble V_h of degree r on ``mesh``.

    Raises:
        BasisDegreeError: r outside [1, MAX_SPACE_DEGREE]
    """
    basis = make_basis(r)
    if basis.degree > MAX_SPACE_DEGREE:
        raise BasisDegreeError(
            f"Polynomial degree r={basis.degree} exceeds {MAX_SPACE_DEGREE}, the highest degree the quadrature "
            f"rules integrate exactly"
        )
    corners = mesh.vertices[mesh.triangles]
    origins = corners[:, 0, :].copy()
    jacobians = np.stack((corners[:, 1, :] - origins, corners[:, 2, :] - origins), axis=2)
    determinants = jacobians[:, 0, 0] * jacobians[:, 1, 1] - jacobians[:, 0, 1] * jacobians[:, 1, 0]
    inverse = np.empty_like(jacobians)
    inverse[:, 0, 0] = jacobians[:, 1, 1] / determinants
    inverse[:, 0, 1] = -jacobians[:, 0, 1] / determinants
    inverse[:, 1, 0] = -jacobians[:, 1, 0] / determinants
    inverse[:, 1, 1] = jacobians[:, 0, 0] / determinants
    for array in (origins, jacobians, determinants, inverse):
        array.setflags(write=False)

    space = DgSpace(
        mesh=mesh,
        basis=basis,
        dofmap=DofMap(n_loc=basis.n_loc, n_elements=mesh.n_triangles),
        origins=origins,
        jacobians=jacobians,
        inverse_jacobians=inverse,
        determinants=determinants,
    )
    logger.debug("Built DG space", context={"degree": basis.degree, "dofs": space.total_dofs})
    return space


def _locate(space: DgSpace, element: int, point: Point2) -> FloatArray:
    ref = space.to_reference(np.asarray([element]), np.asarray([[[point[0], point[1]]]], dtype=float))[0, 0]
    barycentric = np.array([1.0 - ref[0] - ref[1], ref[0], ref[1]])
    if barycentric.min() < -BARYCENTRIC_TOLERANCE:
        raise PointLocationError(
            f"Point ({point[0]}, {point[1]}) lies outside element {element}",
            {"element": element, "barycentric": barycentric.tolist()},
        )
    return np.asarray(ref, dtype=float)


def eval_on_element(space: DgSpace, element: int, coeffs: FloatArray, point: Point2) -> float:
    """Value of the discrete function restricted to ``element`` at ``point``.

    Raises:
        PointLocationError: The point is outside the element closure
    """
    ref = _locate(space, element, point)
    local = space.element_coefficients(coeffs)[element]
    return float(space.basis.values(ref[None, :])[0] @ local)


def eval_gradient_on_element(space: DgSpace, element: int, coeffs: FloatArray, point: Point2) -> FloatArray:
    """Gradient of the restriction to ``element`` at ``point``, mapped by B_K^{-T}."""
    ref = _locate(space, element, point)
    local = space.element_coefficients(coeffs)[element]
    grads = space.physical_gradients(np.asarray([element]), space.basis.gradients(ref[None, :]))[0, 0]
    return np.asarray(local @ grads, dtype=float)


def interpolate(space: DgSpace, field: ScalarField) -> FloatArray:
    """Element-wise Lagrange interpolant: the field's values at every element's mapped nodes."""
    nodes = space.nodal_points()
    values = field.value(nodes[..., 0], nodes[..., 1])
    return np.asarray(np.broadcast_to(values, nodes.shape[:2]), dtype=float).ravel()


def interior_dofs(space: DgSpace) -> IntArray:
    """DOFs of functions supported away from the boundary: elements without a boundary vertex."""
    touches_boundary = space.mesh.boundary_vertex_flags[space.mesh.triangles].any(axis=1)
    return np.asarray(space.dofmap.all_element_dofs()[~touches_boundary].ravel(), dtype=np.int64)
