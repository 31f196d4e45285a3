"""SIPDG system matrix, load vector and edge trace operators.

a(u, v) = sum_K int_K grad u . grad v
          - sum_e int_e ({grad u} . [v] + {grad v} . [u])
          + sum_e sigma / h_e int_e [u] . [v]

F(v) = int f v + sum_{e on the boundary} int_e g (sigma / h_e v - grad v . n)

On an interior edge with stored normal n (outward from the first element)
[v] = (v1 - v2) n and {v} = (v1 + v2) / 2; on a boundary edge [v] = v n and
{v} = v. Everything is vectorized over elements and edges and collected into
a COO matrix that is converted to CSR once.
"""
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np
import scipy.sparse as sp
from numpy.typing import ArrayLike, NDArray

from sipdg.models.common.error_models import PenaltyParameterError
from sipdg.models.domain.dgspace import DgSpace, interior_dofs, interpolate
from sipdg.models.domain.fields import ScalarField
from sipdg.models.domain.quadrature import MAX_DEGREE, QuadRuleEdge, make_quad_edge, make_quad_tri
from sipdg.utils.logging import get_logger
from sipdg.utils.validation import validate_output_path

logger = get_logger(__name__)

FloatArray = NDArray[np.float64]
IntArray = NDArray[np.int64]

_REFERENCE_VERTICES = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])


def matrix_degree(r: int) -> tuple[int, int]:
    """Triangle and edge quadrature degrees used for the bilinear form."""
    return 2 * r, 2 * r + 2


def load_degree(r: int) -> int:
    """Quadrature degree for load vector integrals of non-polynomial data."""
    return min(2 * r + 4, MAX_DEGREE)


def _check_sigma(sigma: float) -> float:
    value = float(sigma)
    if not np.isfinite(value) or value <= 0.0:
        raise PenaltyParameterError(f"Penalty parameter must be positive and finite, got {sigma!r}")
    return value


@dataclass(frozen=True, eq=False)
class EdgeSideBasis:
    """Basis data of one side of a batch of edges at edge quadrature points.

    Attributes:
        elements: (E,) element on this side
        values: (E, Q, n_loc) basis values
        gradients: (E, Q, n_loc, 2) physical basis gradients
    """
    elements: IntArray
    values: FloatArray
    gradients: FloatArray


def edge_reference_points(local_edges: IntArray, t: FloatArray) -> FloatArray:
    """(E, Q, 2) reference points along the given local edges.

    ``t`` is either (Q,), shared by all edges, or (E, Q) per edge.
    """
    tail = _REFERENCE_VERTICES[local_edges]
    head = _REFERENCE_VERTICES[(local_edges + 1) % 3]
    params = np.asarray(t, dtype=float)
    if params.ndim == 1:
        params = params[None, :]
    return np.asarray(tail[:, None, :] + params[..., None] * (head - tail)[:, None, :], dtype=float)


def edge_side_basis(space: DgSpace, edge_ids: IntArray, side: int, t: FloatArray) -> EdgeSideBasis:
    """Evaluate the basis of side ``side`` of each edge at parameters ``t``.

    ``t`` runs from the tail to the head of the edge as the first element
    traverses it; the second element traverses it the other way, so its
    local parameter is 1 - t and both sides see the same physical points.
    """
    table = space.mesh.edges
    elements = table.elems[edge_ids, side]
    params = t if side == 0 else 1.0 - t
    ref = edge_reference_points(table.local[edge_ids, side], params)
    n_edges, n_q = ref.shape[0], ref.shape[1]
    flat = ref.reshape(-1, 2)
    values = space.basis.values(flat).reshape(n_edges, n_q, -1)
    ref_grads = space.basis.gradients(flat).reshape(n_edges, n_q, -1, 2)
    gradients = space.physical_gradients(elements, ref_grads)
    return EdgeSideBasis(elements=elements, values=values, gradients=gradients)


def edge_points(space: DgSpace, edge_ids: IntArray, t: FloatArray) -> FloatArray:
    """(E, Q, 2) physical points along edges, parameterized from the first element's side."""
    table = space.mesh.edges
    ref = edge_reference_points(table.local[edge_ids, 0], t)
    return space.to_physical(table.elems[edge_ids, 0], ref)


def _symmetrized(blocks: FloatArray) -> FloatArray:
    return np.asarray(0.5 * (blocks + np.swapaxes(blocks, 1, 2)), dtype=float)


def _volume_blocks(space: DgSpace) -> FloatArray:
    rule = make_quad_tri(matrix_degree(space.degree)[0])
    elements = np.arange(space.mesh.n_triangles)
    grads = space.physical_gradients(elements, space.basis.gradients(rule.points))
    weights = rule.weights[None, :] * np.abs(space.determinants)[:, None]
    return _symmetrized(np.einsum("kq,kqia,kqja->kij", weights, grads, grads))


def _edge_blocks(
    space: DgSpace, edge_ids: IntArray, rule: QuadRuleEdge, sigma: float, interior: bool
) -> tuple[FloatArray, IntArray]:
    """Local edge matrices -(P + P^T) + sigma/h_e J^T W J and their DOF indices."""
    table = space.mesh.edges
    normals = table.normals[edge_ids]
    side0 = edge_side_basis(space, edge_ids, 0, rule.points)
    grad_n0 = np.einsum("eqia,ea->eqi", side0.gradients, normals)
    dofs0 = space.dofmap.all_element_dofs()[side0.elements]
    if interior:
        side1 = edge_side_basis(space, edge_ids, 1, rule.points)
        grad_n1 = np.einsum("eqia,ea->eqi", side1.gradients, normals)
        jump = np.concatenate((side0.values, -side1.values), axis=2)
        mean_flux = 0.5 * np.concatenate((grad_n0, grad_n1), axis=2)
        dofs = np.concatenate((dofs0, space.dofmap.all_element_dofs()[side1.elements]), axis=1)
    else:
        jump = side0.values
        mean_flux = grad_n0
        dofs = dofs0

    weights = rule.weights[None, :] * table.lengths[edge_ids][:, None]
    consistency = np.einsum("eq,eqi,eqj->eij", weights, jump, mean_flux)
    penalty = np.einsum("eq,eqi,eqj->eij", weights, jump, jump) * (sigma / table.h_e[edge_ids])[:, None, None]
    blocks = -(consistency + np.swapaxes(consistency, 1, 2)) + _symmetrized(penalty)
    return np.asarray(blocks, dtype=float), dofs


def _scatter(blocks: FloatArray, dofs: IntArray) -> tuple[IntArray, IntArray, FloatArray]:
    size = dofs.shape[1]
    rows = np.repeat(dofs, size, axis=1).ravel()
    cols = np.tile(dofs, (1, size)).ravel()
    return rows, cols, blocks.ravel()


def assemble_matrix(space: DgSpace, sigma: float) -> sp.csr_matrix:
    """Assemble the SIPDG stiffness matrix.

    Args:
        space: DG space on the mesh
        sigma: Penalty parameter, must be positive

    Returns:
        Symmetric CSR matrix of size total_dofs with sorted column indices

    Raises:
        PenaltyParameterError: sigma <= 0 or not finite
    """
    sigma = _check_sigma(sigma)
    mesh = space.mesh
    edge_rule = make_quad_edge(matrix_degree(space.degree)[1])

    parts = [_scatter(_volume_blocks(space), space.dofmap.all_element_dofs())]
    interior = mesh.interior_edges
    if interior.size:
        parts.append(_scatter(*_edge_blocks(space, interior, edge_rule, sigma, interior=True)))
    boundary = mesh.boundary_edges
    if boundary.size:
        parts.append(_scatter(*_edge_blocks(space, boundary, edge_rule, sigma, interior=False)))

    rows = np.concatenate([part[0] for part in parts])
    cols = np.concatenate([part[1] for part in parts])
    data = np.concatenate([part[2] for part in parts])
    n = space.total_dofs
    matrix = sp.coo_matrix((data, (rows, cols)), shape=(n, n)).tocsr()
    matrix.sum_duplicates()
    matrix.sort_indices()
    logger.info("Assembled system matrix", context={"dofs": n, "nnz": int(matrix.nnz), "sigma": sigma})
    return matrix


def assemble_rhs(space: DgSpace, f: ScalarField, g: ScalarField, sigma: float) -> FloatArray:
    """Load vector F(phi_i) for every global basis function.

    The boundary data term only touches DOFs of elements owning a boundary edge.
    """
    sigma = _check_sigma(sigma)
    mesh = space.mesh
    degree = load_degree(space.degree)
    rhs = np.zeros(space.total_dofs, dtype=float)
    dofs = space.dofmap.all_element_dofs()

    rule = make_quad_tri(degree)
    elements = np.arange(mesh.n_triangles)
    points = space.to_physical(elements, rule.points)
    f_values = f.value(points[..., 0], points[..., 1])
    weights = rule.weights[None, :] * np.abs(space.determinants)[:, None]
    volume = np.einsum("kq,kq,qi->ki", weights, f_values, space.basis.values(rule.points))
    np.add.at(rhs, dofs.ravel(), volume.ravel())

    boundary = mesh.boundary_edges
    if boundary.size:
        edge_rule = make_quad_edge(degree)
        side = edge_side_basis(space, boundary, 0, edge_rule.points)
        xs = edge_points(space, boundary, edge_rule.points)
        g_values = g.value(xs[..., 0], xs[..., 1])
        normals = mesh.edges.normals[boundary]
        grad_n = np.einsum("eqia,ea->eqi", side.gradients, normals)
        penalty = (sigma / mesh.edges.h_e[boundary])[:, None, None]
        edge_weights = edge_rule.weights[None, :] * mesh.edges.lengths[boundary][:, None]
        contributions = np.einsum("eq,eq,eqi->ei", edge_weights, g_values, penalty * side.values - grad_n)
        np.add.at(rhs, dofs[side.elements].ravel(), contributions.ravel())

    logger.debug("Assembled load vector", context={"f": f.name, "g": g.name, "norm": float(np.linalg.norm(rhs))})
    return rhs


@dataclass(frozen=True, eq=False)
class EdgeTrace:
    """One-sided traces of a discrete function on one edge at edge quadrature points.

    ``values`` has one row per side (two on interior edges, one on the
    boundary); ``gradients`` is (sides, Q, 2).
    """
    edge: int
    is_boundary: bool
    normal: FloatArray
    points: FloatArray
    weights: FloatArray
    values: FloatArray
    gradients: FloatArray


@dataclass(frozen=True, eq=False)
class JumpMean:
    """Jump and mean operators at the quadrature points of one edge."""
    jump: FloatArray
    mean: FloatArray
    grad_jump: FloatArray
    grad_mean: FloatArray


def edge_traces(space: DgSpace, coeffs: ArrayLike, edge: int, degree: Optional[int] = None) -> EdgeTrace:
    """Evaluate both one-sided traces of ``coeffs`` on ``edge``.

    Args:
        space: DG space
        coeffs: Global coefficient vector
        edge: Edge index
        degree: Edge quadrature degree; defaults to the matrix edge degree
    """
    table = space.mesh.edges
    if not 0 <= edge < len(table):
        raise IndexError(f"Edge {edge} outside [0, {len(table)})")
    rule = make_quad_edge(matrix_degree(space.degree)[1] if degree is None else degree)
    local = space.element_coefficients(np.asarray(coeffs, dtype=float))
    ids = np.asarray([edge])
    boundary = bool(table.is_boundary[edge])

    values = []
    gradients = []
    for side in (0,) if boundary else (0, 1):
        basis = edge_side_basis(space, ids, side, rule.points)
        c = local[basis.elements[0]]
        values.append(basis.values[0] @ c)
        gradients.append(np.einsum("qia,i->qa", basis.gradients[0], c))

    return EdgeTrace(
        edge=int(edge),
        is_boundary=boundary,
        normal=np.asarray(table.normals[edge], dtype=float),
        points=edge_points(space, ids, rule.points)[0],
        weights=rule.weights * table.lengths[edge],
        values=np.asarray(values, dtype=float),
        gradients=np.asarray(gradients, dtype=float),
    )


def jump_mean(trace: EdgeTrace, normal: Optional[ArrayLike] = None) -> JumpMean:
    """Jump [v] (vector), mean {v}, normal gradient jump [grad v] and mean gradient {grad v}."""
    n = trace.normal if normal is None else np.asarray(normal, dtype=float)
    if trace.is_boundary:
        v = trace.values[0]
        grad = trace.gradients[0]
        return JumpMean(jump=v[:, None] * n, mean=v.copy(), grad_jump=grad @ n, grad_mean=grad.copy())
    v1, v2 = trace.values
    g1, g2 = trace.gradients
    return JumpMean(
        jump=(v1 - v2)[:, None] * n,
        mean=0.5 * (v1 + v2),
        grad_jump=(g1 - g2) @ n,
        grad_mean=0.5 * (g1 + g2),
    )


def bilinear_form(matrix: sp.spmatrix, u: ArrayLike, v: ArrayLike) -> float:
    """a(u, v) = u^T A v for coefficient vectors."""
    return float(np.asarray(u, dtype=float) @ (matrix @ np.asarray(v, dtype=float)))


def residual_consistency_check(
    space: DgSpace, u_exact: ScalarField, f: ScalarField, g: ScalarField, sigma: float
) -> float:
    """max_i |a(I u, phi_i) - F(phi_i)| with I the element-wise interpolant.

    Zero up to round-off when u is a global polynomial of degree <= r.
    """
    matrix = assemble_matrix(space, sigma)
    rhs = assemble_rhs(space, f, g, sigma)
    residual = matrix @ interpolate(space, u_exact) - rhs
    value = float(np.max(np.abs(residual)))
    logger.debug("Consistency residual", context={"field": u_exact.name, "residual": value})
    return value


def integration_by_parts_defect(space: DgSpace, u: ArrayLike, v: ArrayLike) -> float:
    """Relative defect of the DG integration by parts identity.

    Compares sum_K int_{dK} (grad u . n_K) v with
    sum_interior int_e ({grad u} . [v] + [grad u] {v}) + sum_boundary int_e (grad u . n) v.
    """
    mesh = space.mesh
    rule = make_quad_edge(matrix_degree(space.degree)[1])
    cu = space.element_coefficients(np.asarray(u, dtype=float))
    cv = space.element_coefficients(np.asarray(v, dtype=float))
    lengths = mesh.edges.lengths

    def traces(edge_ids: IntArray, side: int) -> tuple[FloatArray, FloatArray]:
        basis = edge_side_basis(space, edge_ids, side, rule.points)
        grad_u = np.einsum("eqia,ei->eqa", basis.gradients, cu[basis.elements])
        val_v = np.einsum("eqi,ei->eq", basis.values, cv[basis.elements])
        return grad_u, val_v

    element_sum = 0.0
    edge_sum = 0.0
    interior = mesh.interior_edges
    if interior.size:
        n = mesh.edges.normals[interior]
        w = rule.weights[None, :] * lengths[interior][:, None]
        gu1, v1 = traces(interior, 0)
        gu2, v2 = traces(interior, 1)
        flux1 = np.einsum("eqa,ea->eq", gu1, n)
        flux2 = np.einsum("eqa,ea->eq", gu2, n)
        element_sum += float(np.sum(w * (flux1 * v1 - flux2 * v2)))
        mean_flux = 0.5 * (flux1 + flux2)
        edge_sum += float(np.sum(w * (mean_flux * (v1 - v2) + (flux1 - flux2) * 0.5 * (v1 + v2))))
    boundary = mesh.boundary_edges
    if boundary.size:
        n = mesh.edges.normals[boundary]
        w = rule.weights[None, :] * lengths[boundary][:, None]
        gu, vb = traces(boundary, 0)
        flux = np.einsum("eqa,ea->eq", gu, n)
        element_sum += float(np.sum(w * flux * vb))
        edge_sum += float(np.sum(w * flux * vb))
    return abs(element_sum - edge_sum) / max(1.0, abs(element_sum))


def discrete_harmonic_residual(space: DgSpace, matrix: sp.spmatrix, coeffs: ArrayLike) -> float:
    """max |a(u_h, chi)| over basis functions chi supported away from the boundary."""
    dofs = interior_dofs(space)
    if dofs.size == 0:
        return 0.0
    action = matrix @ np.asarray(coeffs, dtype=float)
    return float(np.max(np.abs(action[dofs])))


def export_triplets(matrix: sp.spmatrix, path: str) -> None:
    """Write the nonzeros as ``i j value`` lines in row-major order.

    Raises:
        ValidationError: ``path`` is not a writable file location
    """
    validate_output_path(path).raise_if_invalid()
    coo = sp.coo_matrix(matrix)
    order = np.lexsort((coo.col, coo.row))
    target = Path(path)
    with target.open("w", encoding="utf-8") as handle:
        for i, j, value in zip(coo.row[order], coo.col[order], coo.data[order]):
            handle.write(f"{int(i)} {int(j)} {float(value):.17g}\n")
    logger.info("Exported matrix triplets", context={"path": str(target), "nnz": int(coo.nnz)})
