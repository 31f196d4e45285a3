"""Gauss quadrature on the reference triangle and the reference edge.

Edge rules are Gauss-Legendre rules mapped to [0, 1]. Triangle rules are
collapsed (Duffy) products of a Gauss-Jacobi rule in the first coordinate
and a Gauss-Legendre rule in the second, so every weight is positive and the
points lie strictly inside the reference triangle
{(xi, eta): xi, eta >= 0, xi + eta <= 1}.
"""
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from numpy.typing import NDArray
from scipy.special import roots_jacobi, roots_legendre

from sipdg.models.common.error_models import QuadratureDegreeError

MAX_DEGREE = 10

FloatArray = NDArray[np.float64]


@dataclass(frozen=True, eq=False)
class QuadRuleTri:
    """Rule on the reference triangle.

    Attributes:
        barycentric: (Q, 3) barycentric coordinates (1 - xi - eta, xi, eta)
        weights: (Q,) positive weights summing to 1/2
        degree: requested exactness degree
    """
    barycentric: FloatArray
    weights: FloatArray
    degree: int

    @property
    def points(self) -> FloatArray:
        """(Q, 2) reference coordinates (xi, eta)."""
        return self.barycentric[:, 1:]


@dataclass(frozen=True, eq=False)
class QuadRuleEdge:
    """Rule on [0, 1] with positive weights summing to 1."""
    points: FloatArray
    weights: FloatArray
    degree: int


def _check_degree(d: int) -> None:
    if isinstance(d, bool) or not isinstance(d, (int, np.integer)) or not 0 <= d <= MAX_DEGREE:
        raise QuadratureDegreeError(f"Quadrature degree must be an integer in [0, {MAX_DEGREE}], got {d!r}")


def _n_points(d: int) -> int:
    # n-point Gauss rules integrate degree 2n - 1 exactly
    return d // 2 + 1


@lru_cache(maxsize=None, typed=True)
def make_quad_edge(d: int) -> QuadRuleEdge:
    """Gauss-Legendre rule on [0, 1] exact for polynomials of degree <= d."""
    _check_degree(d)
    x, w = roots_legendre(_n_points(d))
    points = 0.5 * (np.asarray(x, dtype=float) + 1.0)
    weights = 0.5 * np.asarray(w, dtype=float)
    points.setflags(write=False)
    weights.setflags(write=False)
    return QuadRuleEdge(points=points, weights=weights, degree=int(d))


@lru_cache(maxsize=None, typed=True)
def make_quad_tri(d: int) -> QuadRuleTri:
    """Collapsed Gauss rule on the reference triangle exact for total degree <= d.

    With xi = s and eta = t (1 - s) the integral over the triangle becomes
    the integral over the unit square of f(s, t (1 - s)) (1 - s); the factor
    (1 - s) is absorbed into a Gauss-Jacobi weight.
    """
    _check_degree(d)
    n = _n_points(d)
    xs, ws = roots_jacobi(n, 1.0, 0.0)
    xt, wt = roots_legendre(n)
    s = 0.5 * (np.asarray(xs, dtype=float) + 1.0)
    t = 0.5 * (np.asarray(xt, dtype=float) + 1.0)
    s_weights = 0.25 * np.asarray(ws, dtype=float)
    t_weights = 0.5 * np.asarray(wt, dtype=float)

    ss, tt = np.meshgrid(s, t, indexing="ij")
    xi = ss.ravel()
    eta = (tt * (1.0 - ss)).ravel()
    weights = np.outer(s_weights, t_weights).ravel()
    barycentric = np.column_stack((1.0 - xi - eta, xi, eta))
    barycentric.setflags(write=False)
    weights.setflags(write=False)
    return QuadRuleTri(barycentric=barycentric, weights=weights, degree=int(d))
