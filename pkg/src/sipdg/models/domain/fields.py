"""Analytic scalar fields and the model problems built from them.

A :class:`ScalarField` evaluates vectorized over numpy arrays of x and y.
A :class:`Problem` bundles the source term f, the Dirichlet data g and,
when known, the exact solution of -Laplace(u) = f, u = g on the boundary.
"""
import math
from dataclasses import dataclass
from typing import Callable, Literal, Optional

import numpy as np
from numpy.typing import ArrayLike, NDArray

from sipdg.models.common.error_models import ExperimentError

FloatArray = NDArray[np.float64]
ValueFn = Callable[[FloatArray, FloatArray], FloatArray]
GradientFn = Callable[[FloatArray, FloatArray], tuple[FloatArray, FloatArray]]

Smoothness = Literal["polynomial", "smooth", "singular"]


@dataclass(frozen=True)
class ScalarField:
    """Value and gradient evaluators of a function of (x, y).

    Both evaluators accept arrays of any matching shape. ``gradient``
    returns a pair (d/dx, d/dy) of arrays of that shape.
    """
    value_fn: ValueFn
    gradient_fn: GradientFn
    name: str = "field"
    smoothness: Smoothness = "smooth"

    def value(self, x: ArrayLike, y: ArrayLike) -> FloatArray:
        xs, ys = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
        return np.asarray(np.broadcast_to(self.value_fn(xs, ys), xs.shape), dtype=float)

    def gradient(self, x: ArrayLike, y: ArrayLike) -> FloatArray:
        """Gradient stacked on a trailing axis of length 2."""
        xs, ys = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
        gx, gy = self.gradient_fn(xs, ys)
        return np.stack((np.broadcast_to(gx, xs.shape), np.broadcast_to(gy, xs.shape)), axis=-1).astype(float)


def gradient_consistency(field: ScalarField, points: ArrayLike, step: float = 1e-6) -> float:
    """Largest relative deviation between ``field.gradient`` and central differences.

    Args:
        field: Field to check
        points: (P, 2) sample points
        step: Finite difference step

    Returns:
        max |g_fd - g| / max(1, |g|) over the samples
    """
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    x, y = pts[:, 0], pts[:, 1]
    fd_x = (field.value(x + step, y) - field.value(x - step, y)) / (2.0 * step)
    fd_y = (field.value(x, y + step) - field.value(x, y - step)) / (2.0 * step)
    analytic = field.gradient(x, y)
    deviation = np.hypot(fd_x - analytic[:, 0], fd_y - analytic[:, 1])
    scale = np.maximum(1.0, np.hypot(analytic[:, 0], analytic[:, 1]))
    return float(np.max(deviation / scale))


def constant_field(c: float, name: str = "constant") -> ScalarField:
    return ScalarField(
        value_fn=lambda x, y: np.full_like(x, c),
        gradient_fn=lambda x, y: (np.zeros_like(x), np.zeros_like(x)),
        name=name,
        smoothness="polynomial",
    )


def sine_product() -> ScalarField:
    """sin(pi x) sin(pi y)."""
    pi = math.pi
    return ScalarField(
        value_fn=lambda x, y: np.sin(pi * x) * np.sin(pi * y),
        gradient_fn=lambda x, y: (pi * np.cos(pi * x) * np.sin(pi * y), pi * np.sin(pi * x) * np.cos(pi * y)),
        name="sin(pi x) sin(pi y)",
    )


def sine_product_source() -> ScalarField:
    """2 pi^2 sin(pi x) sin(pi y), minus the Laplacian of :func:`sine_product`."""
    pi = math.pi
    c = 2.0 * pi * pi
    return ScalarField(
        value_fn=lambda x, y: c * np.sin(pi * x) * np.sin(pi * y),
        gradient_fn=lambda x, y: (c * pi * np.cos(pi * x) * np.sin(pi * y), c * pi * np.sin(pi * x) * np.cos(pi * y)),
        name="2 pi^2 sin(pi x) sin(pi y)",
    )


def cosine_product() -> ScalarField:
    """cos(pi x) cos(pi y), the boundary data of the maximum principle experiment."""
    pi = math.pi
    return ScalarField(
        value_fn=lambda x, y: np.cos(pi * x) * np.cos(pi * y),
        gradient_fn=lambda x, y: (-pi * np.sin(pi * x) * np.cos(pi * y), -pi * np.cos(pi * x) * np.sin(pi * y)),
        name="cos(pi x) cos(pi y)",
    )


def linear_field() -> ScalarField:
    return ScalarField(
        value_fn=lambda x, y: x + y,
        gradient_fn=lambda x, y: (np.ones_like(x), np.ones_like(x)),
        name="x + y",
        smoothness="polynomial",
    )


def saddle_field() -> ScalarField:
    """x^2 - y^2 (harmonic)."""
    return ScalarField(
        value_fn=lambda x, y: x * x - y * y,
        gradient_fn=lambda x, y: (2.0 * x, -2.0 * y),
        name="x^2 - y^2",
        smoothness="polynomial",
    )


def paraboloid_field() -> ScalarField:
    """x^2 + y^2; minus its Laplacian is -4."""
    return ScalarField(
        value_fn=lambda x, y: x * x + y * y,
        gradient_fn=lambda x, y: (2.0 * x, 2.0 * y),
        name="x^2 + y^2",
        smoothness="polynomial",
    )


def _corner_angle(x: FloatArray, y: FloatArray) -> FloatArray:
    # angle from the positive x-axis, counterclockwise, branch cut inside the removed quadrant
    theta = np.arctan2(y, x)
    return np.where(theta < -0.25 * math.pi, theta + 2.0 * math.pi, theta)


def corner_field() -> ScalarField:
    """rho^(2/3) sin(2 theta / 3) around the re-entrant corner of the L-shape.

    Harmonic on the L-shape and zero on both edges meeting at the origin; its
    gradient is unbounded there and reported as zero at the origin itself.
    """
    def value(x: FloatArray, y: FloatArray) -> FloatArray:
        rho = np.hypot(x, y)
        return np.asarray(rho ** (2.0 / 3.0) * np.sin(2.0 * _corner_angle(x, y) / 3.0), dtype=float)

    def gradient(x: FloatArray, y: FloatArray) -> tuple[FloatArray, FloatArray]:
        rho = np.hypot(x, y)
        theta = _corner_angle(x, y)
        safe = np.where(rho > 0.0, rho, 1.0)
        scale = np.where(rho > 0.0, (2.0 / 3.0) * safe ** (-1.0 / 3.0), 0.0)
        return scale * np.sin(-theta / 3.0), scale * np.cos(-theta / 3.0)

    return ScalarField(value_fn=value, gradient_fn=gradient, name="rho^(2/3) sin(2 theta/3)", smoothness="singular")


@dataclass(frozen=True)
class Problem:
    """Poisson problem -Laplace(u) = f in the domain, u = g on its boundary."""
    name: str
    f: ScalarField
    g: ScalarField
    exact: Optional[ScalarField] = None


def _manufactured() -> Problem:
    u = sine_product()
    return Problem("manufactured", f=sine_product_source(), g=u, exact=u)


def _linear() -> Problem:
    u = linear_field()
    return Problem("linear", f=constant_field(0.0, "zero"), g=u, exact=u)


def _quadratic_harmonic() -> Problem:
    u = saddle_field()
    return Problem("quadratic_harmonic", f=constant_field(0.0, "zero"), g=u, exact=u)


def _quadratic() -> Problem:
    u = paraboloid_field()
    return Problem("quadratic", f=constant_field(-4.0, "minus four"), g=u, exact=u)


def _wmp_boundary() -> Problem:
    return Problem("wmp_boundary", f=constant_field(0.0, "zero"), g=cosine_product())


def _constant() -> Problem:
    u = constant_field(1.0)
    return Problem("constant", f=constant_field(0.0, "zero"), g=u, exact=u)


def _corner() -> Problem:
    u = corner_field()
    return Problem("corner", f=constant_field(0.0, "zero"), g=u, exact=u)


PROBLEMS: dict[str, Callable[[], Problem]] = {
    "manufactured": _manufactured,
    "linear": _linear,
    "quadratic_harmonic": _quadratic_harmonic,
    "quadratic": _quadratic,
    "wmp_boundary": _wmp_boundary,
    "constant": _constant,
    "corner": _corner,
}


def get_problem(name: str) -> Problem:
    """Look up a model problem by name.

    Raises:
        ExperimentError: Unknown problem name
    """
    try:
        return PROBLEMS[name]()
    except KeyError:
        raise ExperimentError(f"Unknown problem '{name}'", {"available": sorted(PROBLEMS)}) from None
