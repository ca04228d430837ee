"""The kernel polynomial of a walk, its discriminants and branch points.

The kernel ``Q(x, y) = x y [sum_{d} p_d x^{d_1} y^{d_2} - 1]`` is quadratic in
each variable:

    Q(x, y) = a(x) y^2 + b(x) y + c(x) = at(y) x^2 + bt(y) x + ct(y).

For a zero-drift walk the discriminant ``b^2 - 4 a c`` has a double root at 1,
one simple root in ``(-1, 1)`` and one outside ``[-1, 1]``, possibly at infinity.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.polynomial import Polynomial

from .exceptions import DegenerateCurveError
from .walk_model import JumpKernel

INF_TOL = 1e-14


@dataclass(frozen=True)
class CurvePolynomials:
    """Coefficient polynomials of the kernel in ``y`` (``a, b, c``) and in ``x`` (``at, bt, ct``)."""

    a: Polynomial
    b: Polynomial
    c: Polynomial
    at: Polynomial
    bt: Polynomial
    ct: Polynomial

    @classmethod
    def from_kernel(cls, k: JumpKernel) -> "CurvePolynomials":
        p = k.__getitem__
        return cls(
            a=Polynomial([p((-1, 1)), p((0, 1)), p((1, 1))]),
            b=Polynomial([p((-1, 0)), -1.0, p((1, 0))]),
            c=Polynomial([p((-1, -1)), p((0, -1)), p((1, -1))]),
            at=Polynomial([p((1, -1)), p((1, 0)), p((1, 1))]),
            bt=Polynomial([p((0, -1)), -1.0, p((0, 1))]),
            ct=Polynomial([p((-1, -1)), p((-1, 0)), p((-1, 1))]),
        )

    def q(self, x, y):
        """``Q(x, y)`` in the ``y``-quadratic form."""
        return self.a(x) * y * y + self.b(x) * y + self.c(x)

    def q_dual(self, x, y):
        """``Q(x, y)`` in the ``x``-quadratic form."""
        return self.at(y) * x * x + self.bt(y) * x + self.ct(y)

    def dq_dy(self, x, y):
        return 2 * self.a(x) * y + self.b(x)


def q_eval(k: JumpKernel, x, y):
    """Kernel ``x y [sum_d p_d x^{d_1} y^{d_2} - 1]``, evaluated term by term."""
    total = -x * y
    for (di, dj), p in k.items():
        if p:
            total = total + p * x ** (di + 1) * y ** (dj + 1)
    return total


def discriminant_d(k: JumpKernel) -> np.ndarray:
    """Coefficients (increasing degree) of ``d(x) = b(x)^2 - 4 a(x) c(x)``."""
    cp = CurvePolynomials.from_kernel(k)
    return _padded(cp.b**2 - 4 * cp.a * cp.c)


def discriminant_dt(k: JumpKernel) -> np.ndarray:
    """Coefficients (increasing degree) of ``dt(y) = bt(y)^2 - 4 at(y) ct(y)``."""
    cp = CurvePolynomials.from_kernel(k)
    return _padded(cp.bt**2 - 4 * cp.at * cp.ct)


def _padded(poly: Polynomial) -> np.ndarray:
    coef = np.zeros(5)
    coef[: len(poly.coef)] = poly.coef
    return coef


@dataclass(frozen=True)
class BranchPoints:
    """Branch points of the curve; ``math.inf`` stands for the point at infinity.

    ``quad_x`` and ``quad_y`` hold ``(q0, q1, q2)``, the discriminant with the
    double root at 1 divided out.
    """

    x1: float
    x4: float
    y1: float
    y4: float
    disc_x: float
    disc_y: float
    quad_x: tuple
    quad_y: tuple

    def as_dict(self) -> dict:
        return {name: getattr(self, name) for name in ("x1", "x4", "y1", "y4", "disc_x", "disc_y")}


def deflate_double_root(d: np.ndarray) -> tuple[float, float, float]:
    """Divide the quartic ``d`` by ``(x - 1)^2``.

    The remainder is zero by construction for a zero-drift kernel, so the
    quotient is read off from the leading and constant coefficients alone.
    """
    d0, _, _, d3, d4 = d
    return float(d0), float(d3 + 2 * d4), float(d4)


def _roots_of_deflated(q: tuple[float, float, float]) -> tuple[float, float]:
    q0, q1, q2 = q
    if abs(q2) <= INF_TOL:
        if q1 == 0:
            raise DegenerateCurveError("deflated discriminant vanishes identically")
        return -q0 / q1, math.inf
    disc = q1 * q1 - 4 * q2 * q0
    if disc < 0:
        if disc < -1e-12 * max(q1 * q1, abs(4 * q2 * q0)):
            raise DegenerateCurveError("complex branch points")
        disc = 0.0
    r = -0.5 * (q1 + math.copysign(math.sqrt(disc), q1))
    if r == 0:
        return 0.0, 0.0
    roots = sorted((r / q2, q0 / r), key=abs)
    return roots[0], roots[1]


def branch_points(k: JumpKernel) -> BranchPoints:
    """Simple roots of the two discriminants, ordered so ``|x1| < 1``."""
    qx = deflate_double_root(discriminant_d(k))
    qy = deflate_double_root(discriminant_dt(k))
    x1, x4 = _roots_of_deflated(qx)
    y1, y4 = _roots_of_deflated(qy)
    return BranchPoints(
        x1=x1, x4=x4, y1=y1, y4=y4,
        disc_x=k[1, 0] ** 2 - 4 * k[1, 1] * k[1, -1],
        disc_y=k[0, 1] ** 2 - 4 * k[1, 1] * k[-1, 1],
        quad_x=qx, quad_y=qy,
    )
