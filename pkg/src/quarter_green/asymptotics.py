"""Large-distance behaviour of Green functions and absorption probabilities.

Far from the corner the Green function of a walk with harmonic cubic
``h(i, j) = i j (i + alpha j + beta)`` behaves like

    G(start -> (i, j)) ~ C h(start) i j (i + alpha j) / (i^2 + alpha i j + alpha^2 j^2)^3,

with a constant ``C > 0`` determined by the curve.
"""
from __future__ import annotations

import cmath
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .exceptions import GateFailureError
from .green_integral import nu_coefficients, rho
from .uniformization import UniformizationData, dx_dz, uniformize_cached, x_of_z, y_of_z
from .walk_model import JumpKernel, cubic_harmonic

SQRT27 = 3**1.5


@dataclass
class AsymptoticModel:
    """Asymptotic constant ``C`` and the family parameters it applies to.

    ``pieces`` records the quantities the constant is assembled from, the
    sign correction applied by the positivity gate, and the empirical check.
    """

    C: float
    alpha: float
    beta: float
    omega_x: float
    u: UniformizationData | None = field(default=None, repr=False)
    pieces: dict = field(default_factory=dict)


def kappa(u: UniformizationData, z: complex = 0.3 + 0.4j) -> complex:
    """``z x'(z) / dQ/dy(x(z), y(z))``, a constant of the curve."""
    x = x_of_z(u, z)
    y = y_of_z(u, z)
    return complex(z * dx_dz(u, z) / u.curve.dq_dy(x, y))


def pole_factor_ratio(u: UniformizationData) -> complex:
    """``(z0 - 1/z0) / sqrt(p10^2 - 4 p11 p1-1)``, with the principal square root.

    When the denominator vanishes (``x4`` at infinity) the limit
    ``4 sqrt(q(1)) / sqrt(q1^2 - 4 q2 q0)`` of the deflated discriminant is used;
    it has the same square but its sign is not tied to the ``z0`` representative.
    """
    bp = u.branch
    if not math.isinf(bp.x4):
        return (u.z0 - 1 / u.z0) / cmath.sqrt(bp.disc_x)
    q0, q1, q2 = bp.quad_x
    return 4 * cmath.sqrt(q0 + q1 + q2) / cmath.sqrt(q1 * q1 - 4 * q2 * q0)


def orbit_cubic_coefficient(u: UniformizationData, alpha: float, beta: float, i0: int, j0: int) -> complex:
    """Coefficient of ``z^3`` in the orbit sum at 0: ``(i 3^{3/2} / 2) alpha omega_x^3 h(i0, j0)``."""
    return 0.5j * SQRT27 * alpha * u.omega_x**3 * cubic_harmonic(alpha, beta, (i0, j0))


def direction_factor(alpha: float, i, j):
    """``i j (i + alpha j) / (i^2 + alpha i j + alpha^2 j^2)^3``."""
    return i * j * (i + alpha * j) / (i * i + alpha * i * j + alpha * alpha * j * j) ** 3


def constant_C(k: JumpKernel, u: UniformizationData | None = None, alpha: float | None = None,
               beta: float | None = None, validate: bool = True, check_index: int = 100) -> AsymptoticModel:
    """Assemble the asymptotic constant and gate it.

    ``C = i (z0 - 1/z0) 27 alpha^2 / (2 pi sqrt(p10^2 - 4 p11 p1-1) omega_x)``.
    The branch of the square root and of ``z0`` may leave ``C`` negative; the
    sign is then flipped and the flip recorded in ``pieces``.  The modulus is
    cross-checked against the branch-free constant ``kappa`` and, if
    ``validate``, against the contour Green function on the diagonal at
    ``(check_index, check_index)``.

    Raises
    ------
    GateFailureError
        If the assembled modulus disagrees with the branch-free one, or with
        the empirical ratio by more than 10 %.
    """
    from .walk_model import infer_cubic_family

    u = uniformize_cached(k) if u is None else u
    if alpha is None or beta is None:
        a_inf, b_inf = infer_cubic_family(k)
        alpha = a_inf if alpha is None else alpha
        beta = b_inf if beta is None else beta
    ratio = pole_factor_ratio(u)
    assembled = 1j * ratio * 27 * alpha**2 / (2 * math.pi * u.omega_x)
    branch_free = 27 * alpha**2 * (1j * kappa(u)) / (2 * math.pi)
    if abs(abs(assembled) - abs(branch_free)) > 1e-8 * abs(branch_free):
        raise GateFailureError(f"assembled |C|={abs(assembled):.10g} differs from {abs(branch_free):.10g}")
    if abs(assembled.imag) > 1e-8 * abs(assembled):
        raise GateFailureError(f"assembled C is not real: {assembled}")
    C = float(assembled.real)
    pieces = {
        "z0 - 1/z0": u.z0 - 1 / u.z0,
        "omega_x": u.omega_x,
        "sqrt disc_x": cmath.sqrt(u.branch.disc_x),
        "alpha": alpha,
        "assembled": C,
        "branch_free": float(branch_free.real),
        "sign_flipped": C < 0,
    }
    if C < 0:
        warnings.warn("assembled constant is negative; the square-root branch was flipped", stacklevel=2)
        C = -C
    model = AsymptoticModel(C=C, alpha=alpha, beta=beta, omega_x=u.omega_x, u=u, pieces=pieces)
    if validate:
        from .green_integral import green_value

        n = check_index
        g = green_value(k, u, 1, 1, n, n).value
        empirical = g / (cubic_harmonic(alpha, beta, (1, 1)) * direction_factor(alpha, n, n))
        pieces["empirical"] = empirical
        pieces["empirical_index"] = n
        if abs(empirical / C - 1) > 0.10:
            raise GateFailureError(f"C={C:.6g} but empirical ratio {empirical:.6g} at ({n}, {n})")
    return model


def green_asymptotic(model: AsymptoticModel, i0: int, j0: int, i, j):
    """Leading-order Green function ``C h(i0, j0) i j (i + alpha j) / (i^2 + alpha i j + alpha^2 j^2)^3``."""
    return model.C * cubic_harmonic(model.alpha, model.beta, (i0, j0)) * direction_factor(model.alpha, i, j)


def green_asymptotic_two_term(model: AsymptoticModel, i0: int, j0: int, i: int, j: int) -> float:
    """Leading term plus the ``1/i^4`` correction from the second Taylor coefficient of the exponent."""
    if model.u is None:
        raise ValueError("model carries no uniformization data")
    slope = j / i
    r = rho(model.u, model.alpha, slope)
    nu2 = nu_coefficients(model.u, model.alpha, slope, P=2)[2]
    correction = (24 * model.C * model.omega_x**3 * (nu2 * r**5).imag
                  / (SQRT27 * model.alpha * i**4))
    h = cubic_harmonic(model.alpha, model.beta, (i0, j0))
    return green_asymptotic(model, i0, j0, i, j) + h * correction


def absorption_asymptotic(model: AsymptoticModel, k: JumpKernel, i0: int, j0: int, side: str, i):
    """Probability of being killed at ``(i, 0)`` (``side="horizontal"``) or ``(0, i)``, for large ``i``."""
    h = cubic_harmonic(model.alpha, model.beta, (i0, j0))
    if side == "horizontal":
        return model.C * (k[1, -1] + k[0, -1] + k[-1, -1]) * h / np.asarray(i, dtype=float) ** 4
    if side == "vertical":
        mass = k[-1, 1] + k[-1, 0] + k[-1, -1]
        return model.C * mass * h / (model.alpha**5 * np.asarray(i, dtype=float) ** 4)
    raise ValueError("side must be 'horizontal' or 'vertical'")
