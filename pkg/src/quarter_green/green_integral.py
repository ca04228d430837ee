"""Green functions as contour integrals over a ray of the uniformizing sphere.

For a start ``(i0, j0)`` and a target ``(i, j)`` with ``i >= i0`` and ``j >= j0``

    G = 1/(2 pi i) * int_{e^{i theta} [0, inf)} -S(z) x'(z) / (dQ/dy(x, y) x^i y^j) dz,

where ``S`` is the alternating orbit sum, ``(x, y) = (x(z), y(z))`` and any
``theta`` in ``[2 pi/3, pi]`` gives the same value.  The integrand is single
valued, so no square-root branch enters.

Outside that quadrant the integral still equals ``G`` for a restricted range of
``theta`` when exactly one of ``i < i0`` and ``j < j0`` holds (with ``j > j0`` in
the first case), and otherwise the time-reversed walk is used:
``G(p; start -> target) = G(p reversed; target -> start)``.
"""
from __future__ import annotations

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate

from .exceptions import NonConvergenceError, NonRealError, PoleProximityError
from .uniformization import (
    UniformizationData,
    dx_dz,
    orbit_sum,
    uniformize_cached,
    x_of_z,
    y_of_z,
)

SECTOR_LO = 2 * math.pi / 3
SECTOR_HI = math.pi
EDGE_GAP = 0.01
LARGE_INDEX = 500


@dataclass(frozen=True)
class RayContour:
    """The ray ``e^{i theta} [0, inf)`` mapped to ``t in [0, 1)`` by ``z = e^{i theta} t / (1 - t)``."""

    theta: float | None = None
    epsabs: float = 1e-13
    epsrel: float = 1e-10
    limit: int = 2000

    def __post_init__(self):
        if self.limit < 10:
            raise ValueError("limit must be at least 10 subintervals")

    def z_of_t(self, t, theta):
        return np.exp(1j * theta) * t / (1 - t)

    def jacobian(self, t, theta):
        return np.exp(1j * theta) / (1 - t) ** 2


@dataclass(frozen=True)
class SeriesCoefficients:
    """Taylor coefficients ``nu_p`` of ``log x(z) + slope * log y(z)`` at 0, ``p = 1..P``."""

    nu: np.ndarray
    slope: float

    def __getitem__(self, p: int) -> complex:
        if p == 0:
            return 0j
        return complex(self.nu[p - 1])


@dataclass
class GreenEstimate:
    """A Green-function value with its error estimate and provenance."""

    value: float
    abs_error: float
    method: str
    meta: dict = field(default_factory=dict)

    def as_row(self) -> dict:
        return {"value": self.value, "abs_error": self.abs_error, "method": self.method}


def _check_interior(*points):
    for i, j in points:
        if int(i) != i or int(j) != j or i < 1 or j < 1:
            raise ValueError(f"({i}, {j}) is not an interior lattice point")


def rho(u: UniformizationData, alpha: float, slope: float) -> complex:
    """``1 / (omega_x (1 + slope * alpha * e^{i pi/3}))``, the inverse first Taylor coefficient."""
    if slope < 0:
        raise ValueError("slope must be nonnegative")
    if math.isinf(slope):
        return complex(0.0)
    return 1 / (u.omega_x * (1 + slope * alpha * np.exp(1j * math.pi / 3)))


def rho_direction(u: UniformizationData, alpha: float, slope: float) -> float:
    """Argument of ``rho``, taken in ``[2 pi/3, pi]`` (with the ``slope -> inf`` limit)."""
    if math.isinf(slope):
        return SECTOR_LO
    return float(np.angle(rho(u, alpha, slope))) % (2 * math.pi)


def _chebyshev_traces(s: float, P: int) -> np.ndarray:
    # z^p + z^-p for p = 0..P from s = z + 1/z
    c = np.empty(P + 1)
    c[0] = 2.0
    if P >= 1:
        c[1] = s
    for p in range(2, P + 1):
        c[p] = s * c[p - 1] - c[p - 2]
    return c


def nu_coefficients(u: UniformizationData, alpha: float, slope: float, P: int = 6) -> SeriesCoefficients:
    """``p nu_p = (z0^p + z0^-p - z1^p - z1^-p) + slope (z2^p + z2^-p - z3^p - z3^-p) / K^p``.

    ``alpha`` is accepted for symmetry with ``rho``; the coefficients only use the curve.
    """
    if P < 1:
        raise ValueError("P must be at least 1")
    s0, s1, s2, s3 = u.s
    p = np.arange(1, P + 1)
    cx = _chebyshev_traces(s0, P)[1:] - _chebyshev_traces(s1, P)[1:]
    cy = _chebyshev_traces(s2, P)[1:] - _chebyshev_traces(s3, P)[1:]
    nu = (cx + slope * cy / u.K**p) / p
    return SeriesCoefficients(nu=nu, slope=slope)


def green_integrand(k, u: UniformizationData, i0: int, j0: int, i: int, j: int, z):
    """``-S(z) x'(z) / (dQ/dy(x(z), y(z)) x(z)^i y(z)^j)``, vectorized in ``z``.

    ``k`` is unused beyond being the kernel of ``u``; it is kept so the call
    mirrors the other entry points.
    """
    scalar = np.ndim(z) == 0
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    x = x_of_z(u, z)
    y = y_of_z(u, z)
    dq = u.curve.dq_dy(x, y)
    # dQ/dy vanishes linearly at z = 0 and z = inf (the double point (1, 1))
    with np.errstate(divide="ignore"):
        scale = np.minimum(np.abs(z), 1 / np.abs(z))
    if np.any(np.isfinite(dq) & (np.abs(dq) < 1e-13 * scale)):
        raise PoleProximityError("integrand evaluated at a branch point of the curve")
    with np.errstate(all="ignore"):
        # reciprocal powers underflow to 0 near poles instead of overflowing
        out = -orbit_sum(u, i0, j0, z) * dx_dz(u, z) / dq * (1 / x) ** i * (1 / y) ** j
    # at z = 0 and z = inf the integrand vanishes
    out = np.where((np.abs(z) == 0) | np.isinf(z), 0, out)
    return out[0] if scalar else out


def _scalar_integrand(u: UniformizationData, i0: int, j0: int, i: int, j: int):
    """``green_integrand`` for one point at a time, in plain complex arithmetic.

    Adaptive quadrature calls the integrand once per node, where the array
    overheads of the vectorized form dominate.  Points where a power
    overflows fall back to the vectorized form.
    """
    s0, s1, s2, s3 = (float(v) for v in u.s)
    K = complex(u.K)
    K2 = K * K
    a = [float(v) for v in u.curve.a.coef]
    b = [float(v) for v in u.curve.b.coef]
    images = ((1, 1, 0, 0, 1), (-1, 0, 1, 1, 0), (-1, 0, K2, 1, 0),
              (1, K2, 0, 0, 1), (1, 1, 0, 0, K2), (-1, 0, 1, K2, 0))

    def quotient(z, s_num, s_den):
        q = z if abs(z) <= 1 else 1 / z
        return (1 - s_num * q + q * q) / (1 - s_den * q + q * q)

    def g(z: complex) -> complex:
        if z == 0 or math.isinf(abs(z)):
            return 0j
        try:
            orbit = 0j
            for sign, ma, mb, mc, md in images:
                w = (ma * z + mb) / (mc * z + md)
                orbit += sign * quotient(w, s1, s0) ** i0 * quotient(w / K, s3, s2) ** j0
            x = quotient(z, s1, s0)
            y = quotient(z / K, s3, s2)
            dq = 2 * (a[0] + x * (a[1] + x * a[2])) * y + (b[0] + x * (b[1] + x * b[2]))
            q = z if abs(z) <= 1 else 1 / z
            den = (1 - s0 * q + q * q) ** 2
            dx = (s1 - s0) * (z * z - 1) / den if abs(z) <= 1 else (s1 - s0) * (1 - q * q) * q * q / den
        except (OverflowError, ZeroDivisionError):
            return complex(green_integrand(u.kernel, u, i0, j0, i, j, z))
        if abs(dq) < 1e-13 * min(abs(z), 1 / abs(z)):
            raise PoleProximityError("integrand evaluated at a branch point of the curve")
        try:
            return -orbit * dx / dq * (1 / x) ** i * (1 / y) ** j
        except (OverflowError, ZeroDivisionError):
            return complex(green_integrand(u.kernel, u, i0, j0, i, j, z))

    return g


def _args_in_sector(points) -> list[float]:
    args = [float(np.angle(p)) % (2 * math.pi) for p in points if np.isfinite(p) and abs(p) > 0]
    return [a for a in args if SECTOR_LO - 1e-12 <= a <= SECTOR_HI + 1e-12]


def admissible_window(u: UniformizationData, i0: int, j0: int, i: int, j: int) -> tuple[float, float] | None:
    """Range of ray directions for which the integral equals the Green function.

    ``None`` when no direction works and the reversed walk must be used.
    """
    if i >= i0 and j >= j0:
        return SECTOR_LO, SECTOR_HI
    if i >= i0:
        # y^(j0 - j) has poles at K z2^{±1}; the ray must pass beyond them
        inside = _args_in_sector([u.K * u.z2, u.K / u.z2])
        lo = max(inside) if inside else SECTOR_LO
        return (lo, SECTOR_HI) if SECTOR_HI - lo >= 2 * EDGE_GAP else None
    if j > j0:
        # x^(i0 - i) has poles at z0^{±1}; the ray must stay before them
        inside = [a for a in _args_in_sector([u.z0, 1 / u.z0]) if a > SECTOR_LO + 1e-12]
        hi = min(inside) if inside else SECTOR_HI
        return (SECTOR_LO, hi) if hi - SECTOR_LO >= 2 * EDGE_GAP else None
    return None


def _default_theta(u, window, i, j, alpha):
    lo, hi = window
    theta = rho_direction(u, alpha, j / i)
    # stay well clear of a window edge set by a pole, and just inside a sector edge
    quarter = 0.25 * (hi - lo)
    lo_margin = EDGE_GAP if lo == SECTOR_LO else max(EDGE_GAP, quarter)
    hi_margin = EDGE_GAP if hi == SECTOR_HI else max(EDGE_GAP, quarter)
    return min(max(theta, lo + lo_margin), hi - hi_margin)


def _alpha_of(u: UniformizationData) -> float:
    if u.alpha_hint is not None:
        return u.alpha_hint
    return u.omega_y / u.omega_x


def _quad(g, a, b, contour: RayContour, points=None):
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", integrate.IntegrationWarning)
        val, err, info = integrate.quad(
            g, a, b, complex_func=True, epsabs=contour.epsabs, epsrel=contour.epsrel,
            limit=contour.limit, points=points, full_output=True,
        )
    bad = [w for w in caught if issubclass(w.category, integrate.IntegrationWarning)]
    n_eval = sum(part[0]["neval"] for part in info.values() if isinstance(part, tuple))
    n_eval += sum(part["neval"] for part in info.values() if isinstance(part, dict))
    return complex(val), abs(err.real) + abs(err.imag), n_eval, [str(w.message) for w in bad]


def _ray_integral(u, i0, j0, i, j, theta, contour: RayContour):
    n = i + j
    e = complex(np.exp(1j * theta))
    f = _scalar_integrand(u, i0, j0, i, j)

    def g(t):
        return f(e * t / (1 - t)) * e / (1 - t) ** 2

    # the mass of the integrand sits at |z| ~ 1/n and |z| ~ n
    scales = [c / n for c in (0.3, 1.0, 3.0, 10.0) if c / n < 1]
    head_points = sorted(r / (1 + r) for r in scales)
    tail_points = sorted(1 / (1 + r) for r in scales)
    panels = []
    skipped = 0.0
    if n > LARGE_INDEX:
        t1, t2 = (10 / n) / (1 + 10 / n), (n / 10) / (1 + n / 10)
        ts = np.linspace(t1, t2, 65)
        bound = 2 * (t2 - t1) * max(abs(g(t)) for t in ts)
        panels += [(0.0, t1, head_points[:-1]), (t2, 1.0, tail_points[1:])]
        if bound < 0.01 * contour.epsabs:
            skipped = bound
        else:
            panels.append((t1, t2, None))
    else:
        panels += [(0.0, 0.5, head_points), (0.5, 1.0, tail_points)]

    total, err, neval, problems, parts = 0j, skipped, 0, [], []
    for a, b, pts in panels:
        pts = [p for p in (pts or []) if a < p < b] or None
        v, e_, ne, msgs = _quad(g, a, b, contour, pts)
        total += v
        err += e_
        neval += ne
        problems += msgs
        parts.append(v)
    if problems:
        raise NonConvergenceError(f"quadrature did not converge at theta={theta:.6f}: {problems[0]}")
    return total, err, neval, parts


def green_value(k, u: UniformizationData | None, i0: int, j0: int, i: int, j: int,
                contour: RayContour | None = None) -> GreenEstimate:
    """Expected number of visits to ``(i, j)`` of the killed walk started at ``(i0, j0)``.

    Parameters
    ----------
    k : JumpKernel
        A walk with a harmonic cubic.
    u : UniformizationData or None
        Uniformization of ``k``; computed (and cached) when ``None``.
    contour : RayContour, optional
        Ray direction and quadrature tolerances.  A direction outside the
        admissible window of the pair raises ``ValueError``.

    Raises
    ------
    NonConvergenceError
        If adaptive quadrature exhausts its subdivision budget.
    NonRealError
        If the computed integral has a non-negligible imaginary part.
    """
    _check_interior((i0, j0), (i, j))
    contour = RayContour() if contour is None else contour
    u = uniformize_cached(k) if u is None else u
    reversed_walk = False
    window = admissible_window(u, i0, j0, i, j)
    if window is None:
        k = k.reversed()
        u = uniformize_cached(k)
        i0, j0, i, j = i, j, i0, j0
        reversed_walk = True
        window = admissible_window(u, i0, j0, i, j)
        if window is None:
            raise ValueError("no admissible ray for this pair of points")
    if contour.theta is None:
        theta = _default_theta(u, window, i, j, _alpha_of(u))
    else:
        theta = contour.theta
        if not window[0] <= theta <= window[1]:
            raise ValueError(
                f"theta={theta:.6f} outside the admissible window [{window[0]:.6f}, {window[1]:.6f}]"
            )
    integral, err, neval, parts = _ray_integral(u, i0, j0, i, j, theta, contour)
    value = integral / (2j * math.pi)
    abs_error = err / (2 * math.pi)
    if abs(value.imag) > max(1e-6 * abs(value.real), 10 * abs_error):
        raise NonRealError(f"imaginary part {value.imag:.3e} against value {value.real:.3e}")
    return GreenEstimate(
        value=float(value.real), abs_error=abs_error, method="contour",
        meta={"theta": theta, "evaluations": neval, "imag": float(value.imag),
              "reversed": reversed_walk, "window": window},
    )


def green_values(k, u, i0: int, j0: int, targets, contour: RayContour | None = None,
                 threads: int = 1) -> list[GreenEstimate]:
    """``green_value`` over many targets, in input order."""
    u = uniformize_cached(k) if u is None else u

    def one(target):
        return green_value(k, u, i0, j0, target[0], target[1], contour)

    if threads <= 1:
        return [one(t) for t in targets]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(one, targets))
