"""Rational parametrization of the kernel curve by the Riemann sphere.

With ``s_k = z_k + 1/z_k`` the two coordinates are

    x(z) = (z + 1/z - s1) / (z + 1/z - s0),
    y(z) = x-type map built from (s3, s2), evaluated at z / K,

so ``x`` has zeros at ``z1^{±1}``, poles at ``z0^{±1}`` and ``x(0) = x(inf) = 1``.
The automorphisms ``z -> 1/z`` and ``z -> K^2/z`` generate a dihedral group of
order six whose alternating orbit sum is the numerator of the Green integrand.
"""
from __future__ import annotations

import cmath
import itertools
import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .curve import BranchPoints, CurvePolynomials, branch_points
from .exceptions import BranchInconsistencyError, InfeasibleParametersError
from .walk_model import JumpKernel, infer_cubic_family

ON_CURVE_TOL = 1e-10


def _s_pair(u1: float, u4: float) -> tuple[float, float]:
    """``(s_pole, s_zero)`` for branch points ``u1`` (inside) and ``u4`` (outside)."""
    if math.isinf(u4):
        s_pole = -2.0
    else:
        s_pole = 2 * (2 - u1 - u4) / (u4 - u1)
    return s_pole, 2 - u1 * (2 - s_pole)


def _root_from_s(s: float, sign: int) -> complex:
    # z with z + 1/z = s; sign picks z or 1/z (for |s| <= 2 the sign of Im z)
    z = s / 2 + sign * 1j * cmath.sqrt(1 - s * s / 4)
    if abs(z.imag) <= 1e-15 * max(1.0, abs(z)):
        z = complex(z.real, 0.0)
    return z


def _moebius_quotient(z, s_num: float, s_den: float):
    """``(z + 1/z - s_num) / (z + 1/z - s_den)``, stable at 0 and infinity."""
    z = np.asarray(z, dtype=complex)
    with np.errstate(divide="ignore", invalid="ignore"):
        inside = np.abs(z) <= 1
        q = np.where(inside, z, 1 / np.where(inside, 1, z))
        q = np.where(np.isinf(z), 0, q)
        num = 1 - s_num * q + q * q
        den = 1 - s_den * q + q * q
        out = num / den
    return out


@dataclass(frozen=True)
class GroupElement:
    """Moebius map ``z -> (a z + b) / (c z + d)`` with its word length."""

    label: str
    coefficients: tuple
    length: int

    def __call__(self, z):
        a, b, c, d = self.coefficients
        z = np.asarray(z, dtype=complex)
        with np.errstate(divide="ignore", invalid="ignore"):
            out = (a * z + b) / (c * z + d)
            if c != 0:
                out = np.where(np.isinf(z), a / c, out)
                out = np.where(c * z + d == 0, complex(np.inf, 0), out)
            else:
                out = np.where(np.isinf(z), complex(np.inf, 0), out)
        return out

    def compose(self, other: "GroupElement") -> tuple:
        """Coefficients of ``self o other`` (as a 2x2 matrix product)."""
        m = np.array(self.coefficients, dtype=complex).reshape(2, 2)
        n = np.array(other.coefficients, dtype=complex).reshape(2, 2)
        return tuple((m @ n).ravel())


def group_elements(K: complex) -> list[GroupElement]:
    """The six elements ``1, xi, eta, eta xi, xi eta, xi eta xi`` of the group.

    ``xi(z) = 1/z`` and ``eta(z) = K^2/z``.
    """
    K2 = K * K
    return [
        GroupElement("1", (1, 0, 0, 1), 0),
        GroupElement("xi", (0, 1, 1, 0), 1),
        GroupElement("eta", (0, K2, 1, 0), 1),
        GroupElement("eta xi", (K2, 0, 0, 1), 2),
        GroupElement("xi eta", (1, 0, 0, K2), 2),
        GroupElement("xi eta xi", (0, 1, K2, 0), 3),
    ]


@dataclass(frozen=True)
class UniformizationData:
    """Constants of the parametrization of one kernel curve.

    Attributes
    ----------
    z0, z1, z2, z3 : complex
        Pole and zero parameters of ``x`` (``z0``, ``z1``) and of ``y(K .)``
        (``z2``, ``z3``).  Only ``z_k + 1/z_k`` matters; the representative
        has ``Im z <= 0`` for poles and ``Im z >= 0`` for zeros, or
        ``|z| < 1`` when real.
    K : complex
        Unit-modulus rotation between the two maps, with ``Im K <= 0``.
    omega_x, omega_y : float
        Derivatives ``x'(0)`` and ``K y'(0)``.
    branch_candidates : int
        How many sign assignments of the square roots passed the gate.
    """

    kernel: JumpKernel
    branch: BranchPoints
    curve: CurvePolynomials
    z0: complex
    z1: complex
    z2: complex
    z3: complex
    K: complex
    omega_x: float
    omega_y: float
    s: tuple
    alpha_hint: float | None = None
    branch_candidates: int = 1
    on_curve_residual: float = 0.0
    elements: tuple = field(default=(), repr=False)

    def x_of_z(self, z):
        return x_of_z(self, z)

    def y_of_z(self, z):
        return y_of_z(self, z)

    def as_dict(self) -> dict:
        def c(v):
            return [float(v.real), float(v.imag)]

        return {
            "z0": c(self.z0), "z1": c(self.z1), "z2": c(self.z2), "z3": c(self.z3),
            "K": c(self.K), "omega_x": self.omega_x, "omega_y": self.omega_y,
            "branch_points": self.branch.as_dict(),
            "alpha": self.alpha_hint, "branch_candidates": self.branch_candidates,
            "on_curve_residual": self.on_curve_residual,
        }


def _maybe_scalar(out, z):
    return out[()] if np.ndim(z) == 0 else out


def x_of_z(u: UniformizationData, z):
    """``x(z)``; infinity is accepted as input."""
    s0, s1 = u.s[0], u.s[1]
    return _maybe_scalar(_moebius_quotient(z, s1, s0), z)


def y_of_z(u: UniformizationData, z):
    """``y(z)``; infinity is accepted as input."""
    s2, s3 = u.s[2], u.s[3]
    w = np.asarray(z, dtype=complex)
    with np.errstate(invalid="ignore"):
        w = np.where(np.isinf(w), w, w / u.K)
    return _maybe_scalar(_moebius_quotient(w, s3, s2), z)


def dx_dz(u: UniformizationData, z):
    """Exact derivative of ``x(z)``."""
    s0, s1 = u.s[0], u.s[1]
    z = np.asarray(z, dtype=complex)
    with np.errstate(divide="ignore", invalid="ignore"):
        inside = np.abs(z) <= 1
        q = np.where(inside, z, 1 / np.where(inside, 1, z))
        den = (1 - s0 * q + q * q) ** 2
        out = np.where(inside, (s1 - s0) * (z * z - 1) / den, (s1 - s0) * (1 - q * q) * q * q / den)
    return _maybe_scalar(out, z)


def _relative_q(cp: CurvePolynomials, x, y):
    return np.abs(cp.q(x, y)) / ((1 + np.abs(x)) ** 2 * (1 + np.abs(y)) ** 2)


def _sample_points(n: int, rng: np.random.Generator) -> np.ndarray:
    r = np.exp(rng.uniform(np.log(0.05), np.log(20.0), n))
    return r * np.exp(1j * rng.uniform(-np.pi, np.pi, n))


def _residual_for(cp, s, K, zs):
    x = _moebius_quotient(zs, s[1], s[0])
    y = _moebius_quotient(zs / K, s[3], s[2])
    ok = np.isfinite(x) & np.isfinite(y)
    return float(np.max(_relative_q(cp, x[ok], y[ok]))) if ok.any() else math.inf


def verify_on_curve(k: JumpKernel, u: UniformizationData, sample_count: int = 100,
                    rng: np.random.Generator | None = None) -> float:
    """Largest scaled residual ``|Q(x(z), y(z))| / ((1+|x|)^2 (1+|y|)^2)`` over random ``z``.

    The scaling keeps the check meaningful near the poles of the maps, where
    ``Q`` itself is a difference of large numbers.
    """
    rng = np.random.default_rng(0) if rng is None else rng
    cp = CurvePolynomials.from_kernel(k)
    s = (u.z0 + 1 / u.z0, u.z1 + 1 / u.z1, u.z2 + 1 / u.z2, u.z3 + 1 / u.z3)
    return _residual_for(cp, s, u.K, _sample_points(sample_count, rng))


def _rotation_trace(cp: CurvePolynomials, bp: BranchPoints, s) -> float:
    # x at the preimage of y1, where the two x-roots merge
    y1 = bp.y1
    at, bt, ct = cp.at(y1), cp.bt(y1), cp.ct(y1)
    x_double = -bt / (2 * at) if abs(at) > 1e-12 else -2 * ct / bt
    return (s[1] - x_double * s[0]) / (1 - x_double)


def uniformize(k: JumpKernel, bp: BranchPoints | None = None, sample_count: int = 100) -> UniformizationData:
    """Constants ``z0..z3``, ``K``, ``omega_x``, ``omega_y`` of the curve of ``k``.

    The square roots in the closed forms are resolved by enumerating all sign
    assignments and keeping those whose maps land on the curve and whose ``K``
    has unit modulus and ``Im K <= 0``.  Because ``z -> 1/z`` leaves the maps
    unchanged several assignments survive; the canonical one is returned and
    the survivor count stored.

    Raises
    ------
    BranchInconsistencyError
        If no assignment passes the gate.
    """
    bp = branch_points(k) if bp is None else bp
    cp = CurvePolynomials.from_kernel(k)
    s0, s1 = _s_pair(bp.x1, bp.x4)
    s2, s3 = _s_pair(bp.y1, bp.y4)
    t = _rotation_trace(cp, bp, (s0, s1))
    if abs(t) > 2 + 1e-9:
        raise BranchInconsistencyError(f"K + 1/K = {t} is not the trace of a rotation")
    t = max(-2.0, min(2.0, t))

    zs = _sample_points(sample_count, np.random.default_rng(0))
    survivors = []
    for signs in itertools.product((1, -1), repeat=5):
        z = [_root_from_s(sk, sg) for sk, sg in zip((s0, s1, s2, s3), signs[:4])]
        K = _root_from_s(t, signs[4])
        if abs(abs(K) - 1) > 1e-12 or K.imag > 1e-15:
            continue
        s_cand = tuple((zk + 1 / zk).real for zk in z)
        res = _residual_for(cp, s_cand, K, zs)
        if res <= ON_CURVE_TOL:
            survivors.append((signs, z, K, res))
    if not survivors:
        raise BranchInconsistencyError("no square-root assignment puts the maps on the curve")

    def canonical(entry):
        # prefer Im z <= 0 for poles, Im z >= 0 for zeros, |z| < 1 when real
        _, z, _, _ = entry
        score = 0
        for zk, want in zip(z, (-1, 1, -1, 1)):
            if zk.imag != 0:
                score += want * zk.imag < 0
            else:
                score += abs(zk) > 1
        return score

    _, (z0, z1, z2, z3), K, res = min(survivors, key=canonical)
    try:
        alpha = infer_cubic_family(k)[0]
    except InfeasibleParametersError:
        alpha = None
    return UniformizationData(
        kernel=k, branch=bp, curve=cp, z0=z0, z1=z1, z2=z2, z3=z3, K=K,
        omega_x=s0 - s1, omega_y=s2 - s3, s=(s0, s1, s2, s3), alpha_hint=alpha,
        branch_candidates=len(survivors), on_curve_residual=res,
        elements=tuple(group_elements(K)),
    )


@lru_cache(maxsize=256)
def uniformize_cached(k: JumpKernel) -> UniformizationData:
    return uniformize(k)


def with_constants(u: UniformizationData, **changes) -> UniformizationData:
    """Copy of ``u`` with some of ``z0..z3, K`` replaced and the maps rebuilt.

    Used to probe the on-curve gate with deliberately wrong constants.
    """
    from dataclasses import replace

    v = replace(u, **changes)
    s = tuple((zk + 1 / zk).real if abs((zk + 1 / zk).imag) < 1e-12 else zk + 1 / zk
              for zk in (v.z0, v.z1, v.z2, v.z3))
    return replace(v, s=s, elements=tuple(group_elements(v.K)))


def orbit_sum(u: UniformizationData, i0: int, j0: int, z):
    """Alternating sum ``sum_w (-1)^{l(w)} x(w z)^{i0} y(w z)^{j0}`` over the group."""
    z = np.asarray(z, dtype=complex)
    K2 = u.K * u.K
    with np.errstate(divide="ignore", invalid="ignore"):
        images = (z, 1 / z, K2 / z, K2 * z, z / K2, 1 / (K2 * z))
    signs = (1, -1, -1, 1, 1, -1)
    total = np.zeros_like(z)
    for sg, w in zip(signs, images):
        total = total + sg * x_of_z(u, w) ** i0 * y_of_z(u, w) ** j0
    return _maybe_scalar(total, z) if np.ndim(z) == 0 else total


def pole_candidates(u: UniformizationData) -> np.ndarray:
    """The twelve possible poles ``K^{2m} z0^{±1}`` and ``K^{2m+1} z2^{±1}`` of the orbit sum."""
    out = []
    for m in range(3):
        for e in (1, -1):
            out.append(u.K ** (2 * m) * u.z0**e)
            out.append(u.K ** (2 * m + 1) * u.z2**e)
    return np.array(out)


def taylor_coefficients(f, order: int, radius: float, points: int = 64) -> np.ndarray:
    """Taylor coefficients ``0..order`` of ``f`` at 0 from samples on a circle.

    ``f`` must accept an array of complex points.
    """
    if points <= order:
        raise ValueError("need more sample points than the requested order")
    w = radius * np.exp(2j * np.pi * np.arange(points) / points)
    c = np.fft.fft(f(w)) / points
    return c[: order + 1] / radius ** np.arange(order + 1)


def orbit_taylor(u: UniformizationData, i0: int, j0: int, order: int = 6, points: int = 64) -> np.ndarray:
    """Taylor coefficients of the orbit sum at 0 on a circle of radius ``0.05 *`` nearest pole."""
    radius = 0.05 * float(np.min(np.abs(pole_candidates(u))))
    return taylor_coefficients(lambda z: orbit_sum(u, i0, j0, z), order, radius, points)


def fundamental_sector_image(u: UniformizationData, z) -> tuple[str, complex]:
    """A group element sending ``z`` into the sector ``arg in [-pi/3, 0]``, and the image."""
    for g in u.elements:
        w = complex(g(z))
        if -np.pi / 3 - 1e-9 <= cmath.phase(w) <= 1e-9:
            return g.label, w
    raise ValueError(f"no group element maps {z} into the sector")
