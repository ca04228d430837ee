"""Jump kernels of killed nearest-neighbour walks in the quarter plane.

A kernel is the law of one step: eight probabilities ``p[di, dj]`` for
``(di, dj)`` in ``{-1, 0, 1}^2 \\ {(0, 0)}``.  The walks of interest have zero
drift and admit the cubic harmonic function ``h(i, j) = i j (i + alpha j + beta)``.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from numbers import Rational
from pathlib import Path
from typing import Iterator, NamedTuple

import numpy as np

from .exceptions import InfeasibleParametersError

STEPS = ((1, 1), (1, 0), (1, -1), (0, 1), (0, -1), (-1, 1), (-1, 0), (-1, -1))

SUM_TOL = 1e-14
DRIFT_TOL = 1e-14
FAMILY_TOL = 1e-12
# clipping a negative entry moves the mass and drift by that much, which must
# stay inside SUM_TOL and DRIFT_TOL for the result to validate
NEGATIVE_TOL = 1e-16


def step_key(di: int, dj: int) -> str:
    """JSON key of a step, e.g. ``p_-1_0``."""
    return f"p_{di}_{dj}"


class LatticePoint(NamedTuple):
    i: int
    j: int

    @property
    def interior(self) -> bool:
        return self.i >= 1 and self.j >= 1


@dataclass(frozen=True)
class JumpKernel:
    """The eight jump probabilities, stored in ``STEPS`` order.

    Index with a step: ``k[1, 0]`` is the probability of ``(i, j) -> (i+1, j)``.
    """

    probs: tuple

    def __post_init__(self):
        if len(self.probs) != 8:
            raise ValueError("a jump kernel has exactly eight probabilities")
        object.__setattr__(self, "probs", tuple(float(p) for p in self.probs))

    @classmethod
    def from_dict(cls, mapping) -> "JumpKernel":
        """Build from ``{(di, dj): p}``; missing steps default to 0."""
        unknown = set(mapping) - set(STEPS)
        if unknown:
            raise ValueError(f"unknown steps {sorted(unknown)}")
        return cls(tuple(mapping.get(s, 0.0) for s in STEPS))

    def __getitem__(self, step) -> float:
        return self.probs[STEPS.index(tuple(step))]

    def items(self) -> Iterator[tuple[tuple[int, int], float]]:
        return zip(STEPS, self.probs)

    def as_dict(self) -> dict:
        return dict(self.items())

    def reversed(self) -> "JumpKernel":
        """Kernel of the time-reversed walk, ``p'[d] = p[-d]``."""
        return JumpKernel.from_dict({(-a, -b): p for (a, b), p in self.items()})

    def transposed(self) -> "JumpKernel":
        """Kernel with the two coordinates swapped, ``p'[a, b] = p[b, a]``."""
        return JumpKernel.from_dict({(b, a): p for (a, b), p in self.items()})

    def to_json(self) -> dict:
        return {"kernel": {step_key(*s): p for s, p in self.items()}}

    def digest(self) -> str:
        """Stable content hash, used as a cache key."""
        import hashlib

        payload = ",".join(repr(p) for p in self.probs).encode()
        return hashlib.sha256(payload).hexdigest()[:16]


@dataclass(frozen=True)
class CubicFamilyParams:
    """Coordinates ``(alpha, beta, p11, p10)`` of a walk in the cubic family."""

    alpha: float
    beta: float
    p11: float
    p10: float


@dataclass
class ValidationReport:
    """Violated kernel invariants as ``(name, magnitude)`` pairs.

    Zero entries are only warnings: they are legitimate (SU(3) has five).
    """

    violations: list = field(default_factory=list)
    warnings: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self) -> bool:
        return self.ok

    def to_dict(self) -> dict:
        return {
            "valid": self.ok,
            "violations": [{"invariant": n, "magnitude": m} for n, m in self.violations],
            "warnings": [{"invariant": n, "magnitude": m} for n, m in self.warnings],
        }


def validate_kernel(k: JumpKernel) -> ValidationReport:
    """Check that ``k`` has total mass one, zero drift and no negative entry."""
    report = ValidationReport()
    for step, p in k.items():
        if not math.isfinite(p):
            report.violations.append((f"finite {step_key(*step)}", p))
        elif p < 0:
            report.violations.append((f"nonnegative {step_key(*step)}", -p))
        elif p == 0:
            report.warnings.append((f"zero {step_key(*step)}", 0.0))
    total = math.fsum(k.probs)
    if abs(total - 1.0) > SUM_TOL:
        report.violations.append(("sum equals 1", abs(total - 1.0)))
    drift_i = math.fsum(a * p for (a, _), p in k.items())
    drift_j = math.fsum(b * p for (_, b), p in k.items())
    if abs(drift_i) > DRIFT_TOL:
        report.violations.append(("horizontal drift zero", abs(drift_i)))
    if abs(drift_j) > DRIFT_TOL:
        report.violations.append(("vertical drift zero", abs(drift_j)))
    return report


def _family_formulas(al, be, p11, p10):
    # expressions of the six remaining probabilities in terms of (p11, p10)
    den = 1 + 2 * al + be
    return {
        (1, 1): p11,
        (1, 0): p10,
        (-1, 0): -(al * (1 - 2 * al - be) + 8 * p11 + (4 - 3 * al + 2 * al**2 + al * be) * p10)
        / (al * den),
        (-1, 1): (
            al * (1 - al - be)
            + 2 * (4 + 3 * al + 2 * al**2 + al * be) * p11
            + 2 * (2 + al**2 + al * be) * p10
        )
        / (2 * al * den),
        (0, 1): -(-(1 + al + be) + 4 * (2 + 2 * al + be) * p11 + 2 * (2 + al + be) * p10)
        / (2 * den),
        (1, -1): (al**2 + (-1 + 2 * al - be) * p11 - (1 + be + 2 * al**2) * p10) / den,
        (0, -1): -(
            (-1 - 3 * al - be + 4 * al**2)
            + 4 * (-2 + 2 * al - be) * p11
            + (-4 + 6 * al - 2 * be - 8 * al**2) * p10
        )
        / (2 * den),
        (-1, -1): (
            al * (1 - 3 * al - be + 2 * al**2)
            + 2 * (4 - 3 * al + 2 * al**2 - al * be) * p11
            + 2 * (2 - 3 * al + 3 * al**2 - 2 * al**3) * p10
        )
        / (2 * al * den),
    }


def family_probabilities(c: CubicFamilyParams) -> dict:
    """Raw (unchecked) probabilities of the family member ``c``.

    Exact rational arithmetic is used when all four inputs are rationals.
    Float inputs are evaluated exactly too and rounded once at the end, so
    each probability is within half an ulp of its true value.
    """
    values = (c.alpha, c.beta, c.p11, c.p10)
    rational = all(isinstance(v, Rational) for v in values)
    exact = tuple(Fraction(v) for v in values)
    al, be = exact[0], exact[1]
    if al == 0 or 1 + 2 * al + be == 0:
        raise InfeasibleParametersError("alpha = 0 or 1 + 2 alpha + beta = 0")
    probs = _family_formulas(*exact)
    if rational:
        return probs
    return {s: float(p) for s, p in probs.items()}


def kernel_from_cubic_family(c: CubicFamilyParams) -> JumpKernel:
    """Kernel of the walk with parameters ``c`` whose cubic is harmonic.

    Raises
    ------
    InfeasibleParametersError
        If ``alpha`` lies outside ``[1/2, 2]``, a probability is below
        ``-1e-16`` (rounding-level negatives are clipped to 0) or the total
        mass differs from one by more than ``1e-12``.
    """
    if not 0.5 <= c.alpha <= 2:
        raise InfeasibleParametersError(f"alpha={c.alpha} outside [1/2, 2]: empty family")
    probs = family_probabilities(c)
    exact = all(isinstance(v, Fraction) for v in probs.values())
    tol = 0 if exact else NEGATIVE_TOL
    for step, p in probs.items():
        if p < -tol:
            raise InfeasibleParametersError(f"{step_key(*step)} = {float(p):.3e} < 0")
    total = sum(probs.values())
    if abs(total - 1) > FAMILY_TOL:
        raise InfeasibleParametersError(f"probabilities sum to {float(total)!r}")
    return JumpKernel.from_dict({s: max(float(p), 0.0) for s, p in probs.items()})


def is_feasible(c: CubicFamilyParams) -> bool:
    try:
        kernel_from_cubic_family(c)
    except InfeasibleParametersError:
        return False
    return True


def cubic_harmonic(alpha: float, beta: float, z) -> float:
    """``h(i, j) = i j (i + alpha j + beta)``."""
    i, j = z
    return i * j * (i + alpha * j + beta)


def _cubic_increment(alpha, beta, i, j, a, b):
    # h(i + a, j + b) - h(i, j), expanded so no large terms cancel
    return (
        2 * a * i * j + a * a * j + b * i * i + 2 * a * b * i + a * a * b
        + alpha * (2 * b * i * j + b * b * i + a * j * j + 2 * a * b * j + a * b * b)
        + beta * (b * i + a * j + a * b)
    )


def harmonicity_residual(k: JumpKernel, alpha: float, beta: float, region=((1, 20), (1, 20))) -> float:
    """Largest stencil residual ``|h(z) - sum_d p_d h(z + d)|`` over a rectangle.

    ``region`` is ``((i_min, i_max), (j_min, j_max))``, inclusive, interior only.
    """
    (i_lo, i_hi), (j_lo, j_hi) = region
    if i_lo < 1 or j_lo < 1:
        raise ValueError("region must contain interior points only")
    worst = 0.0
    for i in range(i_lo, i_hi + 1):
        for j in range(j_lo, j_hi + 1):
            r = math.fsum(p * _cubic_increment(alpha, beta, i, j, a, b) for (a, b), p in k.items() if p)
            worst = max(worst, abs(r))
    return worst


def _moments(k: JumpKernel):
    m = {}
    for name, (ea, eb) in {"aa": (2, 0), "ab": (1, 1), "bb": (0, 2), "aab": (2, 1), "abb": (1, 2)}.items():
        m[name] = math.fsum(p * a**ea * b**eb for (a, b), p in k.items())
    return m


def infer_cubic_family(k: JumpKernel, tol: float = 1e-10) -> tuple[float, float]:
    """Recover ``(alpha, beta)`` such that the cubic is harmonic for ``k``.

    Uses the second and third moments of the step law; raises
    ``InfeasibleParametersError`` when no cubic of the form is harmonic.
    """
    m = _moments(k)
    if abs(m["ab"]) < tol:
        raise InfeasibleParametersError("zero step covariance: no harmonic cubic")
    alpha = -m["aa"] / (2 * m["ab"])
    if abs(2 * m["ab"] + alpha * m["bb"]) > tol:
        raise InfeasibleParametersError("step covariance incompatible with a harmonic cubic")
    beta = -(m["aab"] + alpha * m["abb"]) / m["ab"]
    return alpha, beta


def sample_family(rng: np.random.Generator, n: int, alpha_range=(0.5, 2.0), beta_range=(-1.0, 1.0),
                  max_tries: int = 1_000_000) -> list[CubicFamilyParams]:
    """Rejection-sample ``n`` feasible parameter points, ``(p11, p10)`` uniform in ``[0, 1]^2``."""
    out = []
    for _ in range(max_tries):
        c = CubicFamilyParams(
            float(rng.uniform(*alpha_range)),
            float(rng.uniform(*beta_range)),
            float(rng.uniform(0, 1)),
            float(rng.uniform(0, 1)),
        )
        if is_feasible(c):
            out.append(c)
            if len(out) == n:
                return out
    raise RuntimeError(f"only {len(out)} feasible points in {max_tries} draws")


SU3 = JumpKernel.from_dict({(1, 0): 1 / 3, (-1, 1): 1 / 3, (0, -1): 1 / 3})
SU3_FAMILY = CubicFamilyParams(1, 0, 0, Fraction(1, 3))


def cartesian_kernel(mu: float) -> JumpKernel:
    """The product walk with weights ``mu`` and ``nu = 1/3 - mu``."""
    nu = 1 / 3 - mu
    return JumpKernel.from_dict({(0, -1): mu, (-1, 1): mu, (1, 0): mu, (-1, 0): nu, (0, 1): nu, (1, -1): nu})


_FAMILY_KEYS = {"alpha", "beta", "p11", "p10"}


def parse_walk_spec(spec: dict) -> tuple[JumpKernel, CubicFamilyParams | None]:
    """Parse the JSON walk-spec object.

    Either ``{"kernel": {"p_1_1": ..., ...}}`` (missing entries are 0) or
    ``{"family": {"alpha": ..., "beta": ..., "p11": ..., "p10": ...}}``.
    """
    if set(spec) == {"kernel"}:
        keys = {step_key(*s): s for s in STEPS}
        raw = spec["kernel"]
        unknown = set(raw) - set(keys)
        if unknown:
            raise ValueError(f"unknown kernel keys {sorted(unknown)}")
        return JumpKernel.from_dict({keys[name]: float(_number(v)) for name, v in raw.items()}), None
    if set(spec) == {"family"}:
        raw = spec["family"]
        if set(raw) != _FAMILY_KEYS:
            raise ValueError(f"family needs exactly the keys {sorted(_FAMILY_KEYS)}")
        c = CubicFamilyParams(**{name: _number(raw[name]) for name in _FAMILY_KEYS})
        return kernel_from_cubic_family(c), c
    raise ValueError('walk spec must have exactly one of the keys "kernel" or "family"')


def _number(v):
    # "1/3" style strings keep exact arithmetic in the family formulas
    if isinstance(v, str):
        return Fraction(v)
    return v


def load_walk_spec(path) -> tuple[JumpKernel, CubicFamilyParams | None]:
    return parse_walk_spec(json.loads(Path(path).read_text()))
