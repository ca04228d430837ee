"""Martin kernels ``G(start -> z) / G(ref -> z)`` and their behaviour far from the corner."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .exceptions import DivisionInstabilityError
from .green_integral import GreenEstimate, RayContour, green_value
from .uniformization import UniformizationData, uniformize_cached
from .walk_model import JumpKernel, LatticePoint, cubic_harmonic

DEFAULT_SLOPES = (0.0, 0.5, 1.0, 2.0, math.inf)
DEFAULT_RADII = (25, 50, 100)


def target_on_ray(slope: float, radius: int, edge: int = 2) -> tuple[int, int]:
    """Lattice point at distance about ``radius`` (in ``i + j``) along ``j = slope * i``.

    The two axis directions keep the other coordinate fixed at ``edge``.
    """
    if slope == 0:
        return radius, edge
    if math.isinf(slope):
        return edge, radius
    i = max(1, round(radius / (1 + slope)))
    return i, max(1, round(slope * i))


@dataclass
class MartinDiagnostic:
    """Martin kernels over directions and radii, against the predicted common limit."""

    start: LatticePoint
    ref_point: LatticePoint
    directions: list
    radii: list
    table: np.ndarray
    limit_prediction: float
    targets: dict = field(default_factory=dict)

    @property
    def deviations(self) -> np.ndarray:
        """Largest relative deviation from the prediction, per radius."""
        return np.max(np.abs(self.table / self.limit_prediction - 1), axis=0)

    def rows(self):
        for a, slope in enumerate(self.directions):
            for b, radius in enumerate(self.radii):
                value = self.table[a, b]
                yield {
                    "direction": slope, "radius": radius, "kernel": value,
                    "prediction": self.limit_prediction,
                    "deviation": value / self.limit_prediction - 1,
                }


def _ratio(num: GreenEstimate, den: GreenEstimate) -> tuple[float, float]:
    if den.value <= den.abs_error:
        raise DivisionInstabilityError(f"denominator {den.value:.3e} within its error {den.abs_error:.3e}")
    value = num.value / den.value
    err = abs(value) * (num.abs_error / abs(num.value) + den.abs_error / den.value) if num.value else 0.0
    return value, err


def martin_kernel(k: JumpKernel, u: UniformizationData | None, i0: int, j0: int, ref, i: int, j: int,
                  method: str = "contour", oracle_grids: dict | None = None) -> GreenEstimate:
    """``G(start -> (i, j)) / G(ref -> (i, j))`` with propagated error.

    ``method="oracle"`` reads both values from truncated-lattice grids, passed in
    ``oracle_grids`` keyed by start point or computed at the default box size.

    Raises
    ------
    DivisionInstabilityError
        If the denominator is not resolved above its own error.
    """
    ref = tuple(ref)
    if (i0, j0) == ref:
        return GreenEstimate(1.0, 0.0, method, {"ref": ref})
    if method == "contour":
        u = uniformize_cached(k) if u is None else u
        num = green_value(k, u, i0, j0, i, j)
        den = green_value(k, u, *ref, i, j)
    elif method == "oracle":
        from .oracle import green_truncated_many

        grids = oracle_grids or green_truncated_many(k, [(i0, j0), ref])
        num = grids[(i0, j0)].estimate(i, j)
        den = grids[ref].estimate(i, j)
    else:
        raise ValueError(f"unknown method {method!r}")
    value, err = _ratio(num, den)
    return GreenEstimate(value, err, method, {"ref": ref})


def martin_limit_diagnostic(k: JumpKernel, u: UniformizationData | None, alpha: float, beta: float,
                            i0: int, j0: int, ref=(1, 1), directions=DEFAULT_SLOPES,
                            radii=DEFAULT_RADII, contour: RayContour | None = None) -> MartinDiagnostic:
    """Martin kernels along several directions at growing radii.

    A single limit ``h(start) / h(ref)`` in every direction is the numerical
    signature of a one-point Martin boundary.
    """
    u = uniformize_cached(k) if u is None else u
    table = np.empty((len(directions), len(radii)))
    targets = {}
    for a, slope in enumerate(directions):
        for b, radius in enumerate(radii):
            i, j = target_on_ray(slope, radius)
            targets[(slope, radius)] = (i, j)
            table[a, b] = martin_kernel(k, u, i0, j0, ref, i, j).value
    prediction = cubic_harmonic(alpha, beta, (i0, j0)) / cubic_harmonic(alpha, beta, ref)
    return MartinDiagnostic(LatticePoint(i0, j0), LatticePoint(*ref), list(directions), list(radii),
                            table, prediction, targets)
