import cmath
import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from quarter_green.exceptions import NonConvergenceError
from quarter_green.green_integral import (
    RayContour,
    admissible_window,
    green_integrand,
    green_value,
    green_values,
    nu_coefficients,
    rho,
    rho_direction,
)
from quarter_green.oracle import TruncationConfig, absorption_from_grid, green_truncated_many
from quarter_green.uniformization import uniformize, x_of_z, y_of_z
from quarter_green.walk_model import SU3, kernel_from_cubic_family, sample_family

SU3_VALUES = {
    (1, 1): 1.0479691190621598,
    (3, 2): 0.07195367859324,
    (1, 3): 0.044267030755578,
    (2, 1): 0.38745504080383,
    (2, 2): 0.114396003349,
}


@pytest.fixture(scope="module")
def su3_u():
    return uniformize(SU3)


@pytest.fixture(scope="module")
def family_kernel():
    c = sample_family(np.random.default_rng(11), 1)[0]
    return kernel_from_cubic_family(c)


@pytest.fixture(scope="module")
def su3_grids():
    return green_truncated_many(SU3, [(1, 1), (2, 3), (3, 1)], TruncationConfig(N=200))


@pytest.mark.parametrize("target,expected", sorted(SU3_VALUES.items()))
def test_su3_frozen_values(su3_u, target, expected):
    est = green_value(SU3, su3_u, 1, 1, *target)
    assert est.value == pytest.approx(expected, rel=1e-9)
    assert est.abs_error < 1e-9
    assert est.method == "contour"


def test_integrand_frozen_value(su3_u):
    z = 0.3 * cmath.exp(5j * math.pi / 6)
    assert green_integrand(SU3, su3_u, 1, 1, 3, 2, z) == pytest.approx(
        0.21637681501623646 - 0.4243936900443308j, rel=1e-12
    )


def test_integrand_vanishes_quadratically_at_zero(su3_u):
    z = 1e-4 * cmath.exp(2.5j)
    ratio = green_integrand(SU3, su3_u, 1, 1, 3, 2, 2 * z) / green_integrand(SU3, su3_u, 1, 1, 3, 2, z)
    assert ratio == pytest.approx(4, rel=1e-2)
    assert green_integrand(SU3, su3_u, 1, 1, 3, 2, 0) == 0
    assert green_integrand(SU3, su3_u, 1, 1, 3, 2, math.inf) == 0


def test_integrand_is_vectorized(su3_u):
    z = np.array([0.2 + 0.1j, -0.5 + 0.5j, 3j])
    vec = green_integrand(SU3, su3_u, 2, 1, 3, 3, z)
    assert vec.shape == (3,)
    assert np.allclose(vec, [green_integrand(SU3, su3_u, 2, 1, 3, 3, w) for w in z])


def test_rho_examples(su3_u):
    assert rho(su3_u, 1.0, 0.0) == pytest.approx(-1 / 3)
    assert rho(su3_u, 1.0, math.inf) == 0
    assert rho_direction(su3_u, 1.0, 0.0) == pytest.approx(math.pi)
    assert rho_direction(su3_u, 1.0, 1.0) == pytest.approx(5 * math.pi / 6)
    assert rho_direction(su3_u, 1.0, math.inf) == pytest.approx(2 * math.pi / 3)
    with pytest.raises(ValueError):
        rho(su3_u, 1.0, -1.0)


@pytest.mark.parametrize("slope", [0.0, 0.5, 1.0, 2.0])
def test_rho_direction_in_sector(family_kernel, slope):
    u = uniformize(family_kernel)
    theta = rho_direction(u, u.omega_y / u.omega_x, slope)
    assert 2 * math.pi / 3 - 1e-12 <= theta <= math.pi + 1e-12


@pytest.mark.parametrize("slope", [0.0, 0.7, 2.0])
def test_nu_matches_cauchy_coefficients(family_kernel, slope):
    u = uniformize(family_kernel)
    alpha = u.omega_y / u.omega_x
    n, r = 256, 0.05
    w = r * np.exp(2j * np.pi * np.arange(n) / n)
    f = np.log(x_of_z(u, w)) + slope * np.log(y_of_z(u, w))
    coeffs = np.fft.fft(f)[:6] / n / r ** np.arange(6)
    nu = nu_coefficients(u, alpha, slope, P=5)
    for p in range(1, 6):
        assert nu[p] == pytest.approx(coeffs[p], rel=1e-8, abs=1e-8)
    assert nu[0] == 0
    assert nu[1] == pytest.approx(1 / rho(u, alpha, slope), rel=1e-12)
    with pytest.raises(ValueError):
        nu_coefficients(u, alpha, slope, P=0)


def test_theta_invariance(su3_u):
    thetas = [2 * math.pi / 3 + 0.05, 2.3, 5 * math.pi / 6, 2.9, math.pi - 0.05]
    values = [green_value(SU3, su3_u, 2, 1, 4, 3, RayContour(theta=t)).value for t in thetas]
    assert (max(values) - min(values)) / np.mean(values) <= 1e-7


def test_theta_outside_window_raises(su3_u):
    with pytest.raises(ValueError, match="admissible window"):
        green_value(SU3, su3_u, 1, 1, 2, 2, RayContour(theta=1.0))


def test_non_interior_points_raise(su3_u):
    with pytest.raises(ValueError):
        green_value(SU3, su3_u, 0, 1, 2, 2)
    with pytest.raises(ValueError):
        green_value(SU3, su3_u, 1, 1, 2, 0)


def test_admissible_window_cases(su3_u):
    assert admissible_window(su3_u, 1, 1, 3, 3) == pytest.approx((2 * math.pi / 3, math.pi))
    assert admissible_window(su3_u, 2, 3, 1, 1) is None
    lo, hi = admissible_window(su3_u, 2, 3, 1, 7)
    assert lo < hi


def test_reversal_is_used_below_and_left(su3_u, su3_grids):
    est = green_value(SU3, su3_u, 2, 3, 1, 1)
    assert est.meta["reversed"]
    assert est.value == pytest.approx(su3_grids[(2, 3)][1, 1], rel=1e-8)


@pytest.mark.parametrize("start", [(2, 3), (3, 1)])
def test_all_quadrants_against_oracle(su3_u, su3_grids, start):
    for i in range(1, 8):
        for j in range(1, 8):
            est = green_value(SU3, su3_u, *start, i, j)
            assert est.value == pytest.approx(su3_grids[start][i, j], rel=1e-7)


def test_family_kernel_against_oracle(family_kernel):
    grids = green_truncated_many(family_kernel, [(2, 3)], TruncationConfig(N=200))
    u = uniformize(family_kernel)
    for i, j in [(1, 1), (1, 6), (4, 1), (2, 3), (5, 5), (1, 12)]:
        assert green_value(family_kernel, u, 2, 3, i, j).value == pytest.approx(grids[(2, 3)][i, j], rel=1e-6)


def test_absorption_identity(su3_u, su3_grids):
    ab = absorption_from_grid(SU3, su3_grids[(1, 1)])
    g = {i: green_value(SU3, su3_u, 1, 1, i, 1).value for i in range(1, 8)}
    g[0] = 0.0
    for i in range(1, 7):
        rhs = SU3[1, -1] * g[i - 1] + SU3[0, -1] * g[i] + SU3[-1, -1] * g[i + 1]
        assert ab.horizontal[i - 1] == pytest.approx(rhs, rel=1e-7)


def test_batch_matches_single_and_keeps_order(su3_u):
    targets = [(3, 2), (1, 1), (2, 2)]
    serial = green_values(SU3, su3_u, 1, 1, targets)
    threaded = green_values(SU3, su3_u, 1, 1, targets, threads=3)
    assert [e.value for e in serial] == [e.value for e in threaded]
    assert serial[1].value == pytest.approx(SU3_VALUES[(1, 1)], rel=1e-9)


def test_large_index_pair_is_finite(su3_u):
    est = green_value(SU3, su3_u, 1, 1, 300, 300)
    assert 0 < est.value < 1e-5


def test_quadrature_warning_becomes_non_convergence(su3_u, monkeypatch):
    from scipy import integrate

    import quarter_green.green_integral as gi

    real_quad = integrate.quad

    def failing_quad(*args, **kwargs):
        warnings.warn("maximum number of subdivisions reached", integrate.IntegrationWarning)
        return real_quad(*args, **kwargs)

    monkeypatch.setattr(gi.integrate, "quad", failing_quad)
    with pytest.raises(NonConvergenceError):
        green_value(SU3, su3_u, 1, 1, 4, 3)


def test_contour_rejects_tiny_budget():
    with pytest.raises(ValueError):
        RayContour(limit=3)


@settings(max_examples=25, deadline=None)
@given(st.integers(1, 4), st.integers(1, 4), st.integers(1, 12), st.integers(1, 12))
def test_green_values_are_positive(i0, j0, i, j):
    est = green_value(SU3, None, i0, j0, i, j)
    assert est.value > 0
    if (i, j) == (i0, j0):
        assert est.value >= 1
