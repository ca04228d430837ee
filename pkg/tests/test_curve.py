import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.polynomial import polynomial as P

from quarter_green.curve import (
    CurvePolynomials,
    branch_points,
    deflate_double_root,
    discriminant_d,
    discriminant_dt,
    q_eval,
)
from quarter_green.exceptions import DegenerateCurveError
from quarter_green.walk_model import SU3, JumpKernel, cartesian_kernel

UNIFORM = JumpKernel((1 / 8,) * 8)


def _random_points(seed, n=20):
    rng = np.random.default_rng(seed)
    return rng.normal(size=n) + 1j * rng.normal(size=n), rng.normal(size=n) + 1j * rng.normal(size=n)


def test_q_vanishes_at_one_one(family_sample):
    for _, k in family_sample:
        assert abs(q_eval(k, 1.0, 1.0)) < 1e-15


def test_su3_q_at_four_two_matches_both_forms():
    x, y = 4.0, 2.0
    direct = x * y * ((1 / 3) * x + (1 / 3) * y / x + (1 / 3) / y - 1)
    cp = CurvePolynomials.from_kernel(SU3)
    assert q_eval(SU3, x, y) == pytest.approx(direct, abs=1e-14)
    assert cp.q(x, y) == pytest.approx(direct, abs=1e-14)


def test_three_forms_agree_at_random_points(family_sample):
    x, y = _random_points(0)
    for _, k in family_sample:
        cp = CurvePolynomials.from_kernel(k)
        ref = q_eval(k, x, y)
        assert np.max(np.abs(cp.q(x, y) - ref)) < 1e-12
        assert np.max(np.abs(cp.q_dual(x, y) - ref)) < 1e-12


def test_double_root_at_one(family_sample):
    for _, k in family_sample + [(None, UNIFORM)]:
        for d in (discriminant_d(k), discriminant_dt(k)):
            assert abs(P.polyval(1.0, d)) < 1e-12
            assert abs(P.polyval(1.0, P.polyder(d))) < 1e-12


def test_su3_discriminants():
    d = discriminant_d(SU3)
    for root in (0.0, 1.0, 4.0):
        assert abs(P.polyval(root, d)) < 1e-14
    dt = discriminant_dt(SU3)
    assert abs(dt[4]) < 1e-15  # degree drop: y4 at infinity
    assert abs(P.polyval(0.25, dt)) < 1e-14


def test_su3_branch_points():
    bp = branch_points(SU3)
    assert bp.x1 == pytest.approx(0, abs=1e-14)
    assert bp.x4 == pytest.approx(4, abs=1e-12)
    assert bp.y1 == pytest.approx(0.25, abs=1e-14)
    assert math.isinf(bp.y4)
    assert bp.disc_y == 0


def test_symmetric_cartesian_kernel_has_equal_branch_points():
    bp = branch_points(cartesian_kernel(1 / 6))
    assert bp.x1 == pytest.approx(bp.y1, abs=1e-14)
    assert bp.x4 == pytest.approx(bp.y4, rel=1e-12)


def test_deflation_quotient_reproduces_quartic(family_sample):
    for _, k in family_sample:
        d = discriminant_d(k)
        q0, q1, q2 = deflate_double_root(d)
        rebuilt = P.polymul([q0, q1, q2], [1, -2, 1])
        assert np.allclose(rebuilt, d, atol=1e-14)


def test_branch_point_invariants(family_sample):
    for _, k in family_sample:
        bp = branch_points(k)
        for lo, hi, d in ((bp.x1, bp.x4, discriminant_d(k)), (bp.y1, bp.y4, discriminant_dt(k))):
            assert abs(lo) < 1
            assert abs(P.polyval(lo, d)) < 1e-10
            assert math.isinf(hi) or (abs(hi) > 1 and abs(P.polyval(hi, d)) < 1e-10 * max(1, hi**4))


def test_sign_criteria(family_sample):
    for _, k in family_sample:
        bp = branch_points(k)
        assert np.sign(bp.x1) == np.sign(k[-1, 0] ** 2 - 4 * k[-1, 1] * k[-1, -1])
        assert np.sign(bp.y1) == np.sign(k[0, -1] ** 2 - 4 * k[1, -1] * k[-1, -1])
        if not math.isinf(bp.x4):
            assert np.sign(bp.x4) == np.sign(bp.disc_x)
        if not math.isinf(bp.y4):
            assert np.sign(bp.y4) == np.sign(bp.disc_y)


def test_infinity_iff_leading_coefficient_vanishes():
    for mu in (0.0, 0.1, 1 / 3):
        bp = branch_points(cartesian_kernel(mu))
        assert math.isinf(bp.x4) == (abs(bp.disc_x) <= 1e-14)


def test_degenerate_curve_raises():
    # walk that never moves horizontally: the x-discriminant is identically zero
    k = JumpKernel.from_dict({(0, 1): 0.5, (0, -1): 0.5})
    with pytest.raises(DegenerateCurveError):
        branch_points(k)


@settings(max_examples=40, deadline=None)
@given(st.floats(-3, 3), st.floats(-3, 3), st.floats(-3, 3), st.floats(-3, 3))
def test_dual_form_identity_property(xr, xi, yr, yi):
    x, y = complex(xr, xi), complex(yr, yi)
    cp = CurvePolynomials.from_kernel(SU3)
    assert abs(cp.q(x, y) - cp.q_dual(x, y)) <= 1e-12 * (1 + abs(x)) ** 2 * (1 + abs(y)) ** 2
