import io
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from optrec.piecewise import TWO_PI, PiecewisePolynomial, merge_points, poly_real_roots, taylor_shift

PI = math.pi


def triangle():
    """Unit-slope triangle wave, pi/2 at 0, falling to -pi/2 at pi."""
    return PiecewisePolynomial.step([0, PI, TWO_PI], [-1.0, 1.0]).antiderivative(0.0) + PI / 2


def euler2():
    """Order-2 Euler spline with zeros 0 and pi."""
    return triangle().antiderivative(0.0)


def test_step_values_and_right_limits():
    f = PiecewisePolynomial.step([0, 1, 3, TWO_PI], [2.0, -1.0, 0.5])
    assert f(0.5) == 2.0
    assert f(1.0) == -1.0
    assert f.left_limit(1.0) == 2.0
    assert f(3.5) == 0.5
    # evaluation is periodic
    assert f(TWO_PI + 0.5) == 2.0
    assert f(-0.5) == 0.5


def test_breakpoints_must_span_the_period():
    with pytest.raises(ValueError):
        PiecewisePolynomial([0.0, 1.0], [[1.0]])


def test_antiderivative_of_triangle_is_euler_shape():
    e = euler2()
    assert e(PI / 2) == pytest.approx(PI ** 2 / 8, abs=1e-14)
    assert e.sup_norm() == pytest.approx((PI ** 2 / 8, PI / 2), abs=1e-14)
    assert e.mean() == pytest.approx(0.0, abs=1e-14)
    assert e.max_jump(0) < 1e-14
    assert e.max_jump(1) < 1e-14


def test_l1_norm_of_euler_shape():
    assert euler2().lp_norm(1) == pytest.approx(PI ** 3 / 6, abs=1e-12)


def test_l2_norm_matches_dense_quadrature():
    e = euler2()
    t = np.linspace(0, TWO_PI, 200001)
    dense = math.sqrt(np.trapezoid(e(t) ** 2, t))
    assert e.lp_norm(2) == pytest.approx(dense, rel=1e-8)


def test_lp_norm_rejects_p_below_one():
    with pytest.raises(ValueError):
        euler2().lp_norm(0.5)


def test_triangle_antiderivative_based_at_point():
    assert triangle().antiderivative(0)(PI / 2) == pytest.approx(PI ** 2 / 8)
    g = triangle().antiderivative(PI / 3)
    assert g(PI / 3) == pytest.approx(0.0, abs=1e-15)


def test_derivative_round_trip():
    e = euler2()
    back = e.derivative().antiderivative(0.0) + e(0.0)
    t = np.linspace(0, TWO_PI, 101)
    np.testing.assert_allclose(back(t), e(t), atol=1e-14)


def test_roots_and_derivative_roots():
    e = euler2()
    np.testing.assert_allclose(e.roots(), [0.0, PI], atol=1e-12)
    np.testing.assert_allclose(e.roots(1), [PI / 2, 3 * PI / 2], atol=1e-12)


def test_root_on_breakpoint_is_found():
    # the value at the breakpoint is a rounding-level negative number on both sides
    f = PiecewisePolynomial([0.0, 1.0, TWO_PI], [[1.0, -1.0 - 1e-17, 0.0, 0.0], [-1e-18, -0.5, 0.0, 0.05]])
    roots = f.roots()
    assert np.min(np.abs(roots - 1.0)) < 1e-12


def test_poly_real_roots_cubic():
    # (x - 0.5)(x - 1)(x - 2)
    c = [-1.0, 3.5, -3.5, 1.0]
    np.testing.assert_allclose(poly_real_roots(c, 0.0, 3.0), [0.5, 1.0, 2.0], atol=1e-13)


def test_taylor_shift_matches_direct_evaluation():
    c = np.array([[1.0, -2.0, 0.5, 3.0]])
    shifted = taylor_shift(c, np.array([0.7]))
    x = 0.3
    direct = np.polyval(c[0][::-1], x + 0.7)
    assert np.polyval(shifted[0][::-1], x) == pytest.approx(direct)


def test_rotate_translates_the_graph():
    e = euler2()
    g = e.rotate(1.0)
    t = np.linspace(0, TWO_PI, 50)
    np.testing.assert_allclose(g(t), e(t - 1.0), atol=1e-14)
    assert g.sup_norm()[0] == pytest.approx(e.sup_norm()[0])


def test_short_pieces_are_coalesced():
    f = PiecewisePolynomial([0, 1, 1 + 1e-13, TWO_PI], [[1.0], [5.0], [2.0]])
    np.testing.assert_allclose(f.breakpoints, [0, 1, TWO_PI])
    assert f(0.5) == 1.0
    assert f(3.0) == 2.0


def test_merge_points_dedups():
    np.testing.assert_allclose(merge_points([0.0, 1.0, 1.0 + 1e-14, 2.0]), [0.0, 1.0, 2.0])


def test_arithmetic_aligns_breakpoints():
    a = PiecewisePolynomial.step([0, 1, TWO_PI], [1.0, 2.0])
    b = PiecewisePolynomial.step([0, 2, TWO_PI], [10.0, 20.0])
    c = a + b
    assert c(0.5) == 11.0 and c(1.5) == 12.0 and c(3.0) == 22.0
    assert (a - b)(3.0) == -18.0
    assert (2 * a)(1.5) == 4.0
    assert (a / 2)(0.5) == 0.5
    assert (-a)(0.5) == -1.0
    assert (a + 1.0)(0.5) == 2.0


def test_json_round_trip_is_exact():
    e = euler2()
    f = PiecewisePolynomial.from_json(e.to_json())
    np.testing.assert_array_equal(f.breakpoints, e.breakpoints)
    np.testing.assert_array_equal(f.coeffs, e.coeffs)


def test_csv_header_and_rows():
    buf = io.StringIO()
    euler2().to_csv(buf, n=8, derivatives=2, name="phi")
    lines = buf.getvalue().strip().splitlines()
    assert lines[0] == "t,phi,phi_d1,phi_d2"
    assert len(lines) == 9


def test_arrays_are_read_only():
    e = euler2()
    with pytest.raises(ValueError):
        e.coeffs[0, 0] = 1.0


# -- properties ------------------------------------------------------------

@st.composite
def step_functions(draw):
    k = draw(st.integers(1, 6))
    cuts = sorted(draw(st.lists(st.floats(0.05, TWO_PI - 0.05), min_size=k, max_size=k, unique=True)))
    cuts = [c for i, c in enumerate(cuts) if i == 0 or c - cuts[i - 1] > 1e-3]
    vals = draw(st.lists(st.floats(-3, 3), min_size=len(cuts) + 1, max_size=len(cuts) + 1))
    return PiecewisePolynomial.step([0.0, *cuts, TWO_PI], vals)


@settings(max_examples=60, deadline=None)
@given(step_functions(), st.integers(1, 3))
def test_integrated_steps_have_zero_mean_and_derivative_identity(f, depth):
    g = f.subtract_mean()
    for _ in range(depth):
        g = g.antiderivative(0.0).subtract_mean()
    assert abs(g.mean()) < 1e-12
    assert g.max_jump(0) < 1e-10
    t = np.linspace(0.01, TWO_PI - 0.01, 37)
    np.testing.assert_allclose(g.derivative(depth)(t), f.subtract_mean()(t), atol=1e-10)


@settings(max_examples=60, deadline=None)
@given(step_functions(), st.floats(0.0, TWO_PI))
def test_norms_are_rotation_invariant(f, shift):
    g = f.antiderivative(0.0)
    h = g.rotate(shift)
    assert h.sup_norm()[0] == pytest.approx(g.sup_norm()[0], rel=1e-12, abs=1e-12)
    assert h.lp_norm(1) == pytest.approx(g.lp_norm(1), rel=1e-10, abs=1e-12)


@settings(max_examples=40, deadline=None)
@given(step_functions(), step_functions())
def test_sup_norm_triangle_inequality(f, g):
    a, b = f.antiderivative(0.0), g.antiderivative(0.0)
    assert (a + b).sup_norm()[0] <= a.sup_norm()[0] + b.sup_norm()[0] + 1e-12


@settings(max_examples=40, deadline=None)
@given(step_functions())
def test_sup_norm_dominates_grid(f):
    g = f.antiderivative(0.0).subtract_mean()
    t = np.linspace(0, TWO_PI, 2001)
    assert np.max(np.abs(g(t))) <= g.sup_norm()[0] + 1e-12
