import math

import numpy as np
import pytest

from optrec.classes import ClassSpec, sample_member, seminorm
from optrec.piecewise import TWO_PI, PiecewisePolynomial
from optrec import recovery
from optrec.recovery import (
    best_error_norm,
    best_error_point,
    canonical_nodes,
    empirical_worst_error,
    linear_interpolant,
    node_optimality_gap,
    recover_function,
    recover_point,
    recovery_report,
    trig_interpolant,
    uniform_nodes,
)

PI = math.pi
EULER = ClassSpec("rm1", 2, 10.0)
TRUNC = ClassSpec("rm1", 2, 1.0)
HALF = [0.0, PI]


def test_point_error_oracles():
    assert best_error_point(EULER, HALF, PI / 2) == pytest.approx(PI ** 2 / 8, abs=1e-6)
    assert best_error_point(TRUNC, HALF, PI / 2) == pytest.approx((PI - 1) / 2, abs=1e-6)
    assert best_error_point(EULER, HALF, PI) == pytest.approx(0.0, abs=1e-12)


def test_norm_error_oracles():
    assert best_error_norm(EULER, HALF, math.inf) == pytest.approx(PI ** 2 / 8, abs=1e-6)
    assert best_error_norm(EULER, HALF, "inf") == pytest.approx(PI ** 2 / 8, abs=1e-6)
    assert best_error_norm(EULER, HALF, 1) == pytest.approx(PI ** 3 / 6, abs=1e-6)
    with pytest.raises(ValueError):
        best_error_norm(EULER, HALF, 0.5)


@pytest.mark.parametrize("spec, u", [
    (ClassSpec("rm2", 3, 0.3), [0.4, 1.5, 3.0, 5.0]),
    (ClassSpec("rm1m2", 4, 0.5, 0.3), [0.0, 1.0, 2.5, 3.0, 4.0, 5.5]),
])
def test_sup_norm_is_max_of_point_errors(spec, u):
    tau = np.linspace(0, TWO_PI, 2048, endpoint=False)
    grid = max(best_error_point(spec, u, t) for t in tau)
    assert best_error_norm(spec, u, math.inf) >= grid - 1e-12
    assert best_error_norm(spec, u, math.inf) == pytest.approx(grid, abs=1e-5)
    # the exact argmax closes the remaining gap
    phi = recovery.ideal_spline(spec, u)
    _, arg = phi.body.sup_norm()
    assert best_error_point(spec, u, arg) == pytest.approx(best_error_norm(spec, u, math.inf), abs=1e-8)


def test_zero_data_recovers_zero():
    assert recover_point(TRUNC, HALF, [0.0, 0.0], 1.0) == 0.0
    assert recover_function(TRUNC, HALF, [0.0, 0.0]).sup_norm()[0] == 0.0


def test_witness_attains_the_bound():
    spec, u = ClassSpec("rm2", 3, 0.5), [0.3, 1.2, 2.9, 4.4]
    phi = recovery.ideal_spline(spec, u)
    # +-phi lie in the class and vanish at u, so every method sees zero data
    assert seminorm(phi.body, spec) <= 1 + 1e-9
    assert seminorm(-phi.body, spec) <= 1 + 1e-9
    s = recover_function(spec, u, phi.body(u))
    for tau in (0.7, 2.0, 5.0):
        assert abs(phi.body(tau) - s(tau)) == pytest.approx(abs(phi.body(tau)), abs=1e-9)
        w = recovery.problem(spec, u).weights(tau)
        assert abs(phi.body(tau) - w @ np.zeros(4)) == abs(phi.body(tau))


def test_recovery_inequality_on_samples():
    spec, u = ClassSpec("rm1m2", 3, 0.1, 0.3), [0.2, 1.7, 3.3, 4.9]
    prob = recovery.problem(spec, u)
    t = np.linspace(0, TWO_PI, 1000, endpoint=False)
    bound = np.abs(prob.phi.body(t))
    for i in range(40):
        x = sample_member(spec, [3, i]).body
        s = prob.recover_function(x(u))
        assert np.all(np.abs(x(t) - s(t)) <= bound + 1e-7)


def test_uniform_nodes():
    np.testing.assert_allclose(uniform_nodes(1), [0.0, PI])
    np.testing.assert_allclose(uniform_nodes(2), [0.0, PI / 2, PI, 3 * PI / 2])
    np.testing.assert_allclose(np.diff(uniform_nodes(5)), PI / 5)
    with pytest.raises(ValueError):
        uniform_nodes(0)


def test_canonical_nodes_rotate_to_zero():
    np.testing.assert_allclose(canonical_nodes([1.0, 2.0, 6.0]), [0.0, 1.0, 5.0])
    np.testing.assert_allclose(canonical_nodes(uniform_nodes(2) + 0.3), uniform_nodes(2), atol=1e-15)


def test_node_gap_examples():
    assert node_optimality_gap(TRUNC, uniform_nodes(2)) == 0.0
    assert node_optimality_gap(TRUNC, np.mod(uniform_nodes(2) + 0.77, TWO_PI)) == pytest.approx(0.0, abs=1e-12)
    assert node_optimality_gap(EULER, [0.0, PI / 2 + 0.3, PI, 3 * PI / 2]) > 0


@pytest.mark.parametrize("spec", [ClassSpec("rm1", 3, 0.5), ClassSpec("rm2", 3, 0.5), ClassSpec("rm1m2", 3, 1.0, 0.6)])
def test_perturbed_uniform_nodes_are_worse(spec):
    star = uniform_nodes(2)
    for j in range(4):
        for d in (0.05, -0.2, 0.5):
            u = star.copy()
            u[j] += d
            assert node_optimality_gap(spec, np.sort(np.mod(u, TWO_PI))) > 0


def test_linear_interpolant_is_periodic_and_interpolates():
    u, v = [0.5, 2.0, 4.0, 5.0], [1.0, -1.0, 2.0, 0.0]
    f = linear_interpolant(u, v)
    np.testing.assert_allclose(f(u), v, atol=1e-14)
    assert f.max_jump(0) < 1e-14
    g = linear_interpolant([0.0, 3.0], [1.0, 2.0])
    np.testing.assert_allclose(g([0.0, 3.0]), [1.0, 2.0])


def test_trig_interpolant_reproduces_data():
    u = uniform_nodes(3)
    v = np.array([1.0, 0.2, -0.5, 0.3, 2.0, -1.0])
    f = trig_interpolant(u, v)
    np.testing.assert_allclose(f(u), v, atol=1e-12)


def test_zero_method_on_the_witness():
    spec, u = TRUNC, HALF
    phi = recovery.ideal_spline(spec, u)

    def witness_method(uu, v):
        return PiecewisePolynomial.zero()

    err = recovery._error(phi.body, witness_method(u, phi.body(u)), PI / 2, None)
    assert err == pytest.approx(abs(phi.body(PI / 2)))


def test_optimal_method_stays_below_the_bound():
    spec, u = ClassSpec("rm2", 3, 0.3), [0.4, 1.5, 3.0, 5.0]
    for tau in (0.9, 2.2):
        e = empirical_worst_error("optimal", spec, u, tau=tau, samples=60, seed=1)
        assert e <= best_error_point(spec, u, tau) + 1e-7
    assert empirical_worst_error("optimal", spec, u, p=math.inf, samples=60) <= best_error_norm(spec, u, math.inf) + 1e-7
    assert empirical_worst_error("optimal", spec, u, p=2, samples=30) <= best_error_norm(spec, u, 2) + 1e-7


def test_witness_defeats_every_baseline():
    # sampled maxima are only lower estimates, so compare baselines through the witness:
    # +-phi give zero data, every linear method returns 0 and errs by ||phi|| somewhere
    u = uniform_nodes(2)
    phi = recovery.ideal_spline(TRUNC, u)
    bound = best_error_norm(TRUNC, u, math.inf)
    for builder in (linear_interpolant, trig_interpolant):
        s = builder(u, phi.body(u))
        t = np.linspace(0, TWO_PI, 4096, endpoint=False)
        assert np.max(np.abs(phi.body(t) - s(t))) == pytest.approx(bound, abs=1e-6)
    for method in ("optimal", "linear", "trig", "zero"):
        assert empirical_worst_error(method, TRUNC, u, p=math.inf, samples=30, seed=0) >= 0


def test_empirical_error_is_deterministic_and_order_free():
    spec, u = ClassSpec("rm1", 3, 0.5), [0.0, 1.0, 3.0, 4.0]
    a = empirical_worst_error("linear", spec, u, tau=2.0, samples=20, seed=4)
    b = empirical_worst_error("linear", spec, u, tau=2.0, samples=20, seed=4)
    assert a == b
    # the first ten samples are the same members whatever the total
    c = empirical_worst_error("linear", spec, u, tau=2.0, samples=10, seed=4)
    assert c <= a


def test_empirical_error_argument_checks():
    with pytest.raises(ValueError):
        empirical_worst_error("optimal", TRUNC, HALF, samples=1)
    with pytest.raises(ValueError):
        empirical_worst_error("optimal", TRUNC, HALF, tau=1.0, p=1, samples=1)
    with pytest.raises(ValueError):
        empirical_worst_error("optimal", TRUNC, HALF, tau=1.0, samples=0)
    with pytest.raises(ValueError):
        empirical_worst_error("nearest", TRUNC, HALF, tau=1.0, samples=1)


def test_custom_callable_method():
    u = uniform_nodes(1)
    e = empirical_worst_error(lambda uu, v: (lambda t: np.full(np.shape(np.atleast_1d(t)), np.mean(v))),
                              TRUNC, u, tau=0.5, samples=5)
    assert e >= 0


def test_report_invariants():
    spec, u = ClassSpec("rm2", 3, 0.5), [0.2, 1.3, 3.1, 4.6]
    rep = recovery_report(spec, u, taus=[u[0], 1.0], ps=[1, math.inf], methods=["optimal"], samples=10)
    assert rep.E_point[u[0]] == pytest.approx(0.0, abs=1e-8)
    assert rep.E_norm[math.inf] >= rep.E_point[1.0]
    assert rep.node_gap >= -1e-9
    d = rep.to_dict()
    assert set(d["E_norm"]) == {"1.0", "inf"}
    assert d["empirical"]["optimal@p=inf"] <= rep.E_norm[math.inf] + 1e-7
