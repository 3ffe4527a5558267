"""Optimal recovery from 2n samples: best errors, optimal methods, node comparison.

The worst-case error of recovering ``x(tau)`` (or ``x`` in ``L_p``) over the
class from ``x(u_1), ..., x(u_2n)`` equals ``|phi(tau)|`` (``||phi||_p``),
where ``phi`` is the ideal spline vanishing at ``u``.  The optimal method
interpolates the data in the spline space generated by ``phi'``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .classes import ClassSpec, sample_member
from .ideal_spline import SolverOptions, find_ideal_spline, validate_nodes
from .interpolation import factor, space_from_ideal
from .piecewise import TWO_PI, PiecewisePolynomial

GRID_POINTS = 4096


def parse_p(p):
    if isinstance(p, str):
        if p.strip().lower() in ("inf", "infinity", "oo"):
            return math.inf
        p = float(p)
    p = float(p)
    if not p >= 1:
        raise ValueError("p must be >= 1")
    return p


@dataclass(frozen=True, eq=False)
class RecoveryProblem:
    """Ideal spline, spline space and factored collocation for fixed ``(spec, u)``."""

    spec: ClassSpec
    nodes: np.ndarray
    phi: object
    space: object
    collocation: object

    def weights(self, tau):
        return self.collocation.weights(tau)

    def recover_function(self, v):
        return self.collocation.solve(v)


@lru_cache(maxsize=512)
def _problem(spec, key, opts):
    u = np.asarray(key, dtype=float)
    phi = find_ideal_spline(u, spec, opts)
    space = space_from_ideal(phi)
    return RecoveryProblem(spec, u, phi, space, factor(space, u))


def problem(spec, u, opts=None):
    u = validate_nodes(u)
    return _problem(spec, tuple(float(x) for x in u), opts or SolverOptions())


def clear_cache():
    _problem.cache_clear()


def ideal_spline(spec, u, opts=None):
    return problem(spec, u, opts).phi


def best_error_point(spec, u, tau, opts=None):
    """``E(X, u, tau) = |phi(X, u; tau)|``."""
    return float(np.abs(problem(spec, u, opts).phi.body(tau)))


def best_error_norm(spec, u, p, opts=None):
    """``E(X, u, ||.||_p) = ||phi(X, u; .)||_p``."""
    return float(problem(spec, u, opts).phi.body.lp_norm(parse_p(p)))


def recover_point(spec, u, v, tau, opts=None):
    """Optimal linear method at ``tau``: ``sum_k w_k v_k``."""
    v = np.asarray(v, dtype=float)
    return float(problem(spec, u, opts).weights(tau) @ v)


def recover_function(spec, u, v, opts=None):
    """Optimal global method: the interpolant of ``v`` at ``u`` in the derived spline space."""
    return problem(spec, u, opts).recover_function(v)


def uniform_nodes(n):
    if n < 1:
        raise ValueError("n must be >= 1")
    return np.pi * np.arange(2 * n) / n


def canonical_nodes(u):
    """Sorted nodes rotated so that the first one sits at 0."""
    w = np.sort(np.mod(np.asarray(u, dtype=float), TWO_PI))
    return np.sort(np.mod(w - w[0], TWO_PI))


def node_optimality_gap(spec, u, opts=None):
    """``||phi(u)||_inf - ||phi(u*)||_inf`` with ``u`` canonicalized by rotation."""
    u = canonical_nodes(u)
    star = uniform_nodes(len(u) // 2)
    if np.allclose(u, star, rtol=0, atol=1e-12):
        return 0.0
    return best_error_norm(spec, u, math.inf, opts) - best_error_norm(spec, star, math.inf, opts)


# ---------------------------------------------------------------------------
# comparison methods
# ---------------------------------------------------------------------------

def linear_interpolant(u, v):
    """Periodic piecewise-linear interpolant of ``(u_k, v_k)``."""
    order = np.argsort(np.mod(u, TWO_PI))
    w = np.mod(np.asarray(u, dtype=float)[order], TWO_PI)
    y = np.asarray(v, dtype=float)[order]
    wrap = (y[0] - y[-1]) / (w[0] + TWO_PI - w[-1])
    breaks, coeffs = [0.0], []
    if w[0] > 0:
        # the segment from the last node crosses 0
        breaks.append(w[0])
        coeffs.append([y[-1] + wrap * (TWO_PI - w[-1]), wrap])
    for i in range(len(w) - 1):
        breaks.append(w[i + 1])
        coeffs.append([y[i], (y[i + 1] - y[i]) / (w[i + 1] - w[i])])
    breaks.append(TWO_PI)
    coeffs.append([y[-1], wrap])
    return PiecewisePolynomial(breaks, coeffs, continuity=0)


def trig_interpolant(u, v):
    """Trigonometric interpolant in ``1, cos kt, sin kt`` (``k < n``) and ``cos n(t - u_1)``."""
    u = np.asarray(u, dtype=float)
    n = len(u) // 2

    def design(t):
        t = np.atleast_1d(np.asarray(t, dtype=float))
        cols = [np.ones_like(t)]
        for k in range(1, n):
            cols += [np.cos(k * t), np.sin(k * t)]
        cols.append(np.cos(n * (t - u[0])))
        return np.column_stack(cols)

    coef = np.linalg.lstsq(design(u), np.asarray(v, dtype=float), rcond=None)[0]
    return lambda t: design(t) @ coef


def _method(name, spec, u, opts):
    if callable(name):
        return name
    if name == "optimal":
        return lambda uu, v: recover_function(spec, uu, v, opts)
    if name == "linear":
        return linear_interpolant
    if name == "trig":
        return trig_interpolant
    if name == "zero":
        return lambda uu, v: PiecewisePolynomial.zero()
    raise ValueError(f"unknown method {name!r}")


def _error(x, s, tau, p):
    if tau is not None:
        return float(abs(x(tau) - np.asarray(s(tau)).ravel()[0]))
    if isinstance(s, PiecewisePolynomial):
        return float((x - s).lp_norm(p))
    t = np.linspace(0.0, TWO_PI, GRID_POINTS, endpoint=False)
    diff = np.abs(x(t) - np.asarray(s(t)).ravel())
    if math.isinf(p):
        return float(np.max(diff))
    return float((np.mean(diff ** p) * TWO_PI) ** (1.0 / p))


def empirical_worst_error(method, spec, u, tau=None, p=None, samples=100, seed=0, roughness=3, opts=None):
    """Largest error of ``method`` over ``samples`` random class members (a lower estimate).

    Exactly one of ``tau`` (pointwise) or ``p`` (global ``L_p``) is used.
    Member ``i`` is drawn with seed ``(seed, i)``, so the result does not
    depend on evaluation order.
    """
    if samples < 1:
        raise ValueError("samples must be >= 1")
    if (tau is None) == (p is None):
        raise ValueError("give exactly one of tau and p")
    u = validate_nodes(u)
    p = None if p is None else parse_p(p)
    f = _method(method, spec, u, opts)
    worst = 0.0
    for i in range(samples):
        x = sample_member(spec, [seed, i], roughness).body
        worst = max(worst, _error(x, f(u, x(u)), tau, p))
    return worst


# ---------------------------------------------------------------------------
# report
# ---------------------------------------------------------------------------

@dataclass
class RecoveryReport:
    spec: ClassSpec
    nodes: np.ndarray
    E_point: dict = field(default_factory=dict)
    E_norm: dict = field(default_factory=dict)
    weights: dict = field(default_factory=dict)
    node_gap: float = 0.0
    empirical: dict = field(default_factory=dict)

    def to_dict(self):
        key = lambda p: "inf" if math.isinf(p) else repr(p)
        return {
            "spec": self.spec.to_dict(),
            "nodes": np.asarray(self.nodes).tolist(),
            "E_point": {repr(t): v for t, v in self.E_point.items()},
            "E_norm": {key(p): v for p, v in self.E_norm.items()},
            "weights": {repr(t): np.asarray(w).tolist() for t, w in self.weights.items()},
            "node_gap": self.node_gap,
            "empirical": self.empirical,
        }


def recovery_report(spec, u, taus=(), ps=(math.inf,), methods=(), samples=50, seed=0, opts=None):
    u = validate_nodes(u)
    rep = RecoveryReport(spec, u)
    for t in taus:
        rep.E_point[float(t)] = best_error_point(spec, u, t, opts)
        rep.weights[float(t)] = problem(spec, u, opts).weights(t)
    for p in ps:
        rep.E_norm[parse_p(p)] = best_error_norm(spec, u, p, opts)
    rep.node_gap = node_optimality_gap(spec, u, opts)
    for m in methods:
        for p in ps:
            k = f"{m}@p={'inf' if math.isinf(parse_p(p)) else p}"
            rep.empirical[k] = empirical_worst_error(m, spec, u, p=p, samples=samples, seed=seed, opts=opts)
    return rep
