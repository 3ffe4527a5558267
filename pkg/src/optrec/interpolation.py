"""Spline spaces shaped by an ideal spline's knot pattern, and interpolation in them.

The space consists of periodic splines whose top derivative (of order
``order``) is a free constant on the ramp pieces of the ideal spline and
zero elsewhere.  At each knot either the next-lower derivative vanishes
(clamped knot: the ideal spline sits at its bound there) or the constants on
the two ramps meeting at the knot coincide.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy.linalg import lu_factor, lu_solve, null_space

from .classes import Variant
from .ideal_spline import pattern_intervals
from .piecewise import TWO_PI, PiecewisePolynomial, merge_points

CLAMP_TOL = 1e-7
AMBIGUOUS_TOL = 1e-5
CONSTRAINT_TOL = 1e-10
SINGULAR_COND = 1e14


class PatternDimensionError(ValueError):
    pass


class SingularSystemError(ValueError):
    pass


class InterlacingError(ValueError):
    pass


@dataclass(frozen=True)
class SplinePattern:
    """Knot pattern of a spline space.

    ``intervals`` are ``(lo, hi, param)`` tiling ``[knots[0], knots[0] + 2*pi)``
    where ``param`` indexes the free top-derivative constant (``None``: top is 0).
    ``clamped[k]`` selects the knot constraint at ``knots[k]``; ``ramps[k]``
    holds the parameters of the rising and falling ramps of knot ``k``.
    """

    variant: Variant
    order: int
    knots: tuple
    intervals: tuple
    clamped: tuple
    ramps: tuple
    n_params: int
    clamp_levels: tuple = ()
    generator_zeros: tuple | None = None

    @property
    def n(self):
        return len(self.knots) // 2

    @property
    def origin(self):
        return self.knots[0]

    def with_clamps(self, clamped):
        return SplinePattern(
            self.variant,
            self.order,
            self.knots,
            self.intervals,
            tuple(bool(c) for c in clamped),
            self.ramps,
            self.n_params,
            self.clamp_levels,
            self.generator_zeros,
        )


def pattern_from_ideal(phi, derived=True):
    """Pattern of the space generated by ``phi'`` (``derived``) or by ``phi`` itself."""
    spec = phi.spec
    order = spec.r - 1 if derived else spec.r
    generator = phi.body.derivative() if derived else phi.body
    intervals, ramps, n_params = [], [], 0
    current = []
    for lo, hi, kind, k in pattern_intervals(phi.structure, spec.variant):
        if k == len(ramps):
            ramps.append(current := [None, None])
        if kind in ("up", "down"):
            intervals.append((lo, hi, n_params))
            current[0 if kind == "up" else 1] = n_params
            n_params += 1
        else:
            intervals.append((lo, hi, None))
    levels = tuple(float(abs(phi.body(t, spec.clamp_order))) for t in phi.knots)
    clamped = tuple(lv >= spec.M - CLAMP_TOL for lv in levels)
    zeros = generator.roots()
    return SplinePattern(
        spec.variant,
        order,
        tuple(float(t) for t in phi.knots),
        tuple(intervals),
        clamped,
        tuple(tuple(r) for r in ramps),
        n_params,
        levels,
        tuple(float(z) for z in zeros),
    )


@dataclass(frozen=True, eq=False)
class SplineSpace:
    pattern: SplinePattern
    raw_dim: int
    constraints: np.ndarray
    breakpoints: np.ndarray  # local frame, starting at the pattern origin
    coeffs: np.ndarray  # (dim, pieces, order + 1), local frame

    @property
    def dim(self):
        return self.coeffs.shape[0]

    @property
    def order(self):
        return self.pattern.order

    def element(self, coef):
        """The spline ``sum_i coef_i * basis_i``."""
        c = np.tensordot(np.asarray(coef, dtype=float), self.coeffs, axes=1)
        local = PiecewisePolynomial(self.breakpoints, c, continuity=self.order - 1)
        return local.rotate(self.pattern.origin)

    @cached_property
    def basis(self):
        eye = np.eye(self.dim)
        return tuple(self.element(e) for e in eye)

    def collocation_matrix(self, nodes):
        x = np.mod(np.asarray(nodes, dtype=float) - self.pattern.origin, TWO_PI)
        cols = [PiecewisePolynomial(self.breakpoints, c)(x) for c in self.coeffs]
        return np.column_stack(cols)


def _unit_polynomial(power, breakpoints):
    c = np.zeros((1, power + 1))
    c[0, power] = 1.0 / np.prod(np.arange(1, power + 1)) if power else 1.0
    return PiecewisePolynomial([0.0, TWO_PI], c).refine(breakpoints)


def _raw_generators(pattern, nb):
    """Unknown-by-unknown splines in the local frame: ramp constants, then integration constants."""
    origin, order = pattern.origin, pattern.order
    mids = 0.5 * (nb[:-1] + nb[1:])
    owner = np.full(len(mids), -1)
    for lo, hi, param in pattern.intervals:
        if param is None:
            continue
        inside = (mids > lo - origin) & (mids < hi - origin)
        owner[inside] = param
    gens = []
    for j in range(pattern.n_params):
        f = PiecewisePolynomial.step(nb, (owner == j).astype(float))
        for _ in range(order):
            f = f.antiderivative(0.0)
        gens.append(f.refine(nb))
    for power in range(order):
        gens.append(_unit_polynomial(power, nb))
    supported = [bool(np.any(owner == j)) for j in range(pattern.n_params)]
    return gens, supported


def _stack(gens, nb, order):
    out = np.zeros((len(gens), len(nb) - 1, order + 1))
    for i, g in enumerate(gens):
        if not np.allclose(g.breakpoints, nb, rtol=0, atol=1e-12):
            g = g.refine(nb)
        out[i, :, : g.coeffs.shape[1]] = g.coeffs
    return out


def build_space(pattern):
    """Null-space parametrization of the constrained spline space (dimension ``2n``)."""
    order, origin = pattern.order, pattern.origin
    edges = [lo - origin for lo, _, _ in pattern.intervals] + [TWO_PI]
    nb = merge_points(np.clip(edges, 0.0, TWO_PI))
    nb[0], nb[-1] = 0.0, TWO_PI
    gens, supported = _raw_generators(pattern, nb)
    raw = _stack(gens, nb, order)
    n_raw = len(gens)
    rows = []
    # periodicity of derivatives 0 .. order-1
    for d in range(order):
        rows.append([g.left_limit(TWO_PI, d) - g(0.0, d) for g in gens])
    # ramps of zero length carry no information
    for j, ok in enumerate(supported):
        if not ok:
            row = np.zeros(n_raw)
            row[j] = 1.0
            rows.append(row)
    if pattern.variant is not Variant.RM1:
        m = len(pattern.knots)
        for k in range(m):
            if pattern.clamped[k]:
                x = (pattern.knots[k] - origin) % TWO_PI
                rows.append([g(x, order - 1) for g in gens])
            else:
                row = np.zeros(n_raw)
                row[pattern.ramps[k - 1][1]] += 1.0
                row[pattern.ramps[k][0]] -= 1.0
                rows.append(row)
    C = np.array(rows, dtype=float)
    scale = np.maximum(np.max(np.abs(C), axis=1, keepdims=True), 1e-300)
    N = null_space(C / scale, rcond=1e-11)
    if N.shape[1] != 2 * pattern.n:
        raise PatternDimensionError(
            f"pattern dimension mismatch (got {N.shape[1]}, expected {2 * pattern.n})"
        )
    coeffs = np.tensordot(N.T, raw, axes=1)
    return SplineSpace(pattern, n_raw, C, nb, coeffs)


def space_from_ideal(phi, derived=True):
    """``build_space(pattern_from_ideal(phi))``, retrying near-threshold clamp flags."""
    pattern = pattern_from_ideal(phi, derived)
    try:
        return build_space(pattern)
    except PatternDimensionError:
        M = phi.spec.M
        flip = [abs(lv - M) <= AMBIGUOUS_TOL * (1 + M) for lv in pattern.clamp_levels]
        if not any(flip):
            raise
        alt = [c != f for c, f in zip(pattern.clamped, flip)]
        return build_space(pattern.with_clamps(alt))


def check_interlacing(pattern, nodes):
    """Each gap between consecutive generator zeros must hold exactly one node."""
    zeros = pattern.generator_zeros
    if zeros is None:
        return
    nodes = np.sort(np.mod(np.asarray(nodes, dtype=float), TWO_PI))
    z = np.sort(np.asarray(zeros))
    if len(z) != len(nodes):
        raise InterlacingError("nodes do not interlace the generator zeros")
    d = np.abs(((nodes[:, None] - z[None, :]) + np.pi) % TWO_PI - np.pi)
    if np.min(d) <= 1e-10:
        raise InterlacingError("node coincides with a generator zero")
    # between two consecutive zeros (cyclically) exactly one node
    counts = np.bincount(np.searchsorted(z, nodes) % len(z), minlength=len(z))
    if np.any(counts != 1):
        raise InterlacingError("nodes do not interlace the generator zeros")


def _check_nodes(nodes, dim):
    nodes = np.asarray(nodes, dtype=float).ravel()
    if len(nodes) != dim:
        raise ValueError(f"need exactly {dim} nodes")
    w = np.sort(np.mod(nodes, TWO_PI))
    gaps = np.diff(np.concatenate([w, [w[0] + TWO_PI]]))
    if np.any(gaps <= 1e-12):
        raise ValueError("duplicate nodes")
    return nodes


@dataclass(frozen=True, eq=False)
class Collocation:
    """Factored collocation system of a space at fixed nodes."""

    space: SplineSpace
    nodes: np.ndarray
    matrix: np.ndarray
    lu: tuple
    condition: float

    def coefficients(self, values):
        v = np.asarray(values, dtype=float).ravel()
        if len(v) != len(self.nodes):
            raise ValueError(f"need exactly {len(self.nodes)} values")
        return lu_solve(self.lu, v)

    def solve(self, values):
        return self.space.element(self.coefficients(values))

    def weights(self, tau):
        """``w`` with ``s(tau) = w @ values`` for every data vector."""
        b = self.space.collocation_matrix(np.atleast_1d(tau))
        return lu_solve(self.lu, b.T, trans=1).T.squeeze(0) if np.ndim(tau) == 0 else lu_solve(self.lu, b.T, trans=1).T


def factor(space, nodes, check=True):
    nodes = _check_nodes(nodes, space.dim)
    if check:
        check_interlacing(space.pattern, nodes)
    A = space.collocation_matrix(nodes)
    cond = float(np.linalg.cond(A))
    if not np.isfinite(cond) or cond > SINGULAR_COND:
        raise SingularSystemError("interpolation system singular")
    return Collocation(space, nodes, A, lu_factor(A), cond)


def interpolate(space, nodes, values, check=True):
    """The unique element of ``space`` taking ``values`` at ``nodes``."""
    return factor(space, nodes, check).solve(values)


def method_weights(space, nodes, tau, check=True):
    """Weights of the linear method ``v -> s(v; tau)``."""
    return factor(space, nodes, check).weights(tau)
