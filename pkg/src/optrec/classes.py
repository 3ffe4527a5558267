"""The three function classes, membership seminorms and random members."""

from __future__ import annotations

import json
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .piecewise import TWO_PI, PiecewisePolynomial

SAMPLER_MARGIN = 0.95
GRID_POINTS = 4096


class Variant(str, Enum):
    RM1 = "Rm1"      # |x^(r)| <= 1, |x^(r-1)| <= M
    RM2 = "Rm2"      # |x^(r)| <= 1, |x^(r-2)| <= M
    RM1M2 = "Rm1m2"  # |x^(r)| <= 1, |x^(r-1)| <= N, |x^(r-2)| <= M

    @classmethod
    def parse(cls, text):
        if isinstance(text, cls):
            return text
        key = str(text).strip().lower()
        for v in cls:
            if v.value.lower() == key:
                return v
        raise ValueError(f"unknown class variant {text!r} (expected rm1, rm2 or rm1m2)")


class NonPeriodicError(ValueError):
    pass


@dataclass(frozen=True)
class ClassSpec:
    """A class X: variant, order ``r`` and the bounds ``M`` (and ``N``); top bound is 1."""

    variant: Variant
    r: int
    M: float
    N: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "variant", Variant.parse(self.variant))
        object.__setattr__(self, "r", int(self.r))
        object.__setattr__(self, "M", float(self.M))
        min_r = 2 if self.variant is Variant.RM1 else 3
        if self.r < min_r:
            raise ValueError(f"{self.variant.value} requires r >= {min_r}")
        if not self.M > 0:
            raise ValueError("M must be positive")
        if self.variant is Variant.RM1M2:
            if self.N is None or not float(self.N) > 0:
                raise ValueError("Rm1m2 requires a positive N")
            object.__setattr__(self, "N", float(self.N))
        elif self.N is not None:
            raise ValueError(f"N is only meaningful for Rm1m2, not {self.variant.value}")

    @property
    def clamp_order(self):
        """Derivative order held at +-M on the flat pieces of an ideal spline."""
        return self.r - 1 if self.variant is Variant.RM1 else self.r - 2

    def bounds(self):
        """``{derivative order: bound}`` for every constrained derivative."""
        out = {self.r: 1.0, self.clamp_order: self.M}
        if self.variant is Variant.RM1M2:
            out[self.r - 1] = self.N
        return dict(sorted(out.items()))

    def to_dict(self):
        d = {"variant": self.variant.value, "r": self.r, "M": self.M}
        if self.N is not None:
            d["N"] = self.N
        return d

    def to_json(self):
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, data):
        return cls(data["variant"], data["r"], data["M"], data.get("N"))

    @classmethod
    def from_json(cls, text):
        return cls.from_dict(json.loads(text))

    def __str__(self):
        extra = f", N={self.N:g}" if self.N is not None else ""
        return f"{self.variant.value}(r={self.r}, M={self.M:g}{extra})"


@dataclass(frozen=True)
class DerivedSpec:
    """Pattern descriptor for X' = {x' : x in X}: same variant, order lowered by one.

    ``clamp_order`` indexes derivatives of the derived function;
    ``source_clamp_order`` is the matching index for members of X.
    """

    variant: Variant
    order: int
    M: float
    N: float | None
    clamp_order: int
    source_clamp_order: int


def derived_pattern_spec(spec):
    return DerivedSpec(
        variant=spec.variant,
        order=spec.r - 1,
        M=spec.M,
        N=spec.N,
        clamp_order=spec.clamp_order - 1,
        source_clamp_order=spec.clamp_order,
    )


@dataclass(frozen=True)
class ClassMember:
    body: PiecewisePolynomial
    spec: ClassSpec
    margin: float


def _check_periodic(x, spec, tol=1e-9):
    for d in range(spec.r):
        if isinstance(x, PiecewisePolynomial):
            gap = abs(x(0.0, d) - x.left_limit(0.0, d))
            scale = 1.0 + abs(x(0.0, d))
        else:
            a, b = float(x(0.0, d)), float(x(TWO_PI, d))
            gap, scale = abs(a - b), 1.0 + abs(a)
        if gap > tol * scale:
            raise NonPeriodicError("non-periodic input")


def _grid_sup(x, d):
    def on(n):
        t = np.linspace(0.0, TWO_PI, n, endpoint=False)
        return float(np.max(np.abs(np.asarray(x(t, d), dtype=float))))

    coarse, fine = on(GRID_POINTS), on(2 * GRID_POINTS)
    # grid maxima converge like h^2 near smooth extrema
    return max(fine, fine + (fine - coarse) / 3.0)


def seminorm(x, spec):
    """``max_k ||x^(k)||_inf / bound_k``; membership in X iff the result is <= 1.

    ``x`` is a PiecewisePolynomial (exact norms) or a callable ``x(t, d)``
    returning the ``d``-th derivative on arrays (dense-grid estimate).
    """
    _check_periodic(x, spec)
    ratios = []
    for order, bound in spec.bounds().items():
        if isinstance(x, PiecewisePolynomial):
            norm = x.sup_norm(order)[0]
        else:
            norm = _grid_sup(x, order)
        ratios.append(norm / bound)
    return max(ratios)


def is_member(x, spec, tol=1e-9):
    return seminorm(x, spec) <= 1.0 + tol


def member_from_top_derivative(breaks, values, spec, offset=0.0):
    """Integrate a piecewise-constant ``r``-th derivative up to a periodic function.

    The top derivative is centred first; intermediate levels have their means
    removed; ``offset`` becomes the mean of the result. Not rescaled.
    """
    b = np.concatenate([[0.0], np.sort(np.mod(breaks, TWO_PI)), [TWO_PI]])
    vals = np.asarray(values, dtype=float)
    # breaks split the period into len(breaks)+1 pieces; the first and last share a value
    vals = np.concatenate([vals, vals[:1]]) if len(vals) == len(b) - 2 else vals
    f = PiecewisePolynomial.step(b, vals).subtract_mean()
    for _ in range(spec.r):
        f = f.antiderivative(0.0).subtract_mean()
    return f + float(offset)


def sample_member(spec, seed, roughness=3):
    """Random member of X with seminorm exactly ``SAMPLER_MARGIN``.

    ``roughness`` is the number of sign-change pairs of the candidate
    ``r``-th derivative (``2 * roughness`` random break points).
    """
    if roughness < 1:
        raise ValueError("roughness must be >= 1")
    rng = np.random.default_rng(seed)
    breaks = np.sort(rng.uniform(0.0, TWO_PI, 2 * roughness))
    signs = np.where(np.arange(2 * roughness) % 2 == 0, 1.0, -1.0)
    values = signs * rng.uniform(0.2, 1.0, 2 * roughness)
    body = member_from_top_derivative(breaks, values, spec, offset=rng.normal())
    rho = seminorm(body, spec)
    if rho == 0.0:
        return ClassMember(body, spec, 1.0)
    body = body * (SAMPLER_MARGIN / rho)
    return ClassMember(body, spec, 1.0 - SAMPLER_MARGIN)
