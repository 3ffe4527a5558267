"""Exact calculus for 2*pi-periodic piecewise polynomials.

Every piece is stored in a shifted local power basis: on
``[b[i], b[i+1]]`` the function equals ``sum_j c[i, j] * (t - b[i])**j``.
Pieces shorter than ``COALESCE_TOL`` are merged away on construction.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from math import comb, factorial

import numpy as np
from scipy.optimize import brentq

TWO_PI = 2.0 * math.pi
COALESCE_TOL = 1e-12
JOIN_TOL = 1e-9

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(20)


# ---------------------------------------------------------------------------
# single-polynomial helpers (ascending local coefficients)
# ---------------------------------------------------------------------------

def taylor_shift(coeffs, h):
    """Return coefficients of ``x -> p(x + h)``.

    ``coeffs`` has shape ``(..., k)``; ``h`` broadcasts against ``coeffs[..., 0]``.
    """
    c = np.asarray(coeffs, dtype=float)
    h = np.asarray(h, dtype=float)[..., None]
    k = c.shape[-1]
    out = np.zeros(np.broadcast_shapes(c.shape, h.shape))
    for m in range(k):
        acc = 0.0
        for j in range(m, k):
            acc = acc + c[..., j] * comb(j, m) * h[..., 0] ** (j - m)
        out[..., m] = acc
    return out


def poly_derivative(coeffs, d=1):
    c = np.asarray(coeffs, dtype=float)
    k = c.shape[-1]
    if d == 0:
        return c.copy()
    if d >= k:
        return np.zeros(c.shape[:-1] + (1,))
    fac = np.array([factorial(j) / factorial(j - d) for j in range(d, k)])
    return c[..., d:] * fac


def poly_eval(coeffs, x):
    """Horner evaluation; ``coeffs`` (..., k) against ``x`` broadcastable to (...)."""
    c = np.asarray(coeffs, dtype=float)
    x = np.asarray(x, dtype=float)
    acc = np.zeros(np.broadcast_shapes(c.shape[:-1], x.shape))
    for j in range(c.shape[-1] - 1, -1, -1):
        acc = acc * x + c[..., j]
    return acc


def _effective_degree(c, h):
    """Degree after dropping trailing terms negligible on ``[0, h]``."""
    scale_terms = np.abs(c) * np.maximum(h, 1e-300) ** np.arange(len(c))
    top = scale_terms.max() if len(c) else 0.0
    if top == 0.0:
        return -1
    deg = len(c) - 1
    while deg > 0 and scale_terms[deg] <= 1e-15 * top:
        deg -= 1
    return deg


def poly_real_roots(coeffs, lo, hi):
    """Real roots of a local polynomial inside ``[lo, hi]``.

    Closed form up to degree 2; higher degrees are bracketed between the
    (recursively found) critical points and polished by Brent's method.
    Identically-zero polynomials report no isolated roots.
    """
    c = np.asarray(coeffs, dtype=float)
    deg = _effective_degree(c, max(abs(lo), abs(hi)))
    if deg <= 0:
        return []
    c = c[: deg + 1]
    if deg == 1:
        x = -c[0] / c[1]
        return [x] if lo <= x <= hi else []
    if deg == 2:
        a, b, cc = c[2], c[1], c[0]
        disc = b * b - 4 * a * cc
        if disc < 0:
            if disc > -1e-14 * (b * b + abs(4 * a * cc)):
                disc = 0.0
            else:
                return []
        sq = math.sqrt(disc)
        q = -0.5 * (b + math.copysign(sq, b)) if b != 0 else -0.5 * sq
        roots = []
        if q != 0:
            roots.append(cc / q)
        roots.append(q / a if q != 0 else 0.0)
        return sorted({x for x in roots if lo <= x <= hi})
    crit = poly_real_roots(poly_derivative(c), lo, hi)
    pts = [lo] + [x for x in crit if lo < x < hi] + [hi]
    vals = [float(poly_eval(c, x)) for x in pts]
    roots = []
    for (x0, v0), (x1, v1) in zip(zip(pts, vals), zip(pts[1:], vals[1:])):
        if v0 == 0.0:
            roots.append(x0)
        elif v0 * v1 < 0:
            roots.append(brentq(lambda x: float(poly_eval(c, x)), x0, x1, xtol=1e-15, rtol=1e-15))
    if vals[-1] == 0.0:
        roots.append(pts[-1])
    return sorted(set(roots))


# ---------------------------------------------------------------------------
# the periodic piecewise polynomial
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class PiecewisePolynomial:
    """Periodic piecewise polynomial on ``[0, 2*pi)``.

    Parameters
    ----------
    breakpoints : array_like
        Strictly increasing, first 0 and last ``2*pi``.
    coeffs : array_like
        Shape ``(pieces, degree + 1)``, local ascending coefficients.
    continuity : int
        Highest derivative declared continuous (wraparound included);
        -1 means no claim.
    """

    breakpoints: np.ndarray
    coeffs: np.ndarray
    continuity: int = -1

    def __post_init__(self):
        b = np.array(self.breakpoints, dtype=float).ravel()
        c = np.array(self.coeffs, dtype=float)
        if c.ndim == 1:
            c = c[None, :]
        if len(b) != len(c) + 1 or len(c) == 0:
            raise ValueError("need len(breakpoints) == pieces + 1 >= 2")
        if abs(b[0]) > COALESCE_TOL or abs(b[-1] - TWO_PI) > 1e-9:
            raise ValueError("breakpoints must start at 0 and end at 2*pi")
        b[0], b[-1] = 0.0, TWO_PI
        b, c = _coalesce(b, c)
        b.flags.writeable = False
        c.flags.writeable = False
        object.__setattr__(self, "breakpoints", b)
        object.__setattr__(self, "coeffs", c)

    # -- constructors -------------------------------------------------------

    @classmethod
    def constant(cls, value=0.0):
        return cls([0.0, TWO_PI], [[float(value)]], continuity=10**6)

    @classmethod
    def zero(cls):
        return cls.constant(0.0)

    @classmethod
    def step(cls, breakpoints, values):
        """Piecewise constant with ``values[i]`` on ``[breakpoints[i], breakpoints[i+1])``."""
        return cls(breakpoints, np.asarray(values, dtype=float)[:, None])

    @classmethod
    def from_dict(cls, data):
        pieces = [list(map(float, p)) for p in data["pieces"]]
        width = max(len(p) for p in pieces)
        c = np.array([p + [0.0] * (width - len(p)) for p in pieces])
        return cls(data["breakpoints"], c, int(data.get("continuity", -1)))

    @classmethod
    def from_json(cls, text):
        return cls.from_dict(json.loads(text))

    # -- basic properties ---------------------------------------------------

    @property
    def degree(self):
        return self.coeffs.shape[1] - 1

    @property
    def n_pieces(self):
        return len(self.coeffs)

    @property
    def lengths(self):
        return np.diff(self.breakpoints)

    def piece_index(self, t):
        """Index of the piece that owns ``t`` under the right-limit convention."""
        t = np.mod(np.asarray(t, dtype=float), TWO_PI)
        idx = np.searchsorted(self.breakpoints, t, side="right") - 1
        return np.clip(idx, 0, self.n_pieces - 1), t

    # -- evaluation ---------------------------------------------------------

    def __call__(self, t, d=0):
        scalar = np.ndim(t) == 0
        idx, tt = self.piece_index(t)
        c = poly_derivative(self.coeffs, d)
        vals = poly_eval(c[idx], tt - self.breakpoints[idx])
        return float(vals) if scalar else vals

    def left_limit(self, t, d=0):
        """Value approached from the left (``t = 0`` means ``2*pi``-)."""
        scalar = np.ndim(t) == 0
        tt = np.mod(np.asarray(t, dtype=float), TWO_PI)
        tt = np.where(tt == 0.0, TWO_PI, tt)
        idx = np.clip(np.searchsorted(self.breakpoints, tt, side="left") - 1, 0, self.n_pieces - 1)
        c = poly_derivative(self.coeffs, d)
        vals = poly_eval(c[idx], tt - self.breakpoints[idx])
        return float(vals) if scalar else vals

    def jumps(self, d=0):
        """Jumps of the ``d``-th derivative at every breakpoint (0 is the wraparound)."""
        b = self.breakpoints[:-1]
        return self(b, d) - self.left_limit(b, d)

    def max_jump(self, d=0):
        return float(np.max(np.abs(self.jumps(d))))

    def check_continuity(self, c, tol=JOIN_TOL):
        """True when derivatives ``0..c`` agree across all joins to ``tol``."""
        return all(self.max_jump(d) <= tol for d in range(c + 1))

    # -- calculus -----------------------------------------------------------

    def derivative(self, d=1):
        if d == 0:
            return self
        return PiecewisePolynomial(
            self.breakpoints, poly_derivative(self.coeffs, d), max(self.continuity - d, -1)
        )

    def piece_integrals(self):
        k = self.coeffs.shape[1]
        h = self.lengths[:, None]
        powers = h ** np.arange(1, k + 1) / np.arange(1, k + 1)
        return np.sum(self.coeffs * powers, axis=1)

    def integral(self):
        return float(np.sum(self.piece_integrals()))

    def mean(self):
        return self.integral() / TWO_PI

    def antiderivative(self, base=0.0):
        """Antiderivative vanishing at ``base`` (not periodic unless the mean is 0)."""
        k = self.coeffs.shape[1]
        new = np.zeros((self.n_pieces, k + 1))
        new[:, 1:] = self.coeffs / np.arange(1, k + 1)
        offsets = np.concatenate([[0.0], np.cumsum(self.piece_integrals())[:-1]])
        new[:, 0] = offsets
        F = PiecewisePolynomial(self.breakpoints, new, self.continuity + 1)
        shift = F(base) if base % TWO_PI != 0.0 else 0.0
        if shift != 0.0:
            new = new.copy()
            new[:, 0] -= shift
            F = PiecewisePolynomial(self.breakpoints, new, self.continuity + 1)
        return F

    def subtract_mean(self):
        c = self.coeffs.copy()
        c[:, 0] -= self.mean()
        return PiecewisePolynomial(self.breakpoints, c, self.continuity)

    # -- norms --------------------------------------------------------------

    def sup_norm(self, d=0):
        """``(max |f^(d)|, argmax)`` from breakpoints and per-piece critical points."""
        q = self.derivative(d)
        dq = poly_derivative(q.coeffs, 1)
        best_val, best_t = -1.0, 0.0
        for i, h in enumerate(q.lengths):
            cand = [0.0, h]
            if q.coeffs.shape[1] > 2:
                cand.extend(poly_real_roots(dq[i], 0.0, h))
            vals = np.abs(poly_eval(q.coeffs[i], np.array(cand)))
            j = int(np.argmax(vals))
            if vals[j] > best_val * (1 + 1e-12) + 1e-300:
                best_val, best_t = float(vals[j]), float(q.breakpoints[i] + cand[j])
        return best_val, best_t % TWO_PI

    def _sign_split(self):
        """Yield ``(piece, x0, x1)`` sub-intervals on which the sign is constant."""
        for i, h in enumerate(self.lengths):
            cuts = [x for x in poly_real_roots(self.coeffs[i], 0.0, h) if 0.0 < x < h]
            pts = [0.0] + cuts + [h]
            for x0, x1 in zip(pts, pts[1:]):
                yield i, x0, x1

    def lp_norm(self, p):
        """``L_p`` norm over one period (``p = inf`` gives the sup norm)."""
        if p == math.inf:
            return self.sup_norm()[0]
        if p < 1:
            raise ValueError("p must be >= 1")
        if p == 1:
            total = 0.0
            k = self.coeffs.shape[1]
            for i, x0, x1 in self._sign_split():
                anti = np.concatenate([[0.0], self.coeffs[i] / np.arange(1, k + 1)])
                total += abs(float(poly_eval(anti, x1) - poly_eval(anti, x0)))
            return total
        total = 0.0
        for i, x0, x1 in self._sign_split():
            total += _gl_power_integral(self.coeffs[i], x0, x1, p)
        return total ** (1.0 / p)

    # -- root finding -------------------------------------------------------

    def roots(self, d=0):
        """All isolated zeros of ``f^(d)`` on ``[0, 2*pi)``, sorted."""
        q = self.derivative(d)
        out = []
        for i, h in enumerate(q.lengths):
            out.extend(q.breakpoints[i] + x for x in poly_real_roots(q.coeffs[i], 0.0, h))
        # a root sitting on a breakpoint can slip between two pieces under rounding
        right = q.coeffs[:, 0]
        left = np.roll([poly_eval(c, h) for c, h in zip(q.coeffs, q.lengths)], 1)
        tiny = 1e-14 * max(1.0, float(np.max(np.abs(q.coeffs))))
        for b, lv, rv in zip(q.breakpoints[:-1], left, right):
            if abs(lv - rv) <= JOIN_TOL * (1 + abs(lv)) and (lv * rv < 0 or min(abs(lv), abs(rv)) <= tiny):
                out.append(b)
        out = np.sort(np.mod(out, TWO_PI))
        if len(out) == 0:
            return out
        keep = [out[0]]
        for x in out[1:]:
            if x - keep[-1] > 1e-11:
                keep.append(x)
        if len(keep) > 1 and keep[0] + TWO_PI - keep[-1] <= 1e-11:
            keep.pop()
        return np.array(keep)

    # -- structural operations ----------------------------------------------

    def refine(self, points):
        """Same function with extra breakpoints at ``points`` (mod 2*pi)."""
        pts = np.mod(np.asarray(points, dtype=float).ravel(), TWO_PI)
        nb = merge_points(np.concatenate([self.breakpoints, pts]))
        mids = 0.5 * (nb[:-1] + nb[1:])
        src = np.clip(np.searchsorted(self.breakpoints, mids, side="right") - 1, 0, self.n_pieces - 1)
        c = taylor_shift(self.coeffs[src], nb[:-1] - self.breakpoints[src])
        return PiecewisePolynomial(nb, c, self.continuity)

    def rotate(self, shift):
        """Return ``g`` with ``g(t) = f(t - shift)``."""
        s = float(shift) % TWO_PI
        if s < COALESCE_TOL or TWO_PI - s < COALESCE_TOL:
            return self
        cut = TWO_PI - s
        f = self.refine([cut])
        i = int(np.argmin(np.abs(f.breakpoints - cut)))
        nb = np.concatenate([f.breakpoints[i:] - cut, f.breakpoints[1 : i + 1] + s])
        nc = np.concatenate([f.coeffs[i:], f.coeffs[:i]])
        return PiecewisePolynomial(nb, nc, self.continuity)

    def _aligned(self, other):
        nb = merge_points(np.concatenate([self.breakpoints, other.breakpoints]))
        a, b = self.refine(nb), other.refine(nb)
        k = max(a.coeffs.shape[1], b.coeffs.shape[1])
        return a.breakpoints, _pad(a.coeffs, k), _pad(b.coeffs, k)

    def __add__(self, other):
        if np.isscalar(other):
            c = self.coeffs.copy()
            c[:, 0] += other
            return PiecewisePolynomial(self.breakpoints, c, self.continuity)
        nb, ca, cb = self._aligned(other)
        return PiecewisePolynomial(nb, ca + cb, min(self.continuity, other.continuity))

    __radd__ = __add__

    def __neg__(self):
        return PiecewisePolynomial(self.breakpoints, -self.coeffs, self.continuity)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, scalar):
        if not np.isscalar(scalar):
            return NotImplemented
        return PiecewisePolynomial(self.breakpoints, self.coeffs * float(scalar), self.continuity)

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        return self * (1.0 / scalar)

    # -- serialization ------------------------------------------------------

    def to_dict(self):
        return {
            "breakpoints": self.breakpoints.tolist(),
            "pieces": self.coeffs.tolist(),
            "continuity": int(min(self.continuity, 10**6)),
        }

    def to_json(self, **kw):
        return json.dumps(self.to_dict(), **kw)

    def sample(self, n=1000, derivatives=0):
        t = np.linspace(0.0, TWO_PI, n, endpoint=False)
        return t, np.column_stack([self(t, d) for d in range(derivatives + 1)])

    def to_csv(self, stream, n=1000, derivatives=0, name="value"):
        """Write ``t,value[,value_d1...]`` rows sampled on a uniform grid."""
        t, vals = self.sample(n, derivatives)
        w = csv.writer(stream)
        w.writerow(["t", name] + [f"{name}_d{d}" for d in range(1, derivatives + 1)])
        for ti, row in zip(t, vals):
            w.writerow([repr(float(ti))] + [repr(float(v)) for v in row])


# ---------------------------------------------------------------------------
# module-level operations
# ---------------------------------------------------------------------------

def evaluate(pp, t, d=0):
    return pp(t, d)


def antiderivative(pp, base=0.0):
    return pp.antiderivative(base)


def subtract_mean(pp):
    return pp.subtract_mean()


def sup_norm(pp, d=0):
    return pp.sup_norm(d)


def lp_norm(pp, p):
    return pp.lp_norm(p)


def merge_points(points, tol=COALESCE_TOL):
    """Sorted unique points, merging neighbours closer than ``tol``."""
    pts = np.sort(np.asarray(points, dtype=float))
    keep = [pts[0]]
    for x in pts[1:]:
        if x - keep[-1] > tol:
            keep.append(x)
        elif x == TWO_PI:
            keep[-1] = x
    return np.array(keep)


def _pad(c, k):
    if c.shape[1] == k:
        return c
    return np.hstack([c, np.zeros((c.shape[0], k - c.shape[1]))])


def _coalesce(b, c):
    lengths = np.diff(b)
    if np.any(lengths < -COALESCE_TOL):
        raise ValueError("breakpoints must increase")
    if np.all(lengths >= COALESCE_TOL):
        return b, c
    keep_b, keep_c = [b[0]], []
    pending = 0.0  # length of dropped leading pieces
    for i, h in enumerate(lengths):
        if h < COALESCE_TOL:
            if keep_c:
                keep_b[-1] = b[i + 1]  # previous piece absorbs it
                continue
            pending += h
            continue
        if not keep_c and pending > 0.0:
            keep_c.append(taylor_shift(c[i], -pending))
        else:
            keep_c.append(c[i])
        keep_b.append(b[i + 1])
    if not keep_c:
        return np.array([0.0, TWO_PI]), c[:1]
    keep_b[-1] = TWO_PI
    return np.array(keep_b), np.array(keep_c)


def _gl_power_integral(coeffs, x0, x1, p, rtol=1e-12, max_level=14):
    def rule(parts):
        edges = np.linspace(x0, x1, parts + 1)
        half = 0.5 * np.diff(edges)[:, None]
        mid = 0.5 * (edges[:-1] + edges[1:])[:, None]
        x = mid + half * _GL_NODES[None, :]
        return float(np.sum(half * _GL_WEIGHTS * np.abs(poly_eval(coeffs, x)) ** p))

    prev = rule(1)
    for level in range(1, max_level):
        cur = rule(2**level)
        if abs(cur - prev) <= rtol * max(abs(cur), 1e-300):
            return cur
        prev = cur
    return prev
