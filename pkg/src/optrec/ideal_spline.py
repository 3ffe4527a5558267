"""Ideal (perfect) splines with prescribed zeros.

The spline is assembled from a point ``xi`` of the l1-sphere of radius
``2*pi``: the segment lengths ``|xi_k|`` and signs ``sgn xi_k`` fix a
piecewise-linear ``(r-1)``-st derivative (a clipped tent wave for Rm1,
chained saturated bumps for Rm2/Rm1m2), which is integrated up with mean
removal.  The odd map ``eta(xi)`` collects the periodicity defect and the
values at ``u_2..u_2n``; its zero gives the spline.

The partition always starts at a zero of the ``(r-1)``-st derivative, so a
free rotation ``shift`` of that starting point is carried alongside ``xi``
(``shift = 0`` is the unrotated map).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .classes import ClassSpec, Variant
from .piecewise import TWO_PI, PiecewisePolynomial

ZERO_TOL = 1e-8
BOUND_TOL = 1e-9
MAX_RESTARTS = 64


class SolverError(RuntimeError):
    """Raised when no zero of ``eta`` is found; carries the best residual."""

    def __init__(self, message, best_residual=math.inf):
        super().__init__(message)
        self.best_residual = best_residual


class LevelBracketError(RuntimeError):
    pass


# ---------------------------------------------------------------------------
# sphere points
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class SphereVector:
    """Point of ``{xi : sum |xi_i| = 2*pi}``; induces ``t_k = sum_{i<=k} |xi_i|``."""

    xi: np.ndarray

    def __post_init__(self):
        xi = np.array(self.xi, dtype=float).ravel()
        if len(xi) < 2 or len(xi) % 2:
            raise ValueError("sphere vector needs an even number (>= 2) of coordinates")
        if abs(np.sum(np.abs(xi)) - TWO_PI) > 1e-12 * TWO_PI:
            raise ValueError("sphere vector must satisfy sum |xi_i| = 2*pi")
        xi.flags.writeable = False
        object.__setattr__(self, "xi", xi)

    @classmethod
    def project(cls, v):
        v = np.asarray(v, dtype=float)
        return cls(v * (TWO_PI / np.sum(np.abs(v))))

    def __neg__(self):
        return SphereVector(-self.xi)

    @property
    def partition(self):
        t = np.concatenate([[0.0], np.cumsum(np.abs(self.xi))])
        t[-1] = TWO_PI
        return t


def _as_sphere(xi):
    return xi if isinstance(xi, SphereVector) else SphereVector(xi)


# ---------------------------------------------------------------------------
# Rm1: clipped tent wave
# ---------------------------------------------------------------------------

def phi1_rm1(xi, M):
    """``phi_1``: on each segment ``sgn xi_k * min(distance to nearest end, M)``."""
    xi = _as_sphere(xi)
    t = xi.partition
    breaks, coeffs = [0.0], []
    for k, x in enumerate(xi.xi):
        s, a, b = float(np.sign(x)), t[k], t[k + 1]
        m = min(0.5 * (b - a), M)
        breaks.append(a + m)
        coeffs.append([0.0, s])
        if 0.5 * (b - a) > M:
            breaks.append(b - M)
            coeffs.append([s * M, 0.0])
        breaks.append(b)
        coeffs.append([s * m, -s])
    breaks[-1] = TWO_PI
    return PiecewisePolynomial(breaks, coeffs, continuity=0)


# ---------------------------------------------------------------------------
# Rm2 / Rm1m2: saturated bumps
# ---------------------------------------------------------------------------

def bump_area(b, N=None):
    """Integral of the (optionally N-clipped) unit-slope tent of half-width ``b``."""
    if N is None or b <= N:
        return b * b
    return 2.0 * b * N - N * N


def saturation(length, sign, level, M, N=None):
    """Largest half-width ``B <= length/2`` keeping ``level + sign*area(B)`` in ``[-M, M]``.

    The running value is monotone along a bump, so only the end value matters.
    """
    if sign == 0 or length <= 0:
        return 0.0
    room = max(M - sign * level, 0.0)
    if N is None or room <= N * N:
        b_max = math.sqrt(room)
    else:
        b_max = 0.5 * (room + N * N) / N
    return min(0.5 * length, b_max)


@dataclass(frozen=True)
class Bump:
    """One saturated bump on ``[start, start + length]`` starting at ``level``."""

    start: float
    length: float
    sign: float
    level: float
    B: float
    N: float | None = None

    @property
    def clipped(self):
        return self.N is not None and self.B > self.N

    @property
    def end_level(self):
        return self.level + self.sign * bump_area(self.B, self.N)

    @property
    def integral(self):
        # tent (or trapezoid) is symmetric about B: int (L - y) f(y) dy = area * (L - B)
        return self.level * self.length + self.sign * bump_area(self.B, self.N) * (self.length - self.B)

    def slope_pieces(self):
        """``(breaks, coeffs)`` of the first derivative on this bump, local bases."""
        a, s, B, L = self.start, self.sign, self.B, self.length
        if self.clipped:
            N = self.N
            br = [a, a + N, a + 2 * B - N, a + 2 * B, a + L]
            co = [[0.0, s], [s * N, 0.0], [s * N, -s], [0.0, 0.0]]
        else:
            br = [a, a + B, a + 2 * B, a + L]
            co = [[0.0, s], [s * B, -s], [0.0, 0.0]]
        return br, co

    def __call__(self, t):
        """Level value at ``t`` (clamped to the bump's interval)."""
        x = min(max(t - self.start, 0.0), self.length)
        s, B = self.sign, self.B
        if self.clipped:
            N = self.N
            if x <= N:
                v = 0.5 * x * x
            elif x <= 2 * B - N:
                v = 0.5 * N * N + N * (x - N)
            elif x <= 2 * B:
                y = 2 * B - x
                v = bump_area(B, N) - 0.5 * y * y
            else:
                v = bump_area(B, N)
        else:
            if x <= B:
                v = 0.5 * x * x
            elif x <= 2 * B:
                y = 2 * B - x
                v = B * B - 0.5 * y * y
            else:
                v = B * B
        return self.level + s * v


def bump(alpha, beta, a, spec):
    """Saturated bump on ``[alpha, alpha + |beta|]`` starting at level ``a``."""
    if abs(a) > spec.M * (1 + 1e-12):
        raise ValueError("level out of range")
    s = float(np.sign(beta))
    L = abs(float(beta))
    N = spec.N if spec.variant is Variant.RM1M2 else None
    return Bump(float(alpha), L, s, float(a), saturation(L, s, a, spec.M, N), N)


@dataclass(frozen=True)
class LevelProfile:
    """The level function ``psi(xi, a; .)`` as a flat lead-in plus a chain of bumps."""

    a: float
    start_level: float
    lead: float
    bumps: tuple

    @property
    def integral(self):
        return self.lead * self.start_level + sum(b.integral for b in self.bumps)

    @property
    def end_level(self):
        return self.bumps[-1].end_level if self.bumps else self.start_level

    def slope(self):
        """``psi'`` as a periodic piecewise polynomial (the ``(r-1)``-st derivative)."""
        breaks, coeffs = [0.0], []
        if self.lead > 0:
            breaks.append(self.lead)
            coeffs.append([0.0, 0.0])
        for b in self.bumps:
            br, co = b.slope_pieces()
            breaks.extend(br[1:])
            coeffs.extend(co)
        breaks[-1] = TWO_PI
        return PiecewisePolynomial(breaks, coeffs, continuity=0)


def level_profile(xi, a, M, N=None):
    """Chain the bumps of ``xi`` from level ``a`` (extended to ``|a| <= M + pi``)."""
    xi = _as_sphere(xi).xi
    lengths, signs = np.abs(xi), np.sign(xi)
    if abs(a) <= M:
        start, lead, segs = a, 0.0, list(zip(lengths, signs))
    else:
        start = math.copysign(M, a)
        lead = abs(a) - M
        cum = np.cumsum(lengths)
        i = min(int(np.searchsorted(cum, lead, side="right")), len(xi) - 1)
        segs = [(cum[i] - lead, signs[i])] + list(zip(lengths[i + 1 :], signs[i + 1 :]))
    pos, level, bumps = lead, start, []
    for L, s in segs:
        B = saturation(L, s, level, M, N)
        b = Bump(pos, float(L), float(s), level, B, N)
        bumps.append(b)
        level = b.end_level
        pos += L
    return LevelProfile(float(a), start, lead, tuple(bumps))


def solve_level_A(xi, spec):
    """Level ``A`` in ``(-M-pi, M+pi)`` making the level function zero-mean.

    Returns ``(A, phi2)`` with ``phi2 = psi(xi, A; .)`` as a piecewise polynomial.
    """
    if spec.variant is Variant.RM1:
        raise ValueError("the level construction applies to Rm2 and Rm1m2 only")
    M, N = spec.M, spec.N if spec.variant is Variant.RM1M2 else None
    lo, hi = -M - math.pi, M + math.pi
    f_lo = level_profile(xi, lo, M, N).integral
    f_hi = level_profile(xi, hi, M, N).integral
    if not (f_lo < 0.0 < f_hi):
        raise LevelBracketError("level bracket violated")
    A = brentq(lambda a: level_profile(xi, a, M, N).integral, lo, hi, xtol=1e-15, rtol=1e-15, maxiter=500)
    prof = level_profile(xi, A, M, N)
    phi2 = prof.slope().antiderivative(0.0) + prof.start_level
    return A, phi2


# ---------------------------------------------------------------------------
# the chain phi_1 .. phi_r and the map eta
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class Chain:
    """Derivatives ``phi^(r-1), ..., phi`` in the construction frame."""

    levels: tuple
    nodes: np.ndarray  # (u - shift) mod 2*pi
    A: float | None

    @property
    def spline(self):
        return self.levels[-1]

    @property
    def top_slope(self):
        return self.levels[0]


def phi_chain(xi, u, spec, shift=0.0):
    xi = _as_sphere(xi)
    w = np.mod(np.asarray(u, dtype=float) - shift, TWO_PI)
    A = None
    if spec.variant is Variant.RM1:
        levels = [phi1_rm1(xi, spec.M)]
    else:
        A, phi2 = solve_level_A(xi, spec)
        levels = [phi2.derivative(), phi2]
    # phi_k = int phi_{k-1} - mean, for all but the last level
    while len(levels) < spec.r - 1:
        levels.append(levels[-1].antiderivative(0.0).subtract_mean())
    levels.append(levels[-1].antiderivative(w[0]))
    return Chain(tuple(levels), w, A)


def phi_chain_rm1(xi, u, spec, shift=0.0):
    if spec.variant is not Variant.RM1:
        raise ValueError("phi_chain_rm1 needs an Rm1 class")
    return phi_chain(xi, u, spec, shift).spline


def _eta_from_chain(chain):
    first = chain.top_slope.integral()
    return np.concatenate([[first], chain.spline(chain.nodes[1:])])


def eta(xi, u, spec, shift=0.0):
    """Odd map: ``(int phi^(r-1), phi(u_2), ..., phi(u_2n))``."""
    return _eta_from_chain(phi_chain(xi, u, spec, shift))


# ---------------------------------------------------------------------------
# knot structure
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class KnotStructure:
    knots: tuple
    alphas: tuple
    signs: tuple
    betas: tuple | None = None


def _cyclic_runs(breaks, labels):
    """Merge adjacent pieces with equal labels around the circle -> [(start, length, label)]."""
    runs = []
    for a, b, lab in zip(breaks[:-1], breaks[1:], labels):
        if runs and runs[-1][2] == lab:
            runs[-1][1] += b - a
        else:
            runs.append([a, b - a, lab])
    if len(runs) > 1 and runs[0][2] == runs[-1][2]:
        last = runs.pop()
        runs[0][0] = last[0]
        runs[0][1] += last[1]
    return [tuple(r) for r in runs]


def _sign_labels(values, scale):
    return [0 if abs(v) <= 1e-9 * scale else (1 if v > 0 else -1) for v in values]


def _refined_pieces(pp, lo, hi):
    """``[lo, hi]`` (possibly past 2*pi) cut at the breakpoints of ``pp``."""
    b = pp.breakpoints
    pts = [lo, hi]
    for shift in (0.0, TWO_PI, 2 * TWO_PI):
        pts.extend(x + shift for x in b if lo < x + shift < hi)
    pts = np.sort(pts)
    return [(a, c) for a, c in zip(pts[:-1], pts[1:]) if c - a > 1e-10]


def extract_structure(body, spec):
    """Knots, ramp lengths and signs read off the derivatives of ``body``."""
    r = spec.r
    top = body.derivative(r)
    if spec.variant is Variant.RM1:
        labels = _sign_labels(top.coeffs[:, 0], 1.0)
        runs = [(a, L, s) for a, L, s in _cyclic_runs(top.breakpoints, labels) if s != 0]
        knots = [(a % TWO_PI, L, s) for a, L, s in runs]
        knots.sort()
        return KnotStructure(
            tuple(k[0] for k in knots), tuple(k[1] for k in knots), tuple(float(k[2]) for k in knots)
        )
    slope = body.derivative(r - 1)
    mids = 0.5 * (slope.breakpoints[:-1] + slope.breakpoints[1:])
    scale = max(slope.sup_norm()[0], 1e-300)
    labels = _sign_labels(slope(mids), scale)
    runs = [(a % TWO_PI, L, s) for a, L, s in _cyclic_runs(slope.breakpoints, labels) if s != 0]
    runs.sort()
    betas = None
    if spec.variant is Variant.RM1M2:
        betas = []
        for a, L, s in runs:
            # length of the initial stretch where the top derivative equals the bump sign
            ramp = 0.0
            for lo, hi in _refined_pieces(top, a, a + L):
                if abs(top(0.5 * (lo + hi) % TWO_PI) - s) > 1e-9:
                    break
                ramp += hi - lo
            betas.append(min(2.0 * ramp, L))
        betas = tuple(betas)
    return KnotStructure(
        tuple(k[0] for k in runs), tuple(k[1] for k in runs), tuple(float(k[2]) for k in runs), betas
    )


def pattern_intervals(structure, variant):
    """Sub-intervals ``(a, b, kind, knot_index)`` tiling one period from ``t_1``.

    ``kind`` is 'up' (top derivative = eps), 'down' (= -eps), 'mid' (0, at
    level eps*N) or 'tail' (0, clamped level eps*M). Ends may exceed 2*pi.
    """
    t = list(structure.knots)
    m = len(t)
    out = []
    for k in range(m):
        a = t[k]
        nxt = t[(k + 1) % m] + (TWO_PI if k + 1 == m else 0.0)
        al = structure.alphas[k]
        if variant is Variant.RM1:
            cuts = [(a, a + al, "up")]
        elif variant is Variant.RM2:
            cuts = [(a, a + al / 2, "up"), (a + al / 2, a + al, "down")]
        else:
            be = structure.betas[k]
            cuts = [(a, a + be / 2, "up"), (a + be / 2, a + al - be / 2, "mid"), (a + al - be / 2, a + al, "down")]
        cuts.append((a + al, nxt, "tail"))
        out.extend((lo, hi, kind, k) for lo, hi, kind in cuts)
    return out


# ---------------------------------------------------------------------------
# the validated spline
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class IdealSpline:
    body: PiecewisePolynomial
    spec: ClassSpec
    zeros: np.ndarray
    knots: tuple
    alphas: tuple
    signs: tuple
    betas: tuple | None = None
    residual: float = 0.0
    xi: np.ndarray | None = None
    shift: float = 0.0
    level_A: float | None = None
    trace_length: int = 0

    @classmethod
    def from_body(cls, body, spec, zeros, **meta):
        zeros = np.sort(np.mod(np.asarray(zeros, dtype=float), TWO_PI))
        st = extract_structure(body, spec)
        residual = meta.pop("residual", None)
        if residual is None:
            residual = float(np.max(np.abs(body(zeros))))
        return cls(body, spec, zeros, st.knots, st.alphas, st.signs, st.betas, residual, **meta)

    @property
    def n(self):
        return len(self.zeros) // 2

    @property
    def structure(self):
        return KnotStructure(self.knots, self.alphas, self.signs, self.betas)

    def __call__(self, t, d=0):
        return self.body(t, d)

    def to_dict(self):
        return {
            "spec": self.spec.to_dict(),
            "zeros": self.zeros.tolist(),
            "body": self.body.to_dict(),
            "knots": list(self.knots),
            "alphas": list(self.alphas),
            "betas": None if self.betas is None else list(self.betas),
            "signs": list(self.signs),
            "residual": self.residual,
            "xi": None if self.xi is None else np.asarray(self.xi).tolist(),
            "shift": self.shift,
            "level_A": self.level_A,
            "trace_length": self.trace_length,
        }

    @classmethod
    def from_dict(cls, data):
        spec = ClassSpec.from_dict(data["spec"])
        return cls(
            PiecewisePolynomial.from_dict(data["body"]),
            spec,
            np.asarray(data["zeros"], dtype=float),
            tuple(data["knots"]),
            tuple(data["alphas"]),
            tuple(float(s) for s in data["signs"]),
            None if data.get("betas") is None else tuple(data["betas"]),
            float(data.get("residual", 0.0)),
            None if data.get("xi") is None else np.asarray(data["xi"]),
            float(data.get("shift", 0.0)),
            data.get("level_A"),
            int(data.get("trace_length", 0)),
        )


# ---------------------------------------------------------------------------
# solver
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SolverOptions:
    tol: float | None = None  # default 1e-10 * (1 + M)
    max_iter: int = 80
    max_restarts: int = MAX_RESTARTS
    seed: int = 0
    fd_step: float = 1e-7


def validate_nodes(u):
    u = np.asarray(u, dtype=float).ravel()
    if len(u) < 2 or len(u) % 2:
        raise ValueError("need an even number (>= 2) of nodes")
    if np.any(u < 0) or np.any(u >= TWO_PI):
        raise ValueError("nodes must lie in [0, 2*pi)")
    gaps = np.diff(np.concatenate([u, [u[0] + TWO_PI]]))
    if np.any(np.diff(u) <= 0):
        raise ValueError("nodes not increasing")
    if np.any(gaps <= 1e-9):
        raise ValueError("duplicate nodes")
    return u


_ALTERNATING_CACHE = {}


def _alternating(m):
    if m not in _ALTERNATING_CACHE:
        _ALTERNATING_CACHE[m] = np.where(np.arange(m) % 2 == 0, 1.0, -1.0)
    return _ALTERNATING_CACHE[m]


def _unpack(p):
    g = p[1:]
    xi = _alternating(len(g)) * g * (TWO_PI / np.sum(g))
    return p[0], xi


def _residual(p, u, spec):
    theta, xi = _unpack(p)
    return eta(xi, u, spec, theta)


def _initial_zeros(u, iterations):
    z = np.asarray(u, dtype=float)
    for _ in range(iterations):
        nxt = np.concatenate([z[1:], [z[0] + TWO_PI]])
        z = 0.5 * (z + nxt)
    return z


def _params_from_zeros(z):
    z = np.sort(np.mod(z, TWO_PI))
    g = np.diff(np.concatenate([z, [z[0] + TWO_PI]]))
    return np.concatenate([[z[0]], g])


def _project(p):
    q = p.copy()
    q[0] = q[0] % TWO_PI
    q[1:] = q[1:] * (TWO_PI / np.sum(q[1:]))
    return q


def _jacobian(fun, p, f0, step, central):
    J = np.empty((len(f0), len(p)))
    for j in range(len(p)):
        h = step * (1.0 + abs(p[j]))
        e = np.zeros_like(p)
        e[j] = h
        if central:
            J[:, j] = (fun(p + e) - fun(p - e)) / (2 * h)
        else:
            J[:, j] = (fun(p + e) - f0) / h
    return J


def _damped_least_squares(fun, p0, tol, max_iter, step):
    """Levenberg-Marquardt on ``|fun|^2`` with re-projection onto the sphere face."""
    p = _project(p0)
    try:
        f = fun(p)
    except LevelBracketError:
        return p, math.inf, 0
    best = float(np.max(np.abs(f)))
    lam, iters, central = 1e-3, 0, False
    while best > tol and iters < max_iter:
        iters += 1
        J = _jacobian(fun, p, f, step, central)
        JtJ = J.T @ J
        d = np.sqrt(np.diag(JtJ) + 1e-14 * (np.max(np.diag(JtJ)) + 1e-300))
        accepted = False
        while lam < 1e10:
            aug = np.vstack([J, math.sqrt(lam) * np.diag(d)])
            rhs = np.concatenate([-f, np.zeros(len(p))])
            delta = np.linalg.lstsq(aug, rhs, rcond=None)[0]
            q = p + delta
            if np.all(q[1:] > 1e-9 * TWO_PI):
                q = _project(q)
                try:
                    fq = fun(q)
                except LevelBracketError:
                    fq = None
                if fq is not None and np.linalg.norm(fq) < np.linalg.norm(f):
                    p, f = q, fq
                    best = float(np.max(np.abs(f)))
                    lam = max(lam / 5.0, 1e-12)
                    accepted = True
                    break
            lam *= 8.0
        if not accepted:
            if central:
                break
            central, lam = True, 1e-3
    return p, best, iters


def _starts(u, spec, rng, count):
    base_iters = [spec.r - 1, spec.r - 2, spec.r, max(spec.r - 3, 0)]
    seen = []
    for it in base_iters:
        if it >= 0 and it not in seen:
            seen.append(it)
            yield _params_from_zeros(_initial_zeros(u, it))
    base = _params_from_zeros(_initial_zeros(u, spec.r - 1))
    for _ in range(max(count - len(seen), 0)):
        p = base.copy()
        g = p[1:]
        p[0] += rng.normal(0.0, 0.25 * g.min())
        p[1:] = g * np.exp(rng.normal(0.0, 0.3, len(g)))
        yield p


def find_ideal_spline(u, spec, opts=None):
    """Ideal spline of ``spec`` vanishing exactly at the nodes ``u``."""
    opts = opts or SolverOptions()
    u = validate_nodes(u)
    tol = opts.tol if opts.tol is not None else 1e-10 * (1.0 + spec.M)
    rng = np.random.default_rng(opts.seed)
    fun = lambda p: _residual(p, u, spec)
    best = (math.inf, None, 0)
    for k, p0 in enumerate(_starts(u, spec, rng, opts.max_restarts)):
        if k >= opts.max_restarts:
            break
        p, res, iters = _damped_least_squares(fun, p0, tol, opts.max_iter, opts.fd_step)
        if res < best[0]:
            best = (res, p, best[2] + iters)
        else:
            best = (best[0], best[1], best[2] + iters)
        if res <= tol:
            break
    res, p, trace = best
    if p is None or res > tol:
        raise SolverError(f"no zero of eta found (best residual {res:.3e})", res)
    theta, xi = _unpack(p)
    chain = phi_chain(xi, u, spec, theta)
    body = chain.spline.rotate(theta)
    body = PiecewisePolynomial(body.breakpoints, body.coeffs, continuity=spec.r - 1)
    return IdealSpline.from_body(
        body,
        spec,
        u,
        residual=float(np.max(np.abs(body(u)))),
        xi=xi,
        shift=float(theta),
        level_A=chain.A,
        trace_length=trace,
    )


# ---------------------------------------------------------------------------
# validation
# ---------------------------------------------------------------------------

@dataclass
class ValidationReport:
    clauses: dict = field(default_factory=dict)

    def add(self, name, passed, violation):
        self.clauses[name] = (bool(passed), float(violation))

    @property
    def passed(self):
        return all(ok for ok, _ in self.clauses.values())

    def failing(self):
        return [k for k, (ok, _) in self.clauses.items() if not ok]

    def to_dict(self):
        return {k: {"passed": ok, "violation": v} for k, (ok, v) in self.clauses.items()}


def _interval_midpoints(pp, lo, hi):
    """Midpoints of the pieces of ``pp`` overlapping ``[lo, hi]`` (may wrap)."""
    if hi - lo <= 1e-9:
        return np.empty(0)
    return np.array([0.5 * (a + b) for a, b in _refined_pieces(pp, lo, hi)])


def validate_ideal_spline(phi):
    """Check zeros, smoothness, bounds and the knot pattern of the variant."""
    rep = ValidationReport()
    spec, body, u = phi.spec, phi.body, phi.zeros
    r, M = spec.r, spec.M
    n2 = len(u)

    zero_err = float(np.max(np.abs(body(u))))
    rep.add("zeros", zero_err <= ZERO_TOL, zero_err)

    # one strict sign per gap, alternating between gaps
    signs, worst = [], 0.0
    roots = body.roots()
    for k in range(n2):
        a, b = u[k], (u[(k + 1) % n2] + (TWO_PI if k + 1 == n2 else 0.0))
        inner = [x for x in roots if a + 1e-7 < x < b - 1e-7 or a + 1e-7 < x + TWO_PI < b - 1e-7]
        tt = np.linspace(a, b, 66)[1:-1]
        vals = body(tt)
        peak = vals[np.argmax(np.abs(vals))]
        signs.append(0 if abs(peak) <= 1e-12 else np.sign(peak))
        if inner:
            worst = max(worst, len(inner))
    alternation = all(signs[k] != 0 and signs[k] == -signs[(k + 1) % n2] for k in range(n2))
    rep.add("sign_alternation", alternation and worst == 0, worst if alternation else 1.0)

    scale = max(1.0, body.sup_norm()[0])
    smooth = max(body.max_jump(d) for d in range(r))
    rep.add("periodicity", smooth <= BOUND_TOL * scale, smooth)

    top = body.sup_norm(r)[0]
    rep.add("top_bound", top <= 1.0 + BOUND_TOL, max(top - 1.0, 0.0))
    clamp = body.sup_norm(spec.clamp_order)[0]
    rep.add("clamp_bound", clamp <= M * (1 + BOUND_TOL) + BOUND_TOL, max(clamp - M, 0.0))
    if spec.variant is Variant.RM1M2:
        nv = body.sup_norm(r - 1)[0]
        rep.add("n_bound", nv <= spec.N * (1 + BOUND_TOL) + BOUND_TOL, max(nv - spec.N, 0.0))

    rep.add("knot_count", len(phi.knots) == n2, abs(len(phi.knots) - n2))

    pattern_err, plateau_err = 0.0, 0.0
    if phi.knots:
        top_pp = body.derivative(r)
        clamp_pp = body.derivative(spec.clamp_order)
        slope_pp = body.derivative(r - 1)
        for lo, hi, kind, k in pattern_intervals(phi.structure, spec.variant):
            eps = phi.signs[k]
            mids = _interval_midpoints(top_pp, lo, hi)
            if len(mids) == 0:
                continue
            expected = {"up": eps, "down": -eps}.get(kind, 0.0)
            pattern_err = max(pattern_err, float(np.max(np.abs(top_pp(mids) - expected))))
            if kind == "tail":
                plateau_err = max(plateau_err, float(np.max(np.abs(clamp_pp(mids) - eps * M))))
            elif kind == "mid":
                plateau_err = max(plateau_err, float(np.max(np.abs(slope_pp(mids) - eps * spec.N))))
    else:
        pattern_err = plateau_err = math.inf
    # the clamped derivative may touch but never pass its level
    plateau_err = max(plateau_err, max(clamp - M, 0.0))
    rep.add("pattern", pattern_err <= 1e-8, pattern_err)
    rep.add("plateau", plateau_err <= 1e-7 * (1 + M), plateau_err)
    return rep
