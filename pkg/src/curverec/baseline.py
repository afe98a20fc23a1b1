"""G1 gap completion with an Euler spiral (clothoid), plus a biarc fallback.

A clothoid has curvature linear in arc length. Completing a gap means
solving for (kappa0, kappa_rate, length) so the curve leaves the first
inducer along its tangent and arrives at the second with the opposite of
its tangent (inducer angles point into the gap). The solve happens on a
unit chord, so scaling the endpoints scales the solution exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad
from scipy.optimize import brentq
from scipy.special import fresnel

from .errors import CoincidentInducers, NoConvergence, OutOfRange
from .geometry import Inducer, Point2, Polyline, TAU, resample_arclength

_A_SMALL = 1e-3       # below this quadratic coefficient, integrate numerically
_GRID_MAX = 45.0      # search range for the quadratic-term coefficient
_GRID_N = 1441
_RESIDUAL_TOL = 1e-9  # unit-chord endpoint defect accepted from the solver


@dataclass(frozen=True)
class ClothoidSegment:
    """A clothoid arc: start pose, initial curvature, curvature rate, length."""

    start: Inducer
    kappa0: float
    kappa_rate: float
    length: float

    def __post_init__(self):
        if not (math.isfinite(self.kappa0) and math.isfinite(self.kappa_rate)
                and math.isfinite(self.length) and self.length > 0.0):
            raise ValueError("bad clothoid parameters")


def _moment(a, b, c):
    """``integral_0^1 exp(i (a t^2 + b t + c)) dt``, elementwise over a, b."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    scalar = a.ndim == 0 and b.ndim == 0
    a, b = np.broadcast_arrays(np.atleast_1d(a), np.atleast_1d(b))
    out = np.empty(a.shape, dtype=complex)

    big = np.abs(a) >= _A_SMALL
    if np.any(big):
        aa = a[big]
        bb = b[big]
        alpha = np.abs(aa)
        sigma = np.sign(aa)
        omega = np.sqrt(2.0 * alpha / math.pi)
        h = bb / (2.0 * aa)
        u0 = omega * h
        u1 = omega * (1.0 + h)
        s0, c0 = fresnel(u0)
        s1, c1 = fresnel(u1)
        phase = c - bb * bb / (4.0 * aa)
        rot = np.cos(phase) + 1j * np.sin(phase)
        core = (c1 - c0) + 1j * sigma * (s1 - s0)
        out[big] = rot * core / omega

    zero = (~big) & (a == 0.0)
    if np.any(zero):
        bb = b[zero]
        res = np.empty(bb.shape, dtype=complex)
        tiny = np.abs(bb) < 1e-12
        res[tiny] = 1.0 + 0.5j * bb[tiny]
        bt = bb[~tiny]
        res[~tiny] = (np.exp(1j * bt) - 1.0) / (1j * bt)
        out[zero] = np.exp(1j * c) * res

    rest = (~big) & (a != 0.0)
    for k in np.flatnonzero(rest):
        ak = float(a.flat[k])
        bk = float(b.flat[k])
        re = quad(lambda t: math.cos(ak * t * t + bk * t + c), 0.0, 1.0,
                  epsabs=1e-13, limit=200)[0]
        im = quad(lambda t: math.sin(ak * t * t + bk * t + c), 0.0, 1.0,
                  epsabs=1e-13, limit=200)[0]
        out.flat[k] = re + 1j * im

    return complex(out[0]) if scalar else out.reshape(a.shape)


def _wrap_pm(a: float) -> float:
    """Wrap to (-pi, pi]."""
    a = math.fmod(a, TAU)
    if a <= -math.pi:
        a += TAU
    elif a > math.pi:
        a -= TAU
    return a


def _total_turning(kappa0: float, rate: float, length: float) -> float:
    k1 = kappa0 + rate * length
    if rate == 0.0:
        return abs(kappa0) * length
    s_star = -kappa0 / rate
    if 0.0 < s_star < length:
        return (kappa0 * kappa0 + k1 * k1) / (2.0 * abs(rate))
    return 0.5 * (abs(kappa0) + abs(k1)) * length


def _unit_candidates(phi0: float, delta: float):
    """Unit-chord solutions (kappa0, rate, length) for boundary angles."""
    grid = np.linspace(-_GRID_MAX, _GRID_MAX, _GRID_N)
    vals = _moment(grid, delta - grid, phi0)
    y = vals.imag

    def g(A: float) -> float:
        return _moment(float(A), delta - float(A), phi0).imag

    roots = []
    for k in np.flatnonzero(y == 0.0):
        roots.append(float(grid[k]))
    sign_change = np.flatnonzero(y[:-1] * y[1:] < 0.0)
    for k in sign_change:
        roots.append(brentq(g, float(grid[k]), float(grid[k + 1]),
                            xtol=1e-13, rtol=8.9e-16))

    out = []
    for A in roots:
        val = _moment(A, delta - A, phi0)
        x = val.real
        if x <= 0.0:
            continue
        length = 1.0 / x
        if abs(length * val - 1.0) > _RESIDUAL_TOL:
            continue
        kappa0 = (delta - A) * x
        rate = 2.0 * A * x * x
        out.append((kappa0, rate, length))
    return out


def euler_spiral_solve(i1: Inducer, i2: Inducer) -> ClothoidSegment:
    """Fit the clothoid joining two inducers (angles point into the gap).

    Among admissible solutions the one with least total absolute turning
    is returned. Raises :class:`NoConvergence` when the boundary solve
    finds no admissible curve.
    """
    dx = i2.position.x - i1.position.x
    dy = i2.position.y - i1.position.y
    r = math.hypot(dx, dy)
    if r == 0.0:
        raise CoincidentInducers("clothoid endpoints coincide")
    chord = math.atan2(dy, dx)
    theta_out = i1.theta
    theta_in = i2.theta + math.pi  # travel direction at arrival
    phi0 = _wrap_pm(theta_out - chord)
    phi1 = _wrap_pm(theta_in - chord)
    if abs(phi0) < 1e-12 and abs(phi1) < 1e-12:
        return ClothoidSegment(start=i1, kappa0=0.0, kappa_rate=0.0, length=r)

    candidates = []
    for delta in (phi1 - phi0, phi1 - phi0 + TAU, phi1 - phi0 - TAU):
        candidates.extend(_unit_candidates(phi0, delta))
        if candidates:
            break
    if not candidates:
        raise NoConvergence(
            f"no clothoid between boundary angles ({phi0:.4f}, {phi1:.4f})")
    kappa0, rate, length = min(candidates, key=lambda c: _total_turning(*c))
    return ClothoidSegment(start=i1, kappa0=kappa0 / r,
                           kappa_rate=rate / (r * r), length=length * r)


def _positions(seg: ClothoidSegment, s: np.ndarray) -> np.ndarray:
    theta0 = seg.start.theta
    x0 = seg.start.position.x
    y0 = seg.start.position.y
    s = np.asarray(s, dtype=float)
    if seg.kappa_rate == 0.0 and seg.kappa0 == 0.0:
        return np.stack([x0 + s * math.cos(theta0), y0 + s * math.sin(theta0)], axis=-1)
    if seg.kappa_rate == 0.0:
        k = seg.kappa0
        ang = theta0 + k * s
        return np.stack([x0 + (np.sin(ang) - math.sin(theta0)) / k,
                         y0 + (math.cos(theta0) - np.cos(ang)) / k], axis=-1)
    vals = _moment(0.5 * seg.kappa_rate * s * s, seg.kappa0 * s, theta0)
    vals = np.atleast_1d(vals)
    return np.stack([x0 + s * vals.real, y0 + s * vals.imag], axis=-1)


def eval_clothoid(seg: ClothoidSegment, s: float) -> tuple[Point2, float, float]:
    """Position, tangent angle, and curvature at arc length ``s``."""
    s = float(s)
    if not 0.0 <= s <= seg.length:
        raise OutOfRange(f"s={s} outside [0, {seg.length}]")
    p = _positions(seg, np.array([s]))[0]
    theta = seg.start.theta + seg.kappa0 * s + 0.5 * seg.kappa_rate * s * s
    kappa = seg.kappa0 + seg.kappa_rate * s
    return Point2(float(p[0]), float(p[1])), theta, kappa


def sample_clothoid(seg: ClothoidSegment, n: int) -> np.ndarray:
    """``n`` points along the segment, uniform in arc length."""
    if n < 2:
        raise ValueError("need n >= 2 samples")
    return _positions(seg, np.linspace(0.0, seg.length, n))


def euler_spiral_complete(i1: Inducer, i2: Inducer, n: int = 16) -> Polyline:
    """Polyline of the fitted clothoid, ``n`` points uniform in arc length."""
    return Polyline(sample_clothoid(euler_spiral_solve(i1, i2), n))


def _arc_points(pa: np.ndarray, ta: float, pb: np.ndarray, n: int) -> np.ndarray:
    """Sample the arc leaving ``pa`` with tangent angle ``ta`` and ending at
    ``pb``; degenerates to the chord when the turn is negligible."""
    c = pb - pa
    t = np.array([math.cos(ta), math.sin(ta)])
    cross = t[0] * c[1] - t[1] * c[0]
    dot = float(t @ c)
    chord2 = float(c @ c)
    kappa = 2.0 * cross / chord2
    if abs(kappa) * math.sqrt(chord2) < 1e-9:
        frac = np.linspace(0.0, 1.0, n)[:, None]
        return pa + frac * c
    center = pa + np.array([-t[1], t[0]]) / kappa
    radius = 1.0 / abs(kappa)
    a0 = math.atan2(pa[1] - center[1], pa[0] - center[0])
    sweep = 2.0 * math.atan2(cross, dot)
    ang = a0 + np.linspace(0.0, sweep, n)
    pts = center + radius * np.stack([np.cos(ang), np.sin(ang)], axis=1)
    pts[0] = pa
    pts[-1] = pb
    return pts


def biarc_complete(i1: Inducer, i2: Inducer, n: int = 16) -> Polyline | None:
    """Tangent-continuous pair of circular arcs between the inducers, or
    ``None`` for degenerate tangent data."""
    p1 = i1.xy
    p2 = i2.xy
    v = p2 - p1
    if not v.any():
        raise CoincidentInducers("biarc endpoints coincide")
    t1 = np.array([math.cos(i1.theta), math.sin(i1.theta)])
    psi2 = i2.theta + math.pi
    t2 = np.array([math.cos(psi2), math.sin(psi2)])
    tsum = t1 + t2
    alpha = 2.0 * (float(t1 @ t2) - 1.0)
    vt = float(v @ tsum)
    vv = float(v @ v)
    if abs(alpha) < 1e-12:
        if vt <= 1e-12:
            return None
        t = vv / vt
    else:
        disc = vt * vt - alpha * vv
        t = (vt - math.sqrt(disc)) / alpha
    if not (math.isfinite(t) and t > 0.0):
        return None
    m1 = p1 + t * t1
    m2 = p2 - t * t2
    j = 0.5 * (m1 + m2)
    jdir = m2 - m1
    if math.hypot(jdir[0], jdir[1]) < 1e-9 * math.sqrt(vv):
        # tangent points coincide: the two arcs meet directly at j, so the
        # junction direction is the first arc's exit tangent (start tangent
        # reflected across that arc's chord)
        cj = j - p1
        if cj.any():
            tj = 2.0 * math.atan2(cj[1], cj[0]) - i1.theta
        else:
            tj = i1.theta
    else:
        tj = math.atan2(jdir[1], jdir[0])
    n1 = n // 2 + 1
    first = _arc_points(p1, i1.theta, j, n1)
    second = _arc_points(j, tj, p2, n - n1 + 2)
    pts = np.concatenate([first, second[1:]])
    try:
        return Polyline(resample_arclength(Polyline(pts), n))
    except Exception:
        return None


def complete_gap(i1: Inducer, i2: Inducer, n: int = 16) -> tuple[Polyline, str]:
    """Baseline completion: clothoid if the solve converges, else biarc,
    else the straight chord. Returns the curve and which method produced it."""
    try:
        seg = euler_spiral_solve(i1, i2)
        kind = "line" if seg.kappa0 == 0.0 and seg.kappa_rate == 0.0 else "clothoid"
        return Polyline(sample_clothoid(seg, n)), kind
    except NoConvergence:
        pass
    poly = biarc_complete(i1, i2, n)
    if poly is not None:
        return poly, "biarc"
    frac = np.linspace(0.0, 1.0, n)[:, None]
    pts = i1.xy + frac * (i2.xy - i1.xy)
    return Polyline(pts), "segment"
