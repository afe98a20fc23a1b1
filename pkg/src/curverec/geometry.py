"""Planar primitives: points, oriented inducers, polylines, similarity maps.

Angles are radians. Inducer angles are directed (mod 2*pi) and point from
the endpoint into the curve or gap they belong to. Coordinates follow the
annotation frame of the source images (pixel units, no axis flip).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import CoincidentInducers, EmptyInput, ZeroLength

TAU = 2.0 * math.pi


def wrap_angle(a: float) -> float:
    """Wrap an angle to the interval [0, 2*pi)."""
    a = math.fmod(float(a), TAU)
    if a < 0.0:
        a += TAU
    if a >= TAU:  # fp rounding at the seam
        a = 0.0
    return a


def wrap_angles(a: np.ndarray) -> np.ndarray:
    """Vectorized :func:`wrap_angle`."""
    out = np.mod(np.asarray(a, dtype=float), TAU)
    out[out >= TAU] = 0.0
    return out


def angular_distance(a: float, b: float) -> float:
    """Shortest angular distance between two directed angles, in [0, pi]."""
    d = math.fmod(abs(float(a) - float(b)), TAU)
    return min(d, TAU - d)


def angular_distances(a, b) -> np.ndarray:
    """Vectorized :func:`angular_distance`; broadcasts its arguments."""
    d = np.mod(np.abs(np.asarray(a, dtype=float) - np.asarray(b, dtype=float)), TAU)
    return np.minimum(d, TAU - d)


@dataclass(frozen=True)
class Point2:
    """A finite point in the plane."""

    x: float
    y: float

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise ValueError(f"non-finite point ({self.x}, {self.y})")

    @property
    def xy(self) -> np.ndarray:
        return np.array([self.x, self.y], dtype=float)


@dataclass(frozen=True)
class Inducer:
    """An oriented curve endpoint: a position plus a directed tangent angle.

    The angle points into the fragment (for corpus fragments) or into the
    gap to be completed (for reconstruction queries).
    """

    position: Point2
    theta: float

    def __post_init__(self):
        if not math.isfinite(self.theta):
            raise ValueError("non-finite inducer angle")
        object.__setattr__(self, "theta", wrap_angle(self.theta))

    @classmethod
    def of(cls, x: float, y: float, theta: float) -> "Inducer":
        return cls(Point2(float(x), float(y)), theta)

    @property
    def xy(self) -> np.ndarray:
        return self.position.xy


class Polyline:
    """An ordered planar point sequence with cached cumulative arc length.

    Consecutive duplicate points are dropped at construction. At least two
    distinct points must remain, so the total length is strictly positive
    and the cumulative arc length is strictly increasing.
    """

    __slots__ = ("_points", "_cum")

    def __init__(self, points):
        arr = np.asarray(points, dtype=float)
        if arr.size == 0:
            raise ZeroLength("empty point sequence")
        arr = arr.reshape(-1, 2)
        if not np.isfinite(arr).all():
            raise ValueError("non-finite coordinates in polyline")
        if len(arr) > 1:
            keep = np.empty(len(arr), dtype=bool)
            keep[0] = True
            keep[1:] = (arr[1:] != arr[:-1]).any(axis=1)
            arr = arr[keep]
        if len(arr) < 2:
            raise ZeroLength("polyline has fewer than 2 distinct points")
        seg = np.hypot(np.diff(arr[:, 0]), np.diff(arr[:, 1]))
        cum = np.concatenate(([0.0], np.cumsum(seg)))
        arr.flags.writeable = False
        cum.flags.writeable = False
        self._points = arr
        self._cum = cum

    @property
    def points(self) -> np.ndarray:
        return self._points

    @property
    def cumulative_arclength(self) -> np.ndarray:
        return self._cum

    @property
    def length(self) -> float:
        return float(self._cum[-1])

    def __len__(self) -> int:
        return len(self._points)

    def point_at(self, s):
        """Point(s) at arc-length position(s) ``s``, linearly interpolated."""
        s = np.clip(np.asarray(s, dtype=float), 0.0, self.length)
        x = np.interp(s, self._cum, self._points[:, 0])
        y = np.interp(s, self._cum, self._points[:, 1])
        return np.stack(np.broadcast_arrays(x, y), axis=-1)

    def reversed(self) -> "Polyline":
        return Polyline(self._points[::-1])

    def __repr__(self):
        return f"Polyline({len(self._points)} pts, length={self.length:.6g})"


def _as_point_array(obj) -> np.ndarray:
    if isinstance(obj, Polyline):
        return obj.points
    arr = np.asarray(obj, dtype=float)
    return arr.reshape(-1, 2)


def resample_points(pts: np.ndarray, n: int) -> np.ndarray:
    """Arc-length resampling for a raw ``(k, 2)`` array, no validation.

    Endpoints are copied through exactly. A degenerate input whose points
    all coincide just repeats that location ``n`` times.
    """
    if n < 2:
        raise ValueError("resampling needs n >= 2")
    pts = np.asarray(pts, dtype=float)
    seg = np.hypot(np.diff(pts[:, 0]), np.diff(pts[:, 1]))
    cum = np.concatenate(([0.0], np.cumsum(seg)))
    total = cum[-1]
    if total <= 0.0:
        return np.repeat(pts[:1], n, axis=0)
    t = np.linspace(0.0, total, n)
    out = np.empty((n, 2), dtype=float)
    out[:, 0] = np.interp(t, cum, pts[:, 0])
    out[:, 1] = np.interp(t, cum, pts[:, 1])
    out[0] = pts[0]
    out[-1] = pts[-1]
    return out


def resample_arclength(poly, n: int) -> np.ndarray:
    """Resample a polyline to ``n`` points, exactly uniform in arc length.

    The first and last input points are preserved exactly. Returns an
    ``(n, 2)`` array.
    """
    if n < 2:
        raise ValueError("resampling needs n >= 2")
    if not isinstance(poly, Polyline):
        poly = Polyline(poly)
    cum = poly.cumulative_arclength
    pts = poly.points
    t = np.linspace(0.0, poly.length, n)
    out = np.empty((n, 2), dtype=float)
    out[:, 0] = np.interp(t, cum, pts[:, 0])
    out[:, 1] = np.interp(t, cum, pts[:, 1])
    out[0] = pts[0]
    out[-1] = pts[-1]
    return out


def discrete_frechet(a, b) -> float:
    """Discrete Frechet distance between two point sequences.

    Dynamic program over the coupling lattice; the value is the minimum
    over all monotone couplings of the maximum pointwise distance.
    """
    pa = _as_point_array(a)
    pb = _as_point_array(b)
    if len(pa) == 0 or len(pb) == 0:
        raise EmptyInput("discrete_frechet needs non-empty sequences")
    dist = np.hypot(pa[:, None, 0] - pb[None, :, 0], pa[:, None, 1] - pb[None, :, 1])
    p, q = dist.shape
    ca = np.empty((p, q), dtype=float)
    ca[0, 0] = dist[0, 0]
    for j in range(1, q):
        ca[0, j] = max(ca[0, j - 1], dist[0, j])
    for i in range(1, p):
        ca[i, 0] = max(ca[i - 1, 0], dist[i, 0])
        row = ca[i]
        prev = ca[i - 1]
        di = dist[i]
        for j in range(1, q):
            row[j] = max(min(prev[j], prev[j - 1], row[j - 1]), di[j])
    return float(ca[-1, -1])


@dataclass(frozen=True)
class Similarity2:
    """A direct or opposite similarity of the plane.

    Maps ``x`` to ``scale * R(rotation) @ F(x) + translation`` where ``F``
    reflects across the X axis when ``reflect`` is set (applied first).
    """

    rotation: float = 0.0
    scale: float = 1.0
    translation: tuple[float, float] = (0.0, 0.0)
    reflect: bool = False

    def __post_init__(self):
        if not (math.isfinite(self.rotation) and math.isfinite(self.scale)):
            raise ValueError("non-finite similarity parameters")
        if self.scale <= 0.0:
            raise ValueError("similarity scale must be positive")

    @classmethod
    def identity(cls) -> "Similarity2":
        return cls()

    def transform_points(self, pts) -> np.ndarray:
        arr = _as_point_array(pts)
        x = arr[:, 0]
        y = -arr[:, 1] if self.reflect else arr[:, 1]
        c = self.scale * math.cos(self.rotation)
        s = self.scale * math.sin(self.rotation)
        out = np.empty_like(arr)
        out[:, 0] = c * x - s * y + self.translation[0]
        out[:, 1] = s * x + c * y + self.translation[1]
        return out

    def transform_angle(self, theta: float) -> float:
        t = -theta if self.reflect else theta
        return wrap_angle(t + self.rotation)

    def inverse(self) -> "Similarity2":
        inv_scale = 1.0 / self.scale
        if self.reflect:
            rot = self.rotation
            refl = True
        else:
            rot = -self.rotation
            refl = False
        back = Similarity2(rotation=rot, scale=inv_scale, translation=(0.0, 0.0), reflect=refl)
        tx, ty = back.transform_points(np.array([self.translation]))[0]
        return Similarity2(rotation=rot, scale=inv_scale, translation=(-tx, -ty), reflect=refl)

    def compose(self, inner: "Similarity2") -> "Similarity2":
        """The map applying ``inner`` first, then this similarity."""
        sign = -1.0 if self.reflect else 1.0
        rot = self.rotation + sign * inner.rotation
        tx, ty = self.transform_points(np.array([inner.translation]))[0]
        return Similarity2(
            rotation=rot,
            scale=self.scale * inner.scale,
            translation=(tx, ty),
            reflect=self.reflect != inner.reflect,
        )


def apply_similarity(t: Similarity2, obj):
    """Apply a similarity to a Point2, Inducer, Polyline, or point array."""
    if isinstance(obj, Point2):
        x, y = t.transform_points(np.array([[obj.x, obj.y]]))[0]
        return Point2(float(x), float(y))
    if isinstance(obj, Inducer):
        return Inducer(apply_similarity(t, obj.position), t.transform_angle(obj.theta))
    if isinstance(obj, Polyline):
        return Polyline(t.transform_points(obj.points))
    return t.transform_points(obj)


def chord_frame_angles(i1: Inducer, i2: Inducer) -> tuple[float, float]:
    """Inducer angles relative to the chord from ``i1`` to ``i2``.

    The chord is rotated onto +X and the pair is reflected across it, if
    needed, so the first angle lands in [0, pi]. Classifications built on
    these angles (see :func:`is_difficult_configuration`) do not depend on
    the order of the two inducers.
    """
    dx = i2.position.x - i1.position.x
    dy = i2.position.y - i1.position.y
    if dx == 0.0 and dy == 0.0:
        raise CoincidentInducers("chord has zero length")
    chord = math.atan2(dy, dx)
    a1 = wrap_angle(i1.theta - chord)
    a2 = wrap_angle(i2.theta - chord)
    if a1 > math.pi or (a1 in (0.0, math.pi) and a2 > math.pi):
        a1 = wrap_angle(-a1)
        a2 = wrap_angle(-a2)
    return a1, a2


def is_difficult_configuration(i1: Inducer, i2: Inducer) -> bool:
    """True when the first chord-frame angle exceeds pi/2 and the second
    stays below pi/2: the inducer pair points away from its own gap."""
    a1, a2 = chord_frame_angles(i1, i2)
    return a1 > math.pi / 2 and a2 < math.pi / 2
