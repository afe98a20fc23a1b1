"""Canonical fragment configurations and the queryable fragment index.

Every fragment is reduced to the pose of its second inducer relative to
its first: translate the first inducer to the origin, rotate its tangent
onto +X, then reflect across X if the second inducer ends up in the upper
half plane. Queries match stored configurations either at the query's own
scale (relative distance and orientation thresholds) or scale-invariantly
(direction and orientation thresholds only).
"""

from __future__ import annotations

import json
import math
import struct
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Sequence

import numpy as np

from . import corpus as corpus_mod
from .corpus import CorpusConfig, CurveRecord, FragmentRef, corpus_checksum
from .errors import ChecksumMismatch, CoincidentInducers, SnapshotError
from .geometry import (TAU, Inducer, Polyline, Similarity2, angular_distances,
                       resample_points, wrap_angle)

SNAPSHOT_MAGIC = b"CSIX1"
SNAPSHOT_VERSION = 1


@dataclass(frozen=True)
class QueryTolerances:
    """Match thresholds; relative distance & angles are all dimensionless."""

    t1_rel_dist: float = 0.05
    t1_angle: float = 0.05
    t2_orient: float = 0.10

    def __post_init__(self):
        for name in ("t1_rel_dist", "t1_angle", "t2_orient"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v >= 0.0):
                raise ValueError(f"{name} must be finite and non-negative")


@dataclass(frozen=True)
class RelativeConfiguration:
    """Second-inducer pose relative to the first, reflection-normalized.

    ``p_y <= 0`` by construction; ``reflected`` records whether the
    normalizing reflection was applied.
    """

    p_x: float
    p_y: float
    p_theta: float
    reflected: bool = False

    def __post_init__(self):
        if not all(map(math.isfinite, (self.p_x, self.p_y, self.p_theta))):
            raise ValueError("non-finite relative configuration")
        if self.p_x == 0.0 and self.p_y == 0.0:
            raise ValueError("relative configuration with zero offset")
        if self.p_y > 0.0:
            raise ValueError("relative configuration not reflection-normalized")
        object.__setattr__(self, "p_theta", wrap_angle(self.p_theta))

    @property
    def norm(self) -> float:
        return math.hypot(self.p_x, self.p_y)

    @property
    def phi(self) -> float:
        """Direction angle of the offset, in [-pi, 0]."""
        a = math.atan2(self.p_y, self.p_x)
        return -math.pi if a == math.pi else a

    def scaled(self, s: float) -> "RelativeConfiguration":
        return replace(self, p_x=self.p_x * s, p_y=self.p_y * s)


@dataclass(frozen=True)
class CanonicalFragment:
    """A fragment reference with its configuration and canonicalizing map."""

    ref: FragmentRef
    config: RelativeConfiguration
    to_canonical: Similarity2


def canonicalize(i1: Inducer, i2: Inducer) -> tuple[RelativeConfiguration, Similarity2]:
    """Relative configuration of an inducer pair plus the map that sends
    ``i1`` to the origin with angle zero (reflecting if needed)."""
    dx = i2.position.x - i1.position.x
    dy = i2.position.y - i1.position.y
    if dx == 0.0 and dy == 0.0:
        raise CoincidentInducers("inducer positions coincide")
    c = math.cos(i1.theta)
    s = math.sin(i1.theta)
    px = c * dx + s * dy
    py = -s * dx + c * dy
    ptheta = wrap_angle(i2.theta - i1.theta)
    reflected = py > 0.0
    tx = -(c * i1.position.x + s * i1.position.y)
    ty0 = s * i1.position.x - c * i1.position.y
    if reflected:
        py = -py
        ptheta = wrap_angle(-ptheta)
        t = Similarity2(rotation=i1.theta, scale=1.0, translation=(tx, -ty0), reflect=True)
    else:
        t = Similarity2(rotation=-i1.theta, scale=1.0, translation=(tx, ty0), reflect=False)
    return RelativeConfiguration(px, py, ptheta, reflected), t


def _phi_of(py: np.ndarray, px: np.ndarray) -> np.ndarray:
    phi = np.arctan2(py, px)
    phi[phi == math.pi] = -math.pi
    return phi


class FragmentIndex:
    """Grid-bucketed store of canonicalized fragments.

    Buckets are an acceleration structure only: query results are defined
    by the tolerance predicates and always equal a linear scan.
    """

    def __init__(self, curves: Sequence[CurveRecord], columns: dict,
                 tolerances: QueryTolerances, config: CorpusConfig,
                 skipped_coincident: int = 0):
        self.curves = list(curves)
        self.tolerances = tolerances
        self.config = config
        self.skipped_coincident = skipped_coincident
        self._curve_pos = columns["curve_pos"]
        self._start = columns["start"]
        self._end = columns["end"]
        self._px = columns["px"]
        self._py = columns["py"]
        self._ptheta = columns["ptheta"]
        self._reflected = columns["reflected"]
        self._rot = columns["rot"]
        self._tx = columns["tx"]
        self._ty = columns["ty"]
        self._norm = np.hypot(self._px, self._py)
        self._phi = _phi_of(self._py.copy(), self._px)
        self._by_id = {rec.curve_id: rec for rec in self.curves}
        self._build_grids()

    # -- construction ---------------------------------------------------

    @classmethod
    def build(cls, curves: Sequence[CurveRecord],
              config: CorpusConfig = CorpusConfig(),
              tolerances: QueryTolerances = QueryTolerances()) -> "FragmentIndex":
        curves = list(curves)
        pos_of = {rec.curve_id: k for k, rec in enumerate(curves)}
        refs = list(corpus_mod.enumerate_fragments(curves, config))
        n = len(refs)
        curve_pos = np.fromiter((pos_of[r.curve_id] for r in refs), dtype=np.int32, count=n)
        start = np.fromiter((r.start for r in refs), dtype=np.int32, count=n)
        end = np.fromiter((r.end for r in refs), dtype=np.int32, count=n)
        order = np.lexsort((end, start, curve_pos))
        curve_pos, start, end = curve_pos[order], start[order], end[order]

        px = np.empty(n)
        py = np.empty(n)
        ptheta = np.empty(n)
        reflected = np.empty(n, dtype=bool)
        rot = np.empty(n)
        tx = np.empty(n)
        ty = np.empty(n)
        keep = np.ones(n, dtype=bool)

        k = config.tangent_window
        bounds = np.searchsorted(curve_pos, np.arange(len(curves) + 1))
        for ci in range(len(curves)):
            lo, hi = bounds[ci], bounds[ci + 1]
            if lo == hi:
                continue
            pts = curves[ci].points
            wang = corpus_mod.window_angles(pts, k)
            i_arr = start[lo:hi]
            j_arr = end[lo:hi]
            th1 = wang[i_arr]
            th2 = np.mod(wang[j_arr - k + 1] + math.pi, TAU)
            p1 = pts[i_arr]
            p2 = pts[j_arr]
            dx = p2[:, 0] - p1[:, 0]
            dy = p2[:, 1] - p1[:, 1]
            ok = (dx != 0.0) | (dy != 0.0)
            c = np.cos(th1)
            s = np.sin(th1)
            qx = c * dx + s * dy
            qy = -s * dx + c * dy
            qt = np.mod(th2 - th1, TAU)
            refl = qy > 0.0
            qy = np.where(refl, -qy, qy)
            qt = np.where(refl, np.mod(-qt, TAU), qt)
            px[lo:hi] = qx
            py[lo:hi] = qy
            ptheta[lo:hi] = qt
            reflected[lo:hi] = refl
            rot[lo:hi] = np.where(refl, th1, -th1)
            tx[lo:hi] = -(c * p1[:, 0] + s * p1[:, 1])
            ty_un = s * p1[:, 0] - c * p1[:, 1]
            ty[lo:hi] = np.where(refl, -ty_un, ty_un)
            keep[lo:hi] = ok

        skipped = int(n - keep.sum())
        columns = {
            "curve_pos": curve_pos[keep],
            "start": start[keep],
            "end": end[keep],
            "px": px[keep],
            "py": py[keep],
            "ptheta": ptheta[keep],
            "reflected": reflected[keep],
            "rot": rot[keep],
            "tx": tx[keep],
            "ty": ty[keep],
        }
        return cls(curves, columns, tolerances, config, skipped_coincident=skipped)

    def _build_grids(self):
        tol = self.tolerances
        # Same-scale grid cell width: tolerance radius at the typical
        # stored scale, so typical queries touch O(1) cells.
        ref_norm = float(np.median(self._norm)) if len(self._norm) else 1.0
        self._cell_xy = max(tol.t1_rel_dist * ref_norm, 1e-12 * max(ref_norm, 1.0), 1e-300)
        self._n_theta = max(1, int(TAU / tol.t2_orient)) if tol.t2_orient > 0 else 4096
        self._w_theta = TAU / self._n_theta
        self._n_phi = max(1, int(math.pi / tol.t1_angle)) if tol.t1_angle > 0 else 4096
        self._w_phi = math.pi / self._n_phi

        it = self._theta_cells(self._ptheta)
        ix = np.floor(self._px / self._cell_xy).astype(np.int64)
        iy = np.floor(self._py / self._cell_xy).astype(np.int64)
        self._ss_grid = _group_cells(np.stack([ix, iy, it], axis=1))
        ip = self._phi_cells(self._phi)
        self._sf_grid = _group_cells(np.stack([ip, it], axis=1))

    def _theta_cells(self, theta):
        cells = np.floor(np.asarray(theta) / self._w_theta).astype(np.int64)
        return np.mod(cells, self._n_theta)

    def _phi_cells(self, phi):
        cells = np.floor((np.asarray(phi) + math.pi) / self._w_phi).astype(np.int64)
        return np.clip(cells, 0, self._n_phi - 1)

    # -- basic accessors ------------------------------------------------

    @property
    def n_fragments(self) -> int:
        return len(self._px)

    @property
    def fragment_norms(self) -> np.ndarray:
        """Offset distance of every stored fragment configuration."""
        return self._norm

    def curve_by_id(self, curve_id: int) -> CurveRecord:
        return self._by_id[curve_id]

    def fragment_points(self, i: int) -> np.ndarray:
        rec = self.curves[self._curve_pos[i]]
        return rec.points[self._start[i]:self._end[i] + 1]

    def fragment_ref(self, i: int) -> FragmentRef:
        rec = self.curves[self._curve_pos[i]]
        return FragmentRef(rec.curve_id, int(self._start[i]), int(self._end[i]))

    def config_of(self, i: int) -> RelativeConfiguration:
        return RelativeConfiguration(float(self._px[i]), float(self._py[i]),
                                     float(self._ptheta[i]), bool(self._reflected[i]))

    def to_canonical_of(self, i: int) -> Similarity2:
        return Similarity2(rotation=float(self._rot[i]), scale=1.0,
                           translation=(float(self._tx[i]), float(self._ty[i])),
                           reflect=bool(self._reflected[i]))

    def materialize(self, i: int) -> CanonicalFragment:
        return CanonicalFragment(self.fragment_ref(i), self.config_of(i),
                                 self.to_canonical_of(i))

    # -- queries --------------------------------------------------------

    def _tol(self, tol: QueryTolerances | None) -> QueryTolerances:
        return self.tolerances if tol is None else tol

    def same_scale_indices(self, p: RelativeConfiguration,
                           tol: QueryTolerances | None = None,
                           exhaustive: bool = False) -> np.ndarray:
        """Sorted fragment indices matching at the query's own scale."""
        tol = self._tol(tol)
        pnorm = p.norm
        radius = tol.t1_rel_dist * pnorm
        if exhaustive:
            cand = None
        else:
            cells = []
            xlo = math.floor((p.p_x - radius) / self._cell_xy)
            xhi = math.floor((p.p_x + radius) / self._cell_xy)
            ylo = math.floor((p.p_y - radius) / self._cell_xy)
            yhi = math.floor((p.p_y + radius) / self._cell_xy)
            for it in self._theta_neighborhood(p.p_theta, tol.t2_orient):
                for cx in range(xlo, xhi + 1):
                    for cy in range(ylo, yhi + 1):
                        hit = self._ss_grid.get((cx, cy, it))
                        if hit is not None:
                            cells.append(hit)
            if not cells:
                return np.empty(0, dtype=np.int64)
            cand = np.concatenate(cells)
        d = np.hypot(self._take(self._px, cand) - p.p_x,
                     self._take(self._py, cand) - p.p_y)
        good = (d <= radius) & (angular_distances(self._take(self._ptheta, cand),
                                                  p.p_theta) <= tol.t2_orient)
        out = np.flatnonzero(good) if cand is None else cand[good]
        return np.sort(out)

    def scale_invariant_indices(self, p: RelativeConfiguration,
                                tol: QueryTolerances | None = None,
                                exhaustive: bool = False) -> np.ndarray:
        """Sorted fragment indices matching in direction and orientation."""
        tol = self._tol(tol)
        phi = p.phi
        if exhaustive:
            cand = None
        elif tol.t1_angle >= math.pi / 2:
            # Directions this far apart can wrap through the fold ends;
            # the phi axis is no longer a metric box, so scan every cell.
            cand = None
        else:
            lo = math.floor((phi + math.pi - tol.t1_angle) / self._w_phi) - 1
            hi = math.floor((phi + math.pi + tol.t1_angle) / self._w_phi) + 1
            cells = []
            for it in self._theta_neighborhood(p.p_theta, tol.t2_orient):
                for cp in range(max(lo, 0), min(hi, self._n_phi - 1) + 1):
                    hit = self._sf_grid.get((cp, it))
                    if hit is not None:
                        cells.append(hit)
            if not cells:
                return np.empty(0, dtype=np.int64)
            cand = np.concatenate(cells)
        good = ((angular_distances(self._take(self._phi, cand), phi) <= tol.t1_angle)
                & (angular_distances(self._take(self._ptheta, cand),
                                     p.p_theta) <= tol.t2_orient))
        out = np.flatnonzero(good) if cand is None else cand[good]
        return np.sort(out)

    @staticmethod
    def _take(arr, cand):
        return arr if cand is None else arr[cand]

    def _theta_neighborhood(self, theta, radius):
        # One extra cell each side absorbs wrap-around rounding at the seam.
        lo = math.floor((theta - radius) / self._w_theta) - 1
        hi = math.floor((theta + radius) / self._w_theta) + 1
        if hi - lo + 1 >= self._n_theta:
            return list(range(self._n_theta))
        return [k % self._n_theta for k in range(lo, hi + 1)]

    def alignment_arrays(self, idx: np.ndarray,
                         p: RelativeConfiguration) -> tuple[np.ndarray, np.ndarray]:
        """Rotation and scale, about the origin, mapping each matched
        fragment's offset onto the query offset exactly."""
        dphi = p.phi - self._phi[idx]
        rot = np.mod(dphi + math.pi, TAU) - math.pi
        scale = p.norm / self._norm[idx]
        return rot, scale

    def aligned_resampled(self, idx: np.ndarray, p: RelativeConfiguration,
                          n: int) -> np.ndarray:
        """``(len(idx), n, 2)`` stack of matched fragments, canonicalized,
        fine-aligned to ``p``, and resampled uniformly in arc length."""
        arot, ascale = self.alignment_arrays(idx, p)
        rot = self._rot[idx] + arot
        c = np.cos(rot)
        s = np.sin(rot)
        ca = np.cos(arot)
        sa = np.sin(arot)
        tx = self._tx[idx]
        ty = self._ty[idx]
        ttx = ascale * (ca * tx - sa * ty)
        tty = ascale * (sa * tx + ca * ty)
        refl = self._reflected[idx]
        out = np.empty((len(idx), n, 2))
        for k, i in enumerate(idx):
            pts = self.fragment_points(int(i))
            fy = -pts[:, 1] if refl[k] else pts[:, 1]
            x = ascale[k] * (c[k] * pts[:, 0] - s[k] * fy) + ttx[k]
            y = ascale[k] * (s[k] * pts[:, 0] + c[k] * fy) + tty[k]
            out[k] = resample_points(np.stack([x, y], axis=1), n)
        return out

    def aligned_center_points(self, idx: np.ndarray,
                              p: RelativeConfiguration) -> np.ndarray:
        """``(len(idx), 2)`` arc-length midpoints of the aligned fragments."""
        arot, ascale = self.alignment_arrays(idx, p)
        rot = self._rot[idx] + arot
        c = np.cos(rot)
        s = np.sin(rot)
        ca = np.cos(arot)
        sa = np.sin(arot)
        ttx = ascale * (ca * self._tx[idx] - sa * self._ty[idx])
        tty = ascale * (sa * self._tx[idx] + ca * self._ty[idx])
        refl = self._reflected[idx]
        out = np.empty((len(idx), 2))
        for k, i in enumerate(idx):
            pts = self.fragment_points(int(i))
            fy = -pts[:, 1] if refl[k] else pts[:, 1]
            x = ascale[k] * (c[k] * pts[:, 0] - s[k] * fy) + ttx[k]
            y = ascale[k] * (s[k] * pts[:, 0] + c[k] * fy) + tty[k]
            seg = np.hypot(np.diff(x), np.diff(y))
            cum = np.concatenate(([0.0], np.cumsum(seg)))
            half = 0.5 * cum[-1]
            out[k, 0] = np.interp(half, cum, x)
            out[k, 1] = np.interp(half, cum, y)
        return out

    def points_of(self, ref: FragmentRef) -> np.ndarray:
        """Image-frame points of a fragment reference."""
        rec = self._by_id[ref.curve_id]
        return rec.points[ref.start:ref.end + 1]

    def query_same_scale(self, p: RelativeConfiguration,
                         tol: QueryTolerances | None = None,
                         exhaustive: bool = False) -> list[tuple[CanonicalFragment, Similarity2]]:
        idx = self.same_scale_indices(p, tol, exhaustive)
        return self._materialize_matches(idx, p)

    def query_scale_invariant(self, p: RelativeConfiguration,
                              tol: QueryTolerances | None = None,
                              exhaustive: bool = False) -> list[tuple[CanonicalFragment, Similarity2]]:
        idx = self.scale_invariant_indices(p, tol, exhaustive)
        return self._materialize_matches(idx, p)

    def _materialize_matches(self, idx, p):
        rot, scale = self.alignment_arrays(idx, p)
        return [(self.materialize(int(i)),
                 Similarity2(rotation=float(r), scale=float(s)))
                for i, r, s in zip(idx, rot, scale)]

    # -- diagnostics ----------------------------------------------------

    def bucket_occupancy(self) -> dict:
        def hist(grid):
            sizes = np.array([len(v) for v in grid.values()], dtype=np.int64)
            if len(sizes) == 0:
                return {"cells": 0, "max": 0, "mean": 0.0, "histogram": {}}
            binned = np.minimum(sizes, 10)
            counts = {}
            for b in range(1, 11):
                c = int(np.sum(binned == b))
                if c:
                    counts["10+" if b == 10 else str(b)] = c
            return {"cells": int(len(sizes)), "max": int(sizes.max()),
                    "mean": float(sizes.mean()), "histogram": counts}

        return {"same_scale": hist(self._ss_grid), "scale_free": hist(self._sf_grid)}

    # -- persistence ----------------------------------------------------

    def save(self, path) -> None:
        curves = self.curves
        offsets = np.zeros(len(curves) + 1, dtype="<i8")
        for k, rec in enumerate(curves):
            offsets[k + 1] = offsets[k] + len(rec.points)
        points_all = (np.concatenate([rec.points for rec in curves])
                      if curves else np.empty((0, 2)))
        arrays = [
            ("curve_offsets", offsets),
            ("points", np.ascontiguousarray(points_all, dtype="<f8")),
            ("curve_pos", np.ascontiguousarray(self._curve_pos, dtype="<i4")),
            ("start", np.ascontiguousarray(self._start, dtype="<i4")),
            ("end", np.ascontiguousarray(self._end, dtype="<i4")),
            ("px", np.ascontiguousarray(self._px, dtype="<f8")),
            ("py", np.ascontiguousarray(self._py, dtype="<f8")),
            ("ptheta", np.ascontiguousarray(self._ptheta, dtype="<f8")),
            ("reflected", np.ascontiguousarray(self._reflected, dtype="u1")),
            ("rot", np.ascontiguousarray(self._rot, dtype="<f8")),
            ("tx", np.ascontiguousarray(self._tx, dtype="<f8")),
            ("ty", np.ascontiguousarray(self._ty, dtype="<f8")),
        ]
        header = {
            "version": SNAPSHOT_VERSION,
            "checksum": corpus_checksum(curves),
            "tolerances": {"t1_rel_dist": self.tolerances.t1_rel_dist,
                           "t1_angle": self.tolerances.t1_angle,
                           "t2_orient": self.tolerances.t2_orient},
            "corpus_config": {"min_fragment_points": self.config.min_fragment_points,
                              "tangent_window": self.config.tangent_window,
                              "fragment_stride": self.config.fragment_stride,
                              "max_fragments": self.config.max_fragments,
                              "seed": self.config.seed},
            "skipped_coincident": self.skipped_coincident,
            "curve_ids": [rec.curve_id for rec in curves],
            "image_ids": [rec.image_id for rec in curves],
            "arrays": [{"name": name, "dtype": str(arr.dtype), "shape": list(arr.shape)}
                       for name, arr in arrays],
        }
        blob = json.dumps(header, sort_keys=True).encode("utf-8")
        with open(path, "wb") as f:
            f.write(SNAPSHOT_MAGIC)
            f.write(struct.pack("<I", len(blob)))
            f.write(blob)
            for _, arr in arrays:
                f.write(arr.tobytes())

    @classmethod
    def load(cls, path, curves: Sequence[CurveRecord] | None = None) -> "FragmentIndex":
        raw = Path(path).read_bytes()
        if len(raw) < len(SNAPSHOT_MAGIC) + 4 or raw[:len(SNAPSHOT_MAGIC)] != SNAPSHOT_MAGIC:
            raise SnapshotError(f"{path} is not an index snapshot")
        hlen = struct.unpack_from("<I", raw, len(SNAPSHOT_MAGIC))[0]
        off = len(SNAPSHOT_MAGIC) + 4
        try:
            header = json.loads(raw[off:off + hlen].decode("utf-8"))
        except (UnicodeDecodeError, json.JSONDecodeError) as e:
            raise SnapshotError(f"corrupt snapshot header in {path}") from e
        if header.get("version") != SNAPSHOT_VERSION:
            raise SnapshotError(f"unsupported snapshot version {header.get('version')}")
        off += hlen
        data = {}
        for desc in header["arrays"]:
            dtype = np.dtype(desc["dtype"])
            shape = tuple(desc["shape"])
            count = int(np.prod(shape)) if shape else 1
            nbytes = count * dtype.itemsize
            if off + nbytes > len(raw):
                raise SnapshotError(f"truncated snapshot {path}")
            data[desc["name"]] = np.frombuffer(raw, dtype=dtype, count=count,
                                               offset=off).reshape(shape).copy()
            off += nbytes

        offsets = data["curve_offsets"]
        pts = data["points"]
        embedded = []
        for k, (cid, img) in enumerate(zip(header["curve_ids"], header["image_ids"])):
            embedded.append(CurveRecord(int(cid), str(img),
                                        Polyline(pts[offsets[k]:offsets[k + 1]])))
        if corpus_checksum(embedded) != header["checksum"]:
            raise SnapshotError(f"snapshot {path} fails its own checksum")
        if curves is not None:
            if corpus_checksum(list(curves)) != header["checksum"]:
                raise ChecksumMismatch(
                    f"snapshot {path} was built from a different corpus")
            embedded = list(curves)

        tol = QueryTolerances(**header["tolerances"])
        cfg = CorpusConfig(**header["corpus_config"])
        columns = {
            "curve_pos": data["curve_pos"].astype(np.int32),
            "start": data["start"].astype(np.int32),
            "end": data["end"].astype(np.int32),
            "px": data["px"].astype(float),
            "py": data["py"].astype(float),
            "ptheta": data["ptheta"].astype(float),
            "reflected": data["reflected"].astype(bool),
            "rot": data["rot"].astype(float),
            "tx": data["tx"].astype(float),
            "ty": data["ty"].astype(float),
        }
        return cls(embedded, columns, tol, cfg,
                   skipped_coincident=int(header.get("skipped_coincident", 0)))


def _group_cells(cells: np.ndarray) -> dict:
    """Group row indices of identical cell-coordinate rows into a dict."""
    if len(cells) == 0:
        return {}
    uniq, inverse = np.unique(cells, axis=0, return_inverse=True)
    order = np.argsort(inverse, kind="stable")
    counts = np.bincount(inverse, minlength=len(uniq))
    splits = np.cumsum(counts)[:-1]
    groups = np.split(order.astype(np.int64), splits)
    return {tuple(int(x) for x in key): grp for key, grp in zip(uniq, groups)}


def build_index(curves: Sequence[CurveRecord],
                config: CorpusConfig = CorpusConfig(),
                tolerances: QueryTolerances = QueryTolerances()) -> FragmentIndex:
    """Canonicalize every enumerated fragment and bucket it for queries."""
    return FragmentIndex.build(curves, config, tolerances)
