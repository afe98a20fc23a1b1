"""Curve corpora: loading, fragment enumeration, endpoint tangents, synthesis.

The canonical interchange format is a plain text file:

    CURVES v1
    curve <id> <image_id> <n_points>
    <x> <y>
    ...

Curves keep their source image id so corpus splits can be made at the
image level. Curves with fewer than 4 distinct points are skipped on load
and counted, not errored.
"""

from __future__ import annotations

import hashlib
import math
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Iterator, Sequence

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .errors import DegenerateTangent, EmptyCorpus, ParseError, ZeroLength
from .geometry import TAU, Inducer, Polyline

MIN_CURVE_POINTS = 4


@dataclass(frozen=True)
class CurveRecord:
    """One annotated curve, tied to the image it came from."""

    curve_id: int
    image_id: str
    polyline: Polyline

    def __post_init__(self):
        if len(self.polyline) < MIN_CURVE_POINTS:
            raise ValueError(
                f"curve {self.curve_id} has {len(self.polyline)} distinct points, "
                f"needs {MIN_CURVE_POINTS}"
            )

    @property
    def points(self) -> np.ndarray:
        return self.polyline.points


@dataclass(frozen=True)
class FragmentRef:
    """A curve fragment addressed by curve id and inclusive point indices."""

    curve_id: int
    start: int
    end: int

    def __post_init__(self):
        if not (0 <= self.start < self.end):
            raise ValueError(f"bad fragment indices ({self.start}, {self.end})")


@dataclass(frozen=True)
class CorpusConfig:
    """Knobs for fragment enumeration and endpoint tangent estimation."""

    min_fragment_points: int = 4
    tangent_window: int = 3
    fragment_stride: int = 1
    max_fragments: int | None = None
    seed: int = 0

    def __post_init__(self):
        if self.min_fragment_points < 2:
            raise ValueError("min_fragment_points must be at least 2")
        if not 2 <= self.tangent_window <= self.min_fragment_points:
            raise ValueError("tangent_window must be in [2, min_fragment_points]")
        if self.fragment_stride < 1:
            raise ValueError("fragment_stride must be positive")
        if self.max_fragments is not None and self.max_fragments < 1:
            raise ValueError("max_fragments must be positive when set")


@dataclass
class CurveSet:
    """Loaded curves plus the number of records skipped as too short."""

    curves: list[CurveRecord]
    skipped: int = 0
    source: str | None = None

    def __iter__(self) -> Iterator[CurveRecord]:
        return iter(self.curves)

    def __len__(self) -> int:
        return len(self.curves)

    def __getitem__(self, i):
        return self.curves[i]


def load_curves(path, fmt: str = "curves") -> CurveSet:
    """Load a corpus file (or, for ``cem``, a file or directory of files)."""
    path = Path(path)
    if fmt == "curves":
        return _load_canonical(path)
    if fmt == "cem":
        return _load_cem(path)
    raise ValueError(f"unknown corpus format {fmt!r}")


def _load_canonical(path: Path) -> CurveSet:
    try:
        lines = path.read_text().splitlines()
    except OSError as e:
        raise ParseError(str(e), path=str(path)) from e
    pos = 0
    nlines = len(lines)
    while pos < nlines and not lines[pos].strip():
        pos += 1
    if pos >= nlines or lines[pos].strip() != "CURVES v1":
        raise ParseError("missing 'CURVES v1' header", path=str(path), line=pos + 1)
    pos += 1
    curves: list[CurveRecord] = []
    skipped = 0
    seen_ids: set[int] = set()
    while pos < nlines:
        line = lines[pos].strip()
        if not line:
            pos += 1
            continue
        parts = line.split()
        if len(parts) != 4 or parts[0] != "curve":
            raise ParseError(f"expected 'curve <id> <image_id> <n>', got {line!r}",
                             path=str(path), line=pos + 1)
        try:
            cid = int(parts[1])
            npts = int(parts[3])
        except ValueError as e:
            raise ParseError(f"bad curve header {line!r}", path=str(path), line=pos + 1) from e
        image_id = parts[2]
        if npts < 2:
            raise ParseError(f"curve {cid} declares {npts} points", path=str(path), line=pos + 1)
        if cid in seen_ids:
            raise ParseError(f"duplicate curve id {cid}", path=str(path), line=pos + 1)
        seen_ids.add(cid)
        pos += 1
        if pos + npts > nlines:
            raise ParseError(f"curve {cid} truncated", path=str(path), line=pos)
        pts = np.empty((npts, 2), dtype=float)
        for k in range(npts):
            toks = lines[pos + k].split()
            if len(toks) != 2:
                raise ParseError(f"expected 'x y', got {lines[pos + k]!r}",
                                 path=str(path), line=pos + k + 1)
            try:
                pts[k, 0] = float(toks[0])
                pts[k, 1] = float(toks[1])
            except ValueError as e:
                raise ParseError(f"bad coordinate {lines[pos + k]!r}",
                                 path=str(path), line=pos + k + 1) from e
        pos += npts
        if not np.isfinite(pts).all():
            raise ParseError(f"non-finite coordinates in curve {cid}", path=str(path))
        try:
            poly = Polyline(pts)
        except ZeroLength:
            skipped += 1
            continue
        if len(poly) < MIN_CURVE_POINTS:
            skipped += 1
            continue
        curves.append(CurveRecord(cid, image_id, poly))
    if not curves:
        raise EmptyCorpus(f"no usable curves in {path}")
    return CurveSet(curves, skipped=skipped, source=str(path))


_CEM_FLOAT = re.compile(r"[-+]?\d+(?:\.\d*)?(?:[eE][-+]?\d+)?")


def _load_cem(path: Path) -> CurveSet:
    """Best-effort reader for contour-map annotation files.

    Accepts one ``.cem`` file or a directory of them; each file is treated
    as one image. Points are read from the numeric lines between contour
    begin/end markers.
    """
    if path.is_dir():
        files = sorted(path.glob("*.cem"))
        if not files:
            raise EmptyCorpus(f"no .cem files under {path}")
    else:
        files = [path]
    curves: list[CurveRecord] = []
    skipped = 0
    cid = 0
    for f in files:
        try:
            lines = f.read_text(errors="replace").splitlines()
        except OSError as e:
            raise ParseError(str(e), path=str(f)) from e
        image_id = f.stem
        in_contour = False
        pts: list[tuple[float, float]] = []
        for line in lines:
            s = line.strip()
            if not s or s.startswith("#") or s.startswith("%"):
                continue
            upper = s.upper()
            if "BEGIN" in upper and "CONTOUR" in upper:
                in_contour = True
                pts = []
                continue
            if "END" in upper and "CONTOUR" in upper:
                in_contour = False
                cid, added = _flush_contour(curves, pts, cid, image_id)
                skipped += 1 - added
                pts = []
                continue
            if not in_contour or "=" in s:
                continue
            nums = _CEM_FLOAT.findall(s)
            if len(nums) >= 2:
                pts.append((float(nums[0]), float(nums[1])))
        if in_contour:
            cid, added = _flush_contour(curves, pts, cid, image_id)
            skipped += 1 - added
    if not curves:
        raise EmptyCorpus(f"no usable contours in {path}")
    return CurveSet(curves, skipped=skipped, source=str(path))


def _flush_contour(curves, pts, cid, image_id):
    if len(pts) < 2:
        return cid, 0
    try:
        poly = Polyline(np.asarray(pts, dtype=float))
    except (ZeroLength, ValueError):
        return cid, 0
    if len(poly) < MIN_CURVE_POINTS:
        return cid, 0
    curves.append(CurveRecord(cid, image_id, poly))
    return cid + 1, 1


def write_curves(path, curves: Iterable[CurveRecord]) -> None:
    """Write curves in the canonical text format."""
    out = ["CURVES v1"]
    for rec in curves:
        pts = rec.points
        out.append(f"curve {rec.curve_id} {rec.image_id} {len(pts)}")
        out.extend(f"{float(x)!r} {float(y)!r}" for x, y in pts)
    Path(path).write_text("\n".join(out) + "\n")


def fragment_pairs(n_points: int, cfg: CorpusConfig) -> tuple[np.ndarray, np.ndarray]:
    """Index pairs (start, end) of every enumerable fragment of one curve."""
    span = cfg.min_fragment_points - 1
    starts = []
    ends = []
    for i in range(0, n_points, cfg.fragment_stride):
        js = np.arange(i + span, n_points, cfg.fragment_stride, dtype=np.int32)
        if len(js):
            starts.append(np.full(len(js), i, dtype=np.int32))
            ends.append(js)
    if not starts:
        return np.empty(0, dtype=np.int32), np.empty(0, dtype=np.int32)
    return np.concatenate(starts), np.concatenate(ends)


def enumerate_fragments(curves: Sequence[CurveRecord],
                        cfg: CorpusConfig = CorpusConfig()) -> Iterator[FragmentRef]:
    """Yield fragment references for all curves.

    With ``max_fragments`` set, a seeded reservoir sample of that size is
    yielded instead (order follows the reservoir, not the corpus).
    """
    def _all() -> Iterator[FragmentRef]:
        for rec in curves:
            i_arr, j_arr = fragment_pairs(len(rec.points), cfg)
            for i, j in zip(i_arr.tolist(), j_arr.tolist()):
                yield FragmentRef(rec.curve_id, i, j)

    if cfg.max_fragments is None:
        yield from _all()
        return
    rng = np.random.default_rng(cfg.seed)
    reservoir: list[FragmentRef] = []
    for t, ref in enumerate(_all()):
        if t < cfg.max_fragments:
            reservoir.append(ref)
        else:
            r = int(rng.integers(0, t + 1))
            if r < cfg.max_fragments:
                reservoir[r] = ref
    yield from reservoir


def window_angles(points: np.ndarray, k: int) -> np.ndarray:
    """Directed tangent angle of every k-point window of a curve.

    The angle is the principal axis of the window's points (total least
    squares), oriented along the window's closing step (its chord when the
    last two points coincide). The closing step keeps the orientation stable
    even where the window doubles back on itself, where the chord can sit
    perpendicular to the axis. One value per window start,
    ``len(points) - k + 1`` in all.
    """
    pts = np.asarray(points, dtype=float)
    n = len(pts)
    if n < k:
        raise ValueError(f"curve of {n} points has no {k}-point window")
    win = sliding_window_view(pts, (k, 2))[:, 0]
    mean = win.mean(axis=1)
    d = win - mean[:, None, :]
    sxx = np.einsum("wk,wk->w", d[:, :, 0], d[:, :, 0])
    syy = np.einsum("wk,wk->w", d[:, :, 1], d[:, :, 1])
    sxy = np.einsum("wk,wk->w", d[:, :, 0], d[:, :, 1])
    if np.any(sxx + syy <= 0.0):
        raise DegenerateTangent("tangent window with coincident points")
    beta = 0.5 * np.arctan2(2.0 * sxy, sxx - syy)
    close = pts[k - 1:] - pts[k - 2:n - 1]
    chord = pts[k - 1:] - pts[:n - k + 1]
    degen = np.hypot(close[:, 0], close[:, 1]) == 0.0
    ref = np.where(degen[:, None], chord, close)
    flip = np.cos(beta) * ref[:, 0] + np.sin(beta) * ref[:, 1] < 0.0
    beta = np.where(flip, beta + math.pi, beta)
    return np.mod(beta, TAU)


def endpoint_inducers(curve: CurveRecord, start: int, end: int,
                      window: int = 3) -> tuple[Inducer, Inducer]:
    """The two oriented endpoints of the fragment ``points[start..end]``.

    Tangents come from a total-least-squares fit over ``window`` points at
    each end and point into the fragment.
    """
    pts = curve.points
    n = len(pts)
    if not (0 <= start < end < n):
        raise ValueError(f"fragment ({start}, {end}) out of range for {n} points")
    if end - start + 1 < window:
        raise ValueError(f"fragment ({start}, {end}) shorter than tangent window")
    a1 = window_angles(pts[start:start + window], window)[0]
    a2 = window_angles(pts[end - window + 1:end + 1], window)[0]
    i1 = Inducer.of(pts[start, 0], pts[start, 1], a1)
    i2 = Inducer.of(pts[end, 0], pts[end, 1], a2 + math.pi)
    return i1, i2


def corpus_checksum(curves: Sequence[CurveRecord]) -> str:
    """SHA-256 over curve ids, image ids, and point data (little-endian)."""
    h = hashlib.sha256()
    for rec in curves:
        h.update(np.int64(rec.curve_id).astype("<i8").tobytes())
        h.update(rec.image_id.encode("utf-8") + b"\x00")
        h.update(np.int64(len(rec.points)).astype("<i8").tobytes())
        h.update(np.ascontiguousarray(rec.points, dtype="<f8").tobytes())
    return h.hexdigest()


def synth_corpus(family: str, count: int, seed: int = 0, **params) -> list[CurveRecord]:
    """Generate a deterministic synthetic corpus.

    Families: ``lines``, ``circular_arcs`` (log-uniform radius, uniform
    subtended angle, so the fragment population is scale-free), and
    ``smoothed_random_walks``.
    """
    try:
        gen = SYNTH_FAMILIES[family]
    except KeyError:
        raise ValueError(f"unknown family {family!r}; have {sorted(SYNTH_FAMILIES)}") from None
    if count < 1:
        raise ValueError("count must be positive")
    rng = np.random.default_rng(seed)
    per_image = int(params.pop("curves_per_image", 25))
    curves = []
    for idx in range(count):
        pts = gen(rng, **params)
        image_id = f"{family}-{idx // per_image:04d}"
        curves.append(CurveRecord(idx, image_id, Polyline(pts)))
    return curves


def _gen_line(rng, p_range=(6, 12), length_range=(10.0, 300.0), span=1000.0):
    n = int(rng.integers(p_range[0], p_range[1] + 1))
    length = math.exp(rng.uniform(math.log(length_range[0]), math.log(length_range[1])))
    ang = rng.uniform(0.0, TAU)
    origin = rng.uniform(0.0, span, size=2)
    t = np.linspace(0.0, length, n)
    return origin + t[:, None] * np.array([math.cos(ang), math.sin(ang)])


def _gen_arc(rng, radius_range=(8.0, 400.0), angle_range=(0.3, 5.5),
             p_range=(8, 14), span=1000.0):
    n = int(rng.integers(p_range[0], p_range[1] + 1))
    radius = math.exp(rng.uniform(math.log(radius_range[0]), math.log(radius_range[1])))
    sweep = rng.uniform(angle_range[0], angle_range[1])
    if rng.uniform() < 0.5:
        sweep = -sweep
    start = rng.uniform(0.0, TAU)
    center = rng.uniform(0.0, span, size=2)
    ang = start + np.linspace(0.0, sweep, n)
    return center + radius * np.stack([np.cos(ang), np.sin(ang)], axis=1)


def _gen_walk(rng, p_range=(20, 40), step_range=(2.0, 30.0), sigma=0.25,
              smooth_window=5, span=1000.0, hairpin_prob=0.04,
              hairpin_range=(2.4, 2.9)):
    """Smoothed heading walk with occasional sharp reversals.

    The gaussian part is low-pass filtered so curves stay gentle; rare
    hairpin turns mimic contours of thin structures doubling back, which
    is what makes away-facing endpoint configurations occur at all.
    """
    n = int(rng.integers(p_range[0], p_range[1] + 1))
    step = math.exp(rng.uniform(math.log(step_range[0]), math.log(step_range[1])))
    dth = rng.normal(0.0, sigma, size=n + smooth_window - 2)
    kernel = np.ones(smooth_window) / smooth_window
    dth = np.convolve(dth, kernel, mode="valid")
    pins = rng.random(len(dth)) < hairpin_prob
    signs = np.where(rng.random(len(dth)) < 0.5, -1.0, 1.0)
    dth = dth + pins * signs * rng.uniform(*hairpin_range, size=len(dth))
    theta = rng.uniform(0.0, TAU) + np.concatenate(([0.0], np.cumsum(dth)))
    origin = rng.uniform(0.0, span, size=2)
    steps = step * np.stack([np.cos(theta), np.sin(theta)], axis=1)
    return origin + np.concatenate([np.zeros((1, 2)), np.cumsum(steps, axis=0)])[:n]


SYNTH_FAMILIES = {
    "lines": _gen_line,
    "circular_arcs": _gen_arc,
    "smoothed_random_walks": _gen_walk,
}
