"""Mean-curve reconstruction between two oriented endpoints.

The completion for a gap is the pointwise average of every corpus
fragment whose relative endpoint configuration matches the query's,
after canonicalization, fine alignment, and uniform arc-length
resampling. Sparse configurations are boosted by splitting the gap at
the provisional curve's midpoint and reconstructing the halves.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Callable, Sequence

import numpy as np

from .baseline import complete_gap
from .errors import (CoincidentInducers, DegenerateTangent, InsufficientScales,
                     NoPrior, NoSamples, RecursionExhausted)
from .geometry import Inducer, Polyline, Similarity2, resample_points
from .index import (CanonicalFragment, FragmentIndex, QueryTolerances,
                    RelativeConfiguration, canonicalize)

_MIDWAY_MODES = ("auto", "force", "never")


@dataclass(frozen=True)
class MeanFlags:
    scale_invariant_used: bool = False
    midway_extended: bool = False
    fallback_used: bool = False


@dataclass(frozen=True, eq=False)
class MeanCurve:
    """Pointwise mean of the matched fragments, in the canonical frame.

    ``points[0]`` is the origin and ``points[-1]`` lands on the query
    offset; ``covariance`` holds one 2x2 scatter matrix per sample point.
    """

    points: np.ndarray
    m: int
    covariance: np.ndarray
    flags: MeanFlags = MeanFlags()

    @property
    def n(self) -> int:
        return len(self.points)

    @property
    def per_point_mean(self) -> np.ndarray:
        return self.points


@dataclass(frozen=True)
class ReconstructOptions:
    n: int = 16
    scale_invariant: bool = True
    tolerances: QueryTolerances | None = None
    midway_threshold: int = 400
    midway: str = "auto"
    max_depth: int = 3
    fallback: bool = True

    def __post_init__(self):
        if self.n < 4:
            raise ValueError("need at least 4 resample points")
        if self.midway not in _MIDWAY_MODES:
            raise ValueError(f"midway must be one of {_MIDWAY_MODES}")
        if self.midway_threshold < 0 or self.max_depth < 0:
            raise ValueError("negative midway_threshold or max_depth")


@dataclass(frozen=True, eq=False)
class ReconstructionResult:
    curve: Polyline
    mean: MeanCurve | None
    m: int
    flags: MeanFlags
    fallback_method: str | None
    match_indices: np.ndarray


def mean_curve(matches: Sequence[tuple[CanonicalFragment, Similarity2]],
               n: int = 16, *,
               points_of: Callable[..., np.ndarray]) -> MeanCurve:
    """Average the matched fragments pointwise in the canonical frame.

    ``points_of`` resolves a fragment reference to its image-frame
    points. Each fragment is canonicalized, fine-aligned, resampled to
    ``n`` uniform arc-length points, then averaged; the per-point
    covariance is the population scatter at each sample position.
    """
    if not matches:
        raise NoSamples("mean curve needs at least one matched fragment")
    stack = np.empty((len(matches), n, 2))
    for k, (frag, align) in enumerate(matches):
        pts = np.asarray(points_of(frag.ref), dtype=float)
        stack[k] = resample_points(
            align.transform_points(frag.to_canonical.transform_points(pts)), n)
    return _mean_of_stack(stack)


def _mean_of_stack(stack: np.ndarray) -> MeanCurve:
    mean = stack.mean(axis=0)
    dev = stack - mean
    cov = np.einsum("kni,knj->nij", dev, dev) / len(stack)
    return MeanCurve(points=mean, m=len(stack), covariance=cov)


def _snapped(pts: np.ndarray, i1: Inducer, i2: Inducer) -> Polyline:
    pts = np.array(pts, dtype=float)
    pts[0] = (i1.position.x, i1.position.y)
    pts[-1] = (i2.position.x, i2.position.y)
    return Polyline(pts)


def _midpoint_pose(curve: Polyline, n: int) -> tuple[float, float, float]:
    """Arc-length midpoint of a curve and the tangent angle there, the
    latter by central difference one sample spacing wide."""
    total = curve.length
    mid = curve.point_at(0.5 * total)
    h = total / (n - 1)
    a = curve.point_at(max(0.5 * total - h, 0.0))
    b = curve.point_at(min(0.5 * total + h, total))
    dx = float(b[0] - a[0])
    dy = float(b[1] - a[1])
    if dx == 0.0 and dy == 0.0:
        raise DegenerateTangent("flat midpoint neighborhood")
    return float(mid[0]), float(mid[1]), math.atan2(dy, dx)


def _query_indices(index: FragmentIndex, p: RelativeConfiguration,
                   opts: ReconstructOptions) -> np.ndarray:
    if opts.scale_invariant:
        return index.scale_invariant_indices(p, opts.tolerances)
    return index.same_scale_indices(p, opts.tolerances)


def _node(index: FragmentIndex, i1: Inducer, i2: Inducer,
          opts: ReconstructOptions, depth: int, mode: str, ctx: dict):
    """One reconstruction node; returns (curve, mean, m, extended, indices)."""
    p, to_canon = canonicalize(i1, i2)
    idx = _query_indices(index, p, opts)
    m = len(idx)
    if m == 0:
        if not opts.fallback:
            raise NoPrior(f"no matching fragments for {p} and fallback disabled")
        ctx["fallback"] = True
        poly, method = complete_gap(i1, i2, opts.n)
        if ctx["method"] is None:
            ctx["method"] = method
        return _snapped(poly.points, i1, i2), None, 0, False, idx

    mc = _mean_of_stack(index.aligned_resampled(idx, p, opts.n))
    direct = _snapped(to_canon.inverse().transform_points(mc.points), i1, i2)
    want_split = mode == "force" or (mode == "auto" and m < opts.midway_threshold)
    if want_split and depth < opts.max_depth:
        try:
            split = _split_through_midpoint(index, i1, i2, direct, opts, depth, ctx)
        except (CoincidentInducers, DegenerateTangent):
            split = None
        if split is not None:
            return split, mc, m, True, idx
    return direct, mc, m, False, idx


def _split_through_midpoint(index: FragmentIndex, i1: Inducer, i2: Inducer,
                            provisional: Polyline, opts: ReconstructOptions,
                            depth: int, ctx: dict) -> Polyline:
    mx, my, th = _midpoint_pose(provisional, opts.n)
    into_left = Inducer.of(mx, my, th + math.pi)
    into_right = Inducer.of(mx, my, th)
    left, *_ = _node(index, i1, into_left, opts, depth + 1, "auto", ctx)
    right, *_ = _node(index, into_right, i2, opts, depth + 1, "auto", ctx)
    pts = np.concatenate([left.points, right.points[1:]])
    return _snapped(resample_points(pts, opts.n), i1, i2)


def reconstruct(index: FragmentIndex, i1: Inducer, i2: Inducer,
                opts: ReconstructOptions = ReconstructOptions()) -> ReconstructionResult:
    """Reconstruct the gap between two inducers (tangents point into it).

    Queries the index scale-invariantly by default, averages the matches
    in the canonical frame, splits the gap at the provisional midpoint
    when fewer than ``midway_threshold`` fragments matched, and maps the
    result back so its endpoints equal the inducer positions exactly.
    """
    ctx = {"fallback": False, "method": None}
    curve, mc, m, extended, idx = _node(index, i1, i2, opts, 0, opts.midway, ctx)
    flags = MeanFlags(scale_invariant_used=opts.scale_invariant,
                      midway_extended=extended, fallback_used=ctx["fallback"])
    if mc is not None:
        mc = replace(mc, flags=flags)
    return ReconstructionResult(curve=curve, mean=mc, m=m, flags=flags,
                                fallback_method=ctx["method"], match_indices=idx)


def midway_extend(index: FragmentIndex, i1: Inducer, i2: Inducer,
                  provisional: MeanCurve,
                  opts: ReconstructOptions = ReconstructOptions(),
                  depth: int = 0) -> Polyline:
    """Split the gap at the provisional mean's midpoint and reconstruct
    both halves, concatenated and resampled to ``opts.n`` points."""
    if depth > opts.max_depth:
        raise RecursionExhausted(f"midway depth {depth} > {opts.max_depth}")
    if provisional.m < 1:
        raise NoSamples("midway extension needs a sampled provisional curve")
    _, to_canon = canonicalize(i1, i2)
    image = _snapped(to_canon.inverse().transform_points(provisional.points), i1, i2)
    ctx = {"fallback": False, "method": None}
    return _split_through_midpoint(index, i1, i2, image, opts, depth, ctx)


@dataclass(frozen=True, eq=False)
class ScaleInvarianceReport:
    """Per-scale center-point statistics for one relative configuration.

    ``mu_s`` rows and ``sigma_s`` entries are NaN for scales with no
    matches; the aggregate scalars are computed over non-empty scales.
    """

    config: RelativeConfiguration
    scales: tuple[float, ...]
    mu_s: np.ndarray
    sigma_s: np.ndarray
    counts: np.ndarray
    std_of_mu: float
    mean_of_sigma: float


def scale_invariance_analysis(index: FragmentIndex, p: RelativeConfiguration,
                              scales: Sequence[float],
                              tol: QueryTolerances | None = None) -> ScaleInvarianceReport:
    """Probe how the fragment population for ``p`` varies across scales.

    For each scale the configuration's offset is rescaled to that length
    and matched at its own scale; every matched fragment contributes its
    arc-length center point, normalized by the inducer distance. The
    spread of the per-scale mean centers (``std_of_mu``) is the
    scale-dependence measure; ``mean_of_sigma`` averages the per-scale
    RMS scatter.
    """
    scales = tuple(float(s) for s in scales)
    if any(not (math.isfinite(s) and s > 0.0) for s in scales):
        raise ValueError("scales must be positive and finite")
    base = p.scaled(1.0 / p.norm)
    S = len(scales)
    mu = np.full((S, 2), np.nan)
    sigma = np.full(S, np.nan)
    counts = np.zeros(S, dtype=np.int64)
    for k, s in enumerate(scales):
        q = base.scaled(s)
        idx = index.same_scale_indices(q, tol)
        counts[k] = len(idx)
        if len(idx) == 0:
            continue
        centers = index.aligned_center_points(idx, q) / q.norm
        mu[k] = centers.mean(axis=0)
        d = centers - mu[k]
        sigma[k] = math.sqrt(float(np.mean(d[:, 0] ** 2 + d[:, 1] ** 2)))
    ok = counts > 0
    if int(ok.sum()) < 2:
        raise InsufficientScales(
            f"only {int(ok.sum())} of {S} scales have matches")
    mu_ok = mu[ok]
    mu_bar = mu_ok.mean(axis=0)
    dd = mu_ok - mu_bar
    std_of_mu = math.sqrt(float(np.mean(dd[:, 0] ** 2 + dd[:, 1] ** 2)))
    mean_of_sigma = float(np.mean(sigma[ok]))
    return ScaleInvarianceReport(config=base, scales=scales, mu_s=mu,
                                 sigma_s=sigma, counts=counts,
                                 std_of_mu=std_of_mu, mean_of_sigma=mean_of_sigma)
