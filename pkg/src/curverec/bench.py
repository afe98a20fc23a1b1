"""Reconstruction benchmark: train/test split, sampling, and scoring.

Ground-truth fragments are drawn from test images only, stratified so
their scales (inducer gaps) are uniformly represented. A method is
scored by its relative reconstruction error, the discrete Frechet
distance to the ground truth divided by the gap; accuracy curves sweep
the error threshold over [0, 1] in steps of 0.01.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np

from .corpus import CorpusConfig, CurveRecord, FragmentRef, endpoint_inducers, enumerate_fragments
from .errors import (BinUnderflow, CoincidentInducers, CurverecError,
                     DegenerateTangent, TooFewImages)
from .geometry import Inducer, Polyline, discrete_frechet, is_difficult_configuration, resample_points

N_THRESHOLDS = 101


@dataclass(frozen=True)
class SplitSpec:
    seed: int = 0
    test_fraction: float = 0.10

    def __post_init__(self):
        if not 0.0 < self.test_fraction < 1.0:
            raise ValueError("test_fraction must be in (0, 1)")


def split_corpus(curves: Sequence[CurveRecord],
                 spec: SplitSpec = SplitSpec()) -> tuple[list[CurveRecord], list[CurveRecord]]:
    """Partition curves into (train, test) by image, seeded shuffle then
    prefix split, rounding the test image count half up (at least 1)."""
    images = sorted({rec.image_id for rec in curves})
    if len(images) < 2:
        raise TooFewImages(f"need at least 2 images, got {len(images)}")
    rng = np.random.default_rng(spec.seed)
    order = rng.permutation(len(images))
    n_test = int(math.floor(len(images) * spec.test_fraction + 0.5))
    n_test = min(max(n_test, 1), len(images) - 1)
    test_images = {images[i] for i in order[:n_test]}
    train = [rec for rec in curves if rec.image_id not in test_images]
    test = [rec for rec in curves if rec.image_id in test_images]
    return train, test


@dataclass(frozen=True, eq=False)
class BenchmarkRecord:
    record_id: int
    ref: FragmentRef
    image_id: str
    i1: Inducer
    i2: Inducer
    scale: float
    gt: np.ndarray
    difficult: bool


@dataclass(frozen=True, eq=False)
class BenchmarkSet:
    records: tuple[BenchmarkRecord, ...]
    n: int
    sampling: str
    seed: int

    @property
    def size(self) -> int:
        return len(self.records)

    def __iter__(self):
        return iter(self.records)

    def __len__(self):
        return len(self.records)


def _candidates(curves: Sequence[CurveRecord], config: CorpusConfig):
    """Yield (curve, ref, i1, i2, scale) for every usable test fragment."""
    by_id = {rec.curve_id: rec for rec in curves}
    for ref in enumerate_fragments(curves, config):
        rec = by_id[ref.curve_id]
        try:
            i1, i2 = endpoint_inducers(rec, ref.start, ref.end,
                                       window=config.tangent_window)
        except (DegenerateTangent, CoincidentInducers):
            continue
        gap = math.hypot(i2.position.x - i1.position.x,
                         i2.position.y - i1.position.y)
        if gap == 0.0:
            continue
        yield rec, ref, i1, i2, gap


def _stratified(cands: list, count: int, bins: int, seed: int, n: int,
                label: str) -> BenchmarkSet:
    if count <= 0:
        raise ValueError("count must be positive")
    if bins <= 0:
        raise ValueError("bins must be positive")
    if not cands:
        raise BinUnderflow("no candidate fragments to sample from")
    scales = np.array([c[4] for c in cands])
    lo, hi = float(scales.min()), float(scales.max())
    if bins > 1 and hi > lo:
        edges = np.linspace(lo, hi, bins + 1)
        which = np.clip(np.searchsorted(edges, scales, side="right") - 1, 0, bins - 1)
    else:
        bins = 1
        which = np.zeros(len(cands), dtype=np.int64)
    base, rem = divmod(count, bins)
    rng = np.random.default_rng(seed)
    chosen = []
    for b in range(bins):
        want = base + (1 if b < rem else 0)
        members = np.flatnonzero(which == b)
        if len(members) < want:
            raise BinUnderflow(
                f"scale bin {b} ({lo + (hi - lo) * b / bins:.6g}..) has "
                f"{len(members)} fragments, needs {want}")
        chosen.extend(members[rng.choice(len(members), size=want, replace=False)])
    records = []
    for rid, ci in enumerate(chosen):
        rec, ref, i1, i2, gap = cands[ci]
        gt = resample_points(rec.points[ref.start:ref.end + 1], n)
        records.append(BenchmarkRecord(
            record_id=rid, ref=ref, image_id=rec.image_id, i1=i1, i2=i2,
            scale=gap, gt=gt, difficult=is_difficult_configuration(i1, i2)))
    sampling = f"{label} bins={bins} scale_range=[{lo:.6g},{hi:.6g}]"
    return BenchmarkSet(records=tuple(records), n=n, sampling=sampling, seed=seed)


def sample_benchmark(test_curves: Sequence[CurveRecord], count: int,
                     scale_bins: int = 20, seed: int = 0, n: int = 16,
                     config: CorpusConfig = CorpusConfig()) -> BenchmarkSet:
    """Sample ``count`` ground-truth fragments, uniformly by scale."""
    cands = list(_candidates(test_curves, config))
    return _stratified(cands, count, scale_bins, seed, n, "uniform-by-scale")


def sample_difficult(test_curves: Sequence[CurveRecord], count: int = 1000,
                     seed: int = 0, scale_bins: int = 1, n: int = 16,
                     config: CorpusConfig = CorpusConfig()) -> BenchmarkSet:
    """Sample only configurations whose chord-frame angles make the gap
    bend away from both tangents (the unstable regime)."""
    cands = [c for c in _candidates(test_curves, config)
             if is_difficult_configuration(c[2], c[3])]
    return _stratified(cands, count, scale_bins, seed, n, "difficult")


def _as_points(curve) -> np.ndarray:
    if isinstance(curve, Polyline):
        return curve.points
    return np.asarray(curve, dtype=float).reshape(-1, 2)


def rre(gt, recon, i1: Inducer, i2: Inducer, n: int = 16) -> float:
    """Relative reconstruction error: discrete Frechet distance between
    the n-point resamplings, divided by the inducer gap."""
    gap = math.hypot(i2.position.x - i1.position.x,
                     i2.position.y - i1.position.y)
    if gap == 0.0:
        raise CoincidentInducers("zero inducer gap in error normalization")
    a = resample_points(_as_points(gt), n)
    b = resample_points(_as_points(recon), n)
    return discrete_frechet(a, b) / gap


@dataclass(frozen=True, eq=False)
class EvalResult:
    thresholds: np.ndarray
    rre: dict
    arc: dict
    auc: dict
    failures: dict
    size: int


def evaluate(bench: BenchmarkSet,
             methods: Mapping[str, Callable[[Inducer, Inducer], object]]) -> EvalResult:
    """Score each method on every record; failures count as infinite
    error so a method cannot improve by refusing hard cases."""
    thresholds = np.arange(N_THRESHOLDS) / 100.0
    rre_per = {}
    failures = {}
    for name, fn in methods.items():
        vals = np.full(bench.size, np.inf)
        failed = 0
        for k, rec in enumerate(bench.records):
            try:
                out = fn(rec.i1, rec.i2)
                vals[k] = rre(rec.gt, out, rec.i1, rec.i2, n=bench.n)
            except Exception:
                failed += 1
        rre_per[name] = vals
        failures[name] = failed
    arc = {name: (vals[:, None] <= thresholds[None, :]).mean(axis=0)
           for name, vals in rre_per.items()}
    auc = {name: float(a.mean()) for name, a in arc.items()}
    return EvalResult(thresholds=thresholds, rre=rre_per, arc=arc, auc=auc,
                      failures=failures, size=bench.size)


def check_train_test_hygiene(index, test_curves: Iterable[CurveRecord]) -> None:
    """Raise if any curve referenced by the index comes from a test image."""
    test_ids = {rec.curve_id for rec in test_curves}
    test_images = {rec.image_id for rec in test_curves}
    for rec in index.curves:
        if rec.curve_id in test_ids or rec.image_id in test_images:
            raise CurverecError(
                f"index contains curve {rec.curve_id} from test image {rec.image_id}")
