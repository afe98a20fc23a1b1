"""Command-line interface: synth, ingest, reconstruct, bench, analyze-scale.

Every command is deterministic given its flags and seeds, and every
output artifact echoes the configuration that produced it. Exit codes:
0 success, 2 usage, 3 data or file problems, 4 numeric failures.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from . import corpus as corpus_mod
from .baseline import complete_gap
from .bench import (SplitSpec, evaluate, sample_benchmark, sample_difficult,
                    split_corpus)
from .corpus import CorpusConfig, load_curves, synth_corpus, write_curves
from .errors import (BinUnderflow, ChecksumMismatch, CoincidentInducers,
                     CurverecError, DegenerateTangent, EmptyCorpus, EmptyInput,
                     InsufficientScales, NoConvergence, NoPrior, NoSamples,
                     OutOfRange, ParseError, RecursionExhausted, SnapshotError,
                     TooFewImages, ZeroLength)
from .geometry import Inducer
from .index import FragmentIndex, QueryTolerances, build_index, canonicalize
from .reconstruct import (ReconstructOptions, reconstruct,
                          scale_invariance_analysis)

SNAPSHOT_ENV = "CURVEREC_SNAPSHOT"

_DATA_ERRORS = (ParseError, EmptyCorpus, EmptyInput, ZeroLength, SnapshotError,
                ChecksumMismatch, TooFewImages, BinUnderflow,
                CoincidentInducers, OutOfRange)
_NUMERIC_ERRORS = (NoConvergence, NoPrior, NoSamples, RecursionExhausted,
                   InsufficientScales, DegenerateTangent)


@dataclass(frozen=True)
class RunConfig:
    """Knobs echoed into every report for reproducibility."""

    corpus: str | None
    format: str
    n: int
    t1_rel_dist: float
    t1_angle: float
    t2_orient: float
    midway_threshold: int
    seed: int
    outdir: str | None

    def to_dict(self) -> dict:
        return asdict(self)


def _fmt(v: float) -> str:
    if math.isinf(v):
        return "inf"
    return f"{v:.12g}"


def _parse_inducer(text: str) -> Inducer:
    parts = text.split(",")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError(f"expected x,y,theta, got {text!r}")
    try:
        x, y, theta = (float(p) for p in parts)
    except ValueError as e:
        raise argparse.ArgumentTypeError(f"bad inducer {text!r}") from e
    return Inducer.of(x, y, theta)


def _parse_scales(text: str) -> list[float]:
    try:
        vals = [float(p) for p in text.split(",") if p.strip()]
    except ValueError as e:
        raise argparse.ArgumentTypeError(f"bad scale list {text!r}") from e
    if not vals:
        raise argparse.ArgumentTypeError("empty scale list")
    return vals


def _load_config_file(path: str) -> dict:
    """key=value per line; '#' starts a comment; values typed leniently."""
    out = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ParseError(f"expected key=value", path=path, line=lineno)
        key, _, val = line.partition("=")
        key = key.strip().replace("-", "_")
        val = val.strip()
        if val.lower() in ("true", "false"):
            out[key] = val.lower() == "true"
            continue
        for conv in (int, float):
            try:
                out[key] = conv(val)
                break
            except ValueError:
                pass
        else:
            out[key] = val
    return out


def _add_tolerance_flags(sub):
    sub.add_argument("--t1-rel-dist", type=float, default=0.05,
                     help="relative offset-distance tolerance")
    sub.add_argument("--t1-angle", type=float, default=0.05,
                     help="offset-direction tolerance (radians)")
    sub.add_argument("--t2-orient", type=float, default=0.10,
                     help="second-tangent orientation tolerance (radians)")


def _add_corpus_flags(sub):
    sub.add_argument("--min-points", type=int, default=4,
                     help="minimum points per fragment")
    sub.add_argument("--tangent-window", type=int, default=3,
                     help="points per endpoint tangent fit")
    sub.add_argument("--stride", type=int, default=1,
                     help="fragment enumeration stride")
    sub.add_argument("--max-fragments", type=int, default=None,
                     help="reservoir-sample the enumeration down to this many")


def build_parser() -> tuple[argparse.ArgumentParser, dict]:
    parser = argparse.ArgumentParser(
        prog="curverec",
        description="Curve completion from natural fragment statistics.")
    parser.add_argument("--config", default=None,
                        help="key=value file with flag defaults")
    subs = parser.add_subparsers(dest="command", required=True)
    registry = {}

    p = subs.add_parser("synth", help="generate a synthetic corpus")
    p.add_argument("--family", required=True,
                   choices=sorted(corpus_mod.SYNTH_FAMILIES))
    p.add_argument("--count", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    registry["synth"] = p

    p = subs.add_parser("ingest", help="build an index snapshot from a corpus")
    p.add_argument("--corpus", required=True)
    p.add_argument("--format", choices=("curves", "cem"), default="curves")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    _add_corpus_flags(p)
    _add_tolerance_flags(p)
    registry["ingest"] = p

    p = subs.add_parser("reconstruct", help="reconstruct the gap between two inducers")
    p.add_argument("--snapshot", default=None,
                   help=f"index snapshot (default ${SNAPSHOT_ENV})")
    p.add_argument("--i1", type=_parse_inducer, required=True, metavar="X,Y,THETA")
    p.add_argument("--i2", type=_parse_inducer, required=True, metavar="X,Y,THETA")
    p.add_argument("--n", type=int, default=16)
    p.add_argument("--same-scale", "--no-scale-invariance", action="store_true",
                   help="match only at the query scale (no cross-scale pooling)")
    p.add_argument("--midway", choices=("auto", "force", "never"), default="auto")
    p.add_argument("--midway-threshold", type=int, default=400)
    p.add_argument("--max-depth", type=int, default=3)
    p.add_argument("--no-fallback", action="store_true",
                   help="fail instead of using the spiral baseline when nothing matches")
    p.add_argument("--json", default=None, help="write the record here instead of stdout")
    p.add_argument("--svg", default=None, help="also draw the reconstruction")
    p.add_argument("--euler", action="store_true",
                   help="overlay the spiral baseline in the drawing")
    _add_tolerance_flags(p)
    registry["reconstruct"] = p

    p = subs.add_parser("bench", help="run the reconstruction benchmark")
    p.add_argument("--corpus", required=True)
    p.add_argument("--format", choices=("curves", "cem"), default="curves")
    p.add_argument("--outdir", required=True)
    p.add_argument("--count", type=int, default=5000)
    p.add_argument("--bins", type=int, default=20)
    p.add_argument("--difficult-count", type=int, default=1000,
                   help="0 disables the difficult subset")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--test-fraction", type=float, default=0.10)
    p.add_argument("--n", type=int, default=16)
    p.add_argument("--midway-threshold", type=int, default=400)
    p.add_argument("--same-scale", "--no-scale-invariance", action="store_true")
    _add_corpus_flags(p)
    _add_tolerance_flags(p)
    registry["bench"] = p

    p = subs.add_parser("analyze-scale", help="map scale stability over configurations")
    p.add_argument("--snapshot", default=None,
                   help=f"index snapshot (default ${SNAPSHOT_ENV})")
    p.add_argument("--outdir", required=True)
    p.add_argument("--grid", type=int, default=12,
                   help="grid resolution per chord-frame angle")
    p.add_argument("--scales", type=_parse_scales, default=None,
                   help="comma-separated scale list (default: corpus percentiles)")
    _add_tolerance_flags(p)
    registry["analyze-scale"] = p

    return parser, registry


def _apply_config_file(argv, parser, registry):
    probe = argparse.ArgumentParser(add_help=False)
    probe.add_argument("--config", default=None)
    known, _ = probe.parse_known_args(argv)
    if known.config is None:
        return
    values = _load_config_file(known.config)
    all_dests = {a.dest for sub in registry.values() for a in sub._actions}
    unknown = sorted(set(values) - all_dests)
    if unknown:
        parser.error(f"unknown config key(s): {', '.join(unknown)}")
    for sub in registry.values():
        dests = {a.dest for a in sub._actions}
        sub.set_defaults(**{k: v for k, v in values.items() if k in dests})


def _tolerances(args) -> QueryTolerances:
    return QueryTolerances(t1_rel_dist=args.t1_rel_dist, t1_angle=args.t1_angle,
                           t2_orient=args.t2_orient)


def _corpus_config(args) -> CorpusConfig:
    return CorpusConfig(min_fragment_points=args.min_points,
                        tangent_window=args.tangent_window,
                        fragment_stride=args.stride,
                        max_fragments=args.max_fragments,
                        seed=args.seed)


def _snapshot_path(args, parser) -> str:
    path = args.snapshot or os.environ.get(SNAPSHOT_ENV)
    if not path:
        parser.error(f"no --snapshot given and ${SNAPSHOT_ENV} unset")
    return path


def cmd_synth(args) -> int:
    curves = synth_corpus(args.family, args.count, seed=args.seed)
    write_curves(args.out, curves)
    print(f"wrote {len(curves)} {args.family} curves to {args.out}")
    return 0


def cmd_ingest(args) -> int:
    cs = load_curves(args.corpus, fmt=args.format)
    index = build_index(list(cs), _corpus_config(args), _tolerances(args))
    index.save(args.out)
    stats = {
        "corpus": str(args.corpus),
        "curves": len(cs),
        "skipped_curves": cs.skipped,
        "fragments": index.n_fragments,
        "skipped_coincident": index.skipped_coincident,
        "bucket_occupancy": index.bucket_occupancy(),
        "tolerances": asdict(_tolerances(args)),
        "corpus_config": asdict(_corpus_config(args)),
    }
    sidecar = str(args.out) + ".stats.json"
    Path(sidecar).write_text(json.dumps(stats, indent=2, sort_keys=True))
    print(f"indexed {index.n_fragments} fragments from {len(cs)} curves "
          f"-> {args.out} (+ stats sidecar)")
    return 0


def cmd_reconstruct(args, parser) -> int:
    index = FragmentIndex.load(_snapshot_path(args, parser))
    opts = ReconstructOptions(n=args.n, scale_invariant=not args.same_scale,
                              tolerances=_tolerances(args),
                              midway_threshold=args.midway_threshold,
                              midway=args.midway, max_depth=args.max_depth,
                              fallback=not args.no_fallback)
    result = reconstruct(index, args.i1, args.i2, opts)
    record = {
        "i1": {"x": args.i1.position.x, "y": args.i1.position.y,
               "theta": args.i1.theta},
        "i2": {"x": args.i2.position.x, "y": args.i2.position.y,
               "theta": args.i2.theta},
        "n": opts.n,
        "m": result.m,
        "flags": asdict(result.flags),
        "fallback_method": result.fallback_method,
        "tolerances": asdict(opts.tolerances),
        "midway": opts.midway,
        "midway_threshold": opts.midway_threshold,
        "points": [[float(x), float(y)] for x, y in result.curve.points],
    }
    text = json.dumps(record, indent=2, sort_keys=True)
    if args.json:
        Path(args.json).write_text(text)
    else:
        print(text)
    if args.svg:
        from . import figures
        euler = complete_gap(args.i1, args.i2, opts.n)[0] if args.euler else None
        figures.save_reconstruction(args.svg, args.i1, args.i2, result.curve,
                                    result.m, euler=euler)
    return 0


def _write_bench_csv(path: Path, records, rre_mean, rre_euler) -> None:
    lines = ["id,scale,rre_mean_curve,rre_euler,flags"]
    for k, rec in enumerate(records):
        flags = "difficult" if rec.difficult else ""
        lines.append(f"{rec.record_id},{_fmt(rec.scale)},"
                     f"{_fmt(rre_mean[k])},{_fmt(rre_euler[k])},{flags}")
    path.write_text("\n".join(lines) + "\n")


def cmd_bench(args) -> int:
    outdir = Path(args.outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    cs = load_curves(args.corpus, fmt=args.format)
    train, test = split_corpus(list(cs), SplitSpec(seed=args.seed,
                                                   test_fraction=args.test_fraction))
    cfg = _corpus_config(args)
    tol = _tolerances(args)
    index = build_index(train, cfg, tol)
    opts = ReconstructOptions(n=args.n, scale_invariant=not args.same_scale,
                              tolerances=tol,
                              midway_threshold=args.midway_threshold)
    methods = {
        "mean_curve": lambda i1, i2: reconstruct(index, i1, i2, opts).curve,
        "euler_spiral": lambda i1, i2: complete_gap(i1, i2, args.n)[0],
    }

    bench_full = sample_benchmark(test, args.count, scale_bins=args.bins,
                                  seed=args.seed, n=args.n, config=cfg)
    full = evaluate(bench_full, methods)

    from . import figures
    prefix = outdir / f"bench_seed{args.seed}"
    _write_bench_csv(Path(f"{prefix}_full.csv"), bench_full.records,
                     full.rre["mean_curve"], full.rre["euler_spiral"])
    figures.save_arc_curves(full, f"{prefix}_arc.svg",
                            title="accuracy vs threshold (full set)")

    run = RunConfig(corpus=str(args.corpus), format=args.format, n=args.n,
                    t1_rel_dist=args.t1_rel_dist, t1_angle=args.t1_angle,
                    t2_orient=args.t2_orient,
                    midway_threshold=args.midway_threshold,
                    seed=args.seed, outdir=str(outdir))
    summary = {
        "config": run.to_dict(),
        "corpus_config": asdict(cfg),
        "test_fraction": args.test_fraction,
        "train_curves": len(train),
        "test_curves": len(test),
        "index_fragments": index.n_fragments,
        "scale_invariant": not args.same_scale,
        "full": {
            "size": bench_full.size,
            "sampling": bench_full.sampling,
            "auc": full.auc,
            "failures": full.failures,
            "arc": {k: list(v) for k, v in full.arc.items()},
        },
    }

    diff_requested = args.difficult_count
    if diff_requested > 0:
        pool = [rec for rec in _difficult_pool(test, cfg)]
        take = min(diff_requested, len(pool))
        if take == 0:
            summary["difficult"] = {"size": 0,
                                    "note": "no difficult configurations in test set"}
        else:
            bench_diff = sample_difficult(test, count=take, seed=args.seed,
                                          n=args.n, config=cfg)
            diff = evaluate(bench_diff, methods)
            _write_bench_csv(Path(f"{prefix}_difficult.csv"), bench_diff.records,
                             diff.rre["mean_curve"], diff.rre["euler_spiral"])
            figures.save_arc_curves(diff, f"{prefix}_arc_difficult.svg",
                                    title="accuracy vs threshold (difficult set)")
            summary["difficult"] = {
                "size": bench_diff.size,
                "requested": diff_requested,
                "sampling": bench_diff.sampling,
                "auc": diff.auc,
                "failures": diff.failures,
                "arc": {k: list(v) for k, v in diff.arc.items()},
            }

    Path(f"{prefix}_summary.json").write_text(
        json.dumps(summary, indent=2, sort_keys=True))
    aucs = ", ".join(f"{k}={v:.4f}" for k, v in sorted(full.auc.items()))
    print(f"benchmark done: {bench_full.size} records, AUC {aucs}; "
          f"reports under {outdir}")
    return 0


def _difficult_pool(test, cfg):
    from .bench import _candidates
    from .geometry import is_difficult_configuration

    for c in _candidates(test, cfg):
        if is_difficult_configuration(c[2], c[3]):
            yield c


def cmd_analyze_scale(args, parser) -> int:
    outdir = Path(args.outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    index = FragmentIndex.load(_snapshot_path(args, parser))
    tol = _tolerances(args)
    if args.scales is not None:
        scales = [float(s) for s in args.scales]
    else:
        norms = index.fragment_norms
        if len(norms) == 0:
            raise EmptyCorpus("snapshot has no fragments to derive scales from")
        scales = [float(v) for v in np.percentile(norms, [20, 40, 60, 80])]
    grid = args.grid
    if grid < 2:
        parser.error("--grid must be at least 2")
    a1s = np.linspace(0.0, math.pi, grid)
    a2s = np.linspace(0.0, math.pi, grid)
    std_map = np.full((grid, grid), np.nan)
    sig_map = np.full((grid, grid), np.nan)
    min_counts = np.zeros((grid, grid), dtype=np.int64)
    rows = ["a1,a2,std_of_mu,mean_of_sigma,min_count,counts"]
    for i, a1 in enumerate(a1s):
        for j, a2 in enumerate(a2s):
            p, _ = canonicalize(Inducer.of(0.0, 0.0, a1), Inducer.of(1.0, 0.0, a2))
            counts_txt = ""
            try:
                rep = scale_invariance_analysis(index, p, scales, tol)
                std_map[i, j] = rep.std_of_mu
                sig_map[i, j] = rep.mean_of_sigma
                min_counts[i, j] = int(rep.counts.min())
                counts_txt = ";".join(str(int(c)) for c in rep.counts)
            except InsufficientScales:
                pass
            rows.append(f"{_fmt(a1)},{_fmt(a2)},{_fmt(std_map[i, j])},"
                        f"{_fmt(sig_map[i, j])},{min_counts[i, j]},{counts_txt}")
    (outdir / f"scale_analysis_grid{grid}.csv").write_text("\n".join(rows) + "\n")
    meta = {
        "scales": scales,
        "grid": grid,
        "tolerances": asdict(tol),
        "snapshot": _snapshot_path(args, parser),
    }
    (outdir / f"scale_analysis_grid{grid}.json").write_text(
        json.dumps(meta, indent=2, sort_keys=True))
    from . import figures
    figures.save_scale_heatmap(outdir / "std_of_mu.svg", a1s, a2s, std_map,
                               "spread of per-scale mean centers")
    figures.save_scale_heatmap(outdir / "mean_of_sigma.svg", a1s, a2s, sig_map,
                               "average per-scale scatter")
    done = int(np.isfinite(std_map).sum())
    print(f"analyzed {done}/{grid * grid} grid cells at scales "
          f"{', '.join(f'{s:.4g}' for s in scales)}; reports under {outdir}")
    return 0


def _dispatch(args, parser) -> int:
    if args.command == "synth":
        return cmd_synth(args)
    if args.command == "ingest":
        return cmd_ingest(args)
    if args.command == "reconstruct":
        return cmd_reconstruct(args, parser)
    if args.command == "bench":
        return cmd_bench(args)
    if args.command == "analyze-scale":
        return cmd_analyze_scale(args, parser)
    parser.error(f"unknown command {args.command!r}")
    return 2


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    parser, registry = build_parser()
    try:
        _apply_config_file(argv, parser, registry)
        args = parser.parse_args(argv)
        return _dispatch(args, parser)
    except _NUMERIC_ERRORS as e:
        print(f"curverec: {e}", file=sys.stderr)
        return 4
    except _DATA_ERRORS as e:
        print(f"curverec: {e}", file=sys.stderr)
        return 3
    except CurverecError as e:
        print(f"curverec: {e}", file=sys.stderr)
        return 3
    except OSError as e:
        print(f"curverec: {e}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
