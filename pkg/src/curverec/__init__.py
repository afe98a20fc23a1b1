"""Curve completion from natural fragment statistics.

Reconstructs the missing curve between two oriented endpoints as the
pointwise mean of matching corpus fragments, with cross-scale pooling
and midpoint splitting for sparse configurations, an Euler-spiral
baseline, and a Frechet-distance reconstruction benchmark.
"""

from .baseline import (ClothoidSegment, biarc_complete, complete_gap,
                       eval_clothoid, euler_spiral_complete, euler_spiral_solve,
                       sample_clothoid)
from .bench import (BenchmarkRecord, BenchmarkSet, EvalResult, SplitSpec,
                    evaluate, rre, sample_benchmark, sample_difficult,
                    split_corpus)
from .corpus import (CorpusConfig, CurveRecord, CurveSet, FragmentRef,
                     corpus_checksum, endpoint_inducers, enumerate_fragments,
                     fragment_pairs, load_curves, synth_corpus, window_angles,
                     write_curves)
from .errors import (BinUnderflow, ChecksumMismatch, CoincidentInducers,
                     CurverecError, DegenerateTangent, EmptyCorpus, EmptyInput,
                     InsufficientScales, NoConvergence, NoPrior, NoSamples,
                     OutOfRange, ParseError, RecursionExhausted, SnapshotError,
                     TooFewImages, ZeroLength)
from .geometry import (Inducer, Point2, Polyline, Similarity2,
                       angular_distance, apply_similarity, chord_frame_angles,
                       discrete_frechet, is_difficult_configuration,
                       resample_arclength, wrap_angle)
from .index import (CanonicalFragment, FragmentIndex, QueryTolerances,
                    RelativeConfiguration, build_index, canonicalize)
from .reconstruct import (MeanCurve, MeanFlags, ReconstructOptions,
                          ReconstructionResult, ScaleInvarianceReport,
                          mean_curve, midway_extend, reconstruct,
                          scale_invariance_analysis)

__version__ = "0.1.0"

__all__ = [
    "BenchmarkRecord", "BenchmarkSet", "BinUnderflow", "CanonicalFragment",
    "ChecksumMismatch", "ClothoidSegment", "CoincidentInducers", "CorpusConfig",
    "CurveRecord", "CurveSet", "CurverecError", "DegenerateTangent",
    "EmptyCorpus", "EmptyInput", "EvalResult", "FragmentIndex", "FragmentRef",
    "Inducer", "InsufficientScales", "MeanCurve", "MeanFlags", "NoConvergence",
    "NoPrior", "NoSamples", "OutOfRange", "ParseError", "Point2", "Polyline",
    "QueryTolerances", "ReconstructOptions", "ReconstructionResult",
    "RecursionExhausted", "RelativeConfiguration", "ScaleInvarianceReport",
    "Similarity2", "SnapshotError", "SplitSpec", "TooFewImages", "ZeroLength",
    "angular_distance", "apply_similarity", "biarc_complete",
    "build_index", "canonicalize", "chord_frame_angles", "complete_gap",
    "corpus_checksum", "discrete_frechet", "endpoint_inducers",
    "enumerate_fragments", "fragment_pairs",
    "eval_clothoid", "euler_spiral_complete", "euler_spiral_solve", "evaluate",
    "is_difficult_configuration", "load_curves", "mean_curve", "midway_extend",
    "reconstruct", "resample_arclength", "rre", "sample_benchmark",
    "sample_clothoid", "sample_difficult", "scale_invariance_analysis",
    "split_corpus", "synth_corpus", "window_angles", "wrap_angle",
    "write_curves",
]
