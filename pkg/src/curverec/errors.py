"""Exception types shared across the package."""


class CurverecError(Exception):
    """Base class for all errors raised by this package."""


class EmptyInput(CurverecError):
    """An operation received an empty sequence where points were required."""


class ZeroLength(CurverecError):
    """A polyline degenerated to fewer than two distinct points."""


class ParseError(CurverecError):
    """A corpus file could not be parsed."""

    def __init__(self, message, path=None, line=None):
        loc = ""
        if path is not None:
            loc = f"{path}:"
            if line is not None:
                loc += f"{line}:"
            loc += " "
        super().__init__(loc + message)
        self.path = path
        self.line = line


class EmptyCorpus(CurverecError):
    """No usable curves were found in a corpus."""


class DegenerateTangent(CurverecError):
    """A tangent window was too degenerate to orient."""


class CoincidentInducers(CurverecError):
    """Two inducer positions coincide; no relative configuration exists."""


class NoSamples(CurverecError):
    """A mean curve was requested from an empty match list."""


class NoPrior(CurverecError):
    """No fragment evidence was found and fallback completion is disabled."""


class RecursionExhausted(CurverecError):
    """Midway extension hit its depth limit without producing a curve."""


class NoConvergence(CurverecError):
    """The clothoid boundary solver failed to converge."""


class OutOfRange(CurverecError):
    """An arc-length parameter lies outside a segment's domain."""


class TooFewImages(CurverecError):
    """A corpus split needs at least two annotated images."""


class BinUnderflow(CurverecError):
    """A benchmark scale bin has fewer fragments than requested."""


class InsufficientScales(CurverecError):
    """Scale-invariance analysis needs matches in at least two scale buckets."""


class SnapshotError(CurverecError):
    """An index snapshot file is malformed or of an unknown version."""


class ChecksumMismatch(SnapshotError):
    """A snapshot was loaded against a corpus it was not built from."""
