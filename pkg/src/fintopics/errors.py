"""Exception hierarchy shared across the pipeline stages."""


class FintopicsError(Exception):
    """Base class for all package-specific errors."""


# corpus ingestion
class NoItem7Found(FintopicsError):
    """Filing body contains no Item 7 heading preceding an Item 8 heading."""


class NoItem8AfterItem7(FintopicsError):
    """Item 7 heading found, but no Item 8 heading follows it."""


class DegenerateDistribution(UserWarning):
    """Zero word-count variance: the z-score filter keeps every document."""


# text preparation
class EmptyVocabulary(FintopicsError):
    """Token-extremes filtering removed every token."""


# keyword labeling
class KeywordCollision(FintopicsError):
    """A keyword is a prefix of another keyword in the loaded list."""


class TopicTooSmall(FintopicsError):
    """A topic has fewer than two labeled sentences; cannot split."""


# similarity objective
class InvalidParams(FintopicsError):
    """Scale/margin outside the valid range (scale > 0, 0 < margin < 0.5)."""


class StepOutOfRange(FintopicsError):
    """Curriculum step outside [0, total_steps]."""


# embedding I/O
class BadMagic(FintopicsError):
    """Vector file does not start with the FTSVEC01 magic bytes."""


class TruncatedFile(FintopicsError):
    """Vector file ends before the declared payload is complete."""


class NaNDetected(FintopicsError):
    """Vector data contains NaN or Inf entries."""


class ZeroVector(FintopicsError):
    """Operation undefined for a zero-norm vector."""


# reduction and clustering
class RankDeficient(FintopicsError):
    """Too few rows for the requested number of components."""


class DimensionMismatch(FintopicsError):
    """External reduced vectors do not match the configured dimension."""


class TooFewPoints(FintopicsError):
    """Fewer rows than min_samples; density clustering undefined."""


# topic modeling
class NegativeInput(FintopicsError):
    """NMF input matrix contains negative entries."""


class BadRank(FintopicsError):
    """Requested factorization rank exceeds the matrix dimensions."""


# metrics
class EmptyCorpus(FintopicsError):
    """Coherence requested against an empty reference corpus."""


class TooFewTopics(FintopicsError):
    """Intertopic similarity needs at least two topics."""


class DivideByZeroPrecision(FintopicsError):
    """Intertopic weighting with zero topic-precision: reported as +inf."""


# orchestration
class StageDependencyMissing(FintopicsError):
    """A requested stage needs outputs of a stage that has not run."""


class ConfigInvalid(FintopicsError):
    """Pipeline configuration failed validation."""
