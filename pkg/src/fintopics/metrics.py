"""Evaluation suite: sliding-window NPMI coherence, topic-precision,
intra/intertopic similarity, and precision weighting.

Window statistics are computed from per-word interval unions: an occurrence
at position p is visible to window starts [p - W + 1, p], so the number of
windows containing a word is the size of the union of those clamped
intervals, and pair co-occurrence is the size of the intersection of two
unions. This matches full window enumeration exactly while staying linear
in the number of occurrences.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DivideByZeroPrecision,
    EmptyCorpus,
    TooFewTopics,
    ZeroVector,
)
from .keywords import KeywordList, dominant_topic, match_keywords
from .textprep import TokenDoc
from .topics import TopicRepresentation


@dataclass(frozen=True)
class CoherenceConfig:
    window_size: int = 20
    top_k: int = 5
    epsilon: float = 1e-12

    def __post_init__(self):
        if self.window_size < 2:
            raise ValueError("window_size must be >= 2")
        if self.top_k < 2:
            raise ValueError("top_k must be >= 2")


@dataclass
class CoherenceScores:
    per_topic: dict[int, float]
    mean: float
    missing_words: frozenset[str]


def _merge_intervals(intervals: list[tuple[int, int]]) -> list[tuple[int, int]]:
    merged: list[tuple[int, int]] = []
    for lo, hi in intervals:
        if merged and lo <= merged[-1][1] + 1:
            merged[-1] = (merged[-1][0], max(merged[-1][1], hi))
        else:
            merged.append((lo, hi))
    return merged


def _union_size(intervals: list[tuple[int, int]]) -> int:
    return sum(hi - lo + 1 for lo, hi in intervals)


def _intersection_size(
    a: list[tuple[int, int]], b: list[tuple[int, int]]
) -> int:
    i = j = total = 0
    while i < len(a) and j < len(b):
        lo = max(a[i][0], b[j][0])
        hi = min(a[i][1], b[j][1])
        if lo <= hi:
            total += hi - lo + 1
        if a[i][1] < b[j][1]:
            i += 1
        else:
            j += 1
    return total


def window_counts(
    corpus: list[TokenDoc], words: set[str], window_size: int
) -> tuple[dict[str, int], dict[tuple[str, str], int], int]:
    """Window-containment counts for tracked words and all their pairs.

    Windows of `window_size` tokens slide with step 1; a document shorter
    than the window forms a single truncated window.
    """
    word_windows: dict[str, int] = {w: 0 for w in words}
    pair_windows: dict[tuple[str, str], int] = {}
    total = 0
    for doc in corpus:
        t = len(doc.tokens)
        if t == 0:
            continue
        n_starts = max(1, t - window_size + 1)
        total += n_starts
        positions: dict[str, list[int]] = {}
        for pos, tok in enumerate(doc.tokens):
            if tok in words:
                positions.setdefault(tok, []).append(pos)
        intervals = {
            w: _merge_intervals(
                [
                    (max(0, p - window_size + 1), min(n_starts - 1, p))
                    for p in plist
                ]
            )
            for w, plist in positions.items()
        }
        for w, ivals in intervals.items():
            word_windows[w] += _union_size(ivals)
        present = sorted(intervals)
        for i, wa in enumerate(present):
            for wb in present[i + 1 :]:
                overlap = _intersection_size(intervals[wa], intervals[wb])
                if overlap:
                    key = (wa, wb)
                    pair_windows[key] = pair_windows.get(key, 0) + overlap
    return word_windows, pair_windows, total


def npmi_pair(
    p_i: float, p_j: float, p_ij: float, epsilon: float
) -> float:
    numerator = math.log((p_ij + epsilon) / (p_i * p_j))
    denominator = -math.log(p_ij + epsilon)
    return numerator / denominator


def npmi_coherence(
    topics: TopicRepresentation,
    corpus: list[TokenDoc],
    cfg: CoherenceConfig = CoherenceConfig(),
) -> CoherenceScores:
    """Mean NPMI over every unordered pair of each topic's words, then the
    unweighted mean over topics. Pairs with a word absent from the corpus
    score -1 and the word is flagged."""
    if not corpus or all(len(d.tokens) == 0 for d in corpus):
        raise EmptyCorpus("coherence needs a non-empty tokenized corpus")
    tracked = {w for c in topics.topics for w in topics.words(c)[: cfg.top_k]}
    word_w, pair_w, total = window_counts(corpus, tracked, cfg.window_size)
    missing = {w for w in tracked if word_w[w] == 0}
    per_topic: dict[int, float] = {}
    for cluster in topics.topics:
        words = topics.words(cluster)[: cfg.top_k]
        pair_scores = []
        for i, wa in enumerate(words):
            for wb in words[i + 1 :]:
                if wa in missing or wb in missing:
                    pair_scores.append(-1.0)
                    continue
                key = (wa, wb) if (wa, wb) in pair_w else (wb, wa)
                co = pair_w.get(key, 0)
                score = npmi_pair(
                    word_w[wa] / total,
                    word_w[wb] / total,
                    co / total,
                    cfg.epsilon,
                )
                pair_scores.append(score)
        per_topic[cluster] = (
            sum(pair_scores) / len(pair_scores) if pair_scores else 0.0
        )
    mean = sum(per_topic.values()) / len(per_topic) if per_topic else 0.0
    return CoherenceScores(
        per_topic=per_topic, mean=mean, missing_words=frozenset(missing)
    )


@dataclass
class PrecisionScores:
    per_topic: dict[int, float]
    domain_of: dict[int, str | None]
    per_domain: dict[str, float]
    model: float


def topic_precision(
    topics: TopicRepresentation, keywords: KeywordList
) -> PrecisionScores:
    """Keyword-domain precision of each topic and the 14-domain model average.

    A topic's dominant domain needs two keyword hits while every other domain
    stays at one or below; without a dominant domain the topic scores 0.
    Words outside the keyword list are ignored. Domains captured by no topic
    contribute 0 to the model average.
    """
    per_topic: dict[int, float] = {}
    domain_of: dict[int, str | None] = {}
    captured: dict[str, list[float]] = {}
    for cluster in topics.topics:
        words = topics.words(cluster)
        counts = match_keywords(" ".join(words), keywords)
        dominant = dominant_topic(counts)
        domain_of[cluster] = dominant
        if dominant is None:
            per_topic[cluster] = 0.0
            continue
        tp = fp = 0
        for word in words:
            hits = match_keywords(word, keywords)
            if hits.get(dominant):
                tp += 1
            elif hits:
                fp += 1
        precision = tp / (tp + fp) if tp + fp else 0.0
        per_topic[cluster] = precision
        captured.setdefault(dominant, []).append(precision)
    per_domain = {
        name: (sum(captured[name]) / len(captured[name]) if name in captured else 0.0)
        for name in keywords.domains()
    }
    model = sum(per_domain.values()) / len(per_domain)
    return PrecisionScores(
        per_topic=per_topic,
        domain_of=domain_of,
        per_domain=per_domain,
        model=model,
    )


def _centroids(
    embeddings: np.ndarray, labels: np.ndarray
) -> dict[int, np.ndarray]:
    out: dict[int, np.ndarray] = {}
    for label in sorted({int(l) for l in labels if l >= 0}):
        members = embeddings[labels == label].astype(np.float64)
        out[label] = members.mean(axis=0)
    return out


def intratopic_similarity(
    embeddings: np.ndarray, labels: np.ndarray
) -> tuple[dict[int, float], float]:
    """Mean member-to-centroid cosine per topic, then the unweighted mean
    over topics. Noise rows (label < 0) are excluded."""
    labels = np.asarray(labels)
    cents = _centroids(np.asarray(embeddings), labels)
    if not cents:
        raise TooFewTopics("no non-noise topic present")
    per_topic: dict[int, float] = {}
    for label, centroid in cents.items():
        cnorm = np.linalg.norm(centroid)
        if cnorm == 0.0:
            raise ZeroVector(f"topic {label} centroid is the zero vector")
        members = np.asarray(embeddings)[labels == label].astype(np.float64)
        mnorm = np.linalg.norm(members, axis=1)
        if np.any(mnorm == 0.0):
            raise ZeroVector(f"topic {label} contains a zero member vector")
        cosines = members @ centroid / (mnorm * cnorm)
        per_topic[label] = float(np.mean(cosines))
    model = float(np.mean(list(per_topic.values())))
    return per_topic, model


def intertopic_similarity(embeddings: np.ndarray, labels: np.ndarray) -> float:
    """Mean pairwise centroid cosine over the strict upper triangle."""
    cents = _centroids(np.asarray(embeddings), np.asarray(labels))
    if len(cents) < 2:
        raise TooFewTopics(f"need >= 2 topics, have {len(cents)}")
    mat = np.stack([cents[label] for label in sorted(cents)])
    norms = np.linalg.norm(mat, axis=1)
    if np.any(norms == 0.0):
        raise ZeroVector("a topic centroid is the zero vector")
    sims = (mat @ mat.T) / np.outer(norms, norms)
    upper = sims[np.triu_indices(len(cents), k=1)]
    return float(np.mean(upper))


def weight_by_precision(raw: float, precision: float, kind: str) -> float:
    """Multiply coherence/intratopic by precision; divide intertopic by it."""
    if not (0.0 <= precision <= 1.0):
        raise ValueError(f"precision {precision} outside [0, 1]")
    if kind == "multiply":
        return raw * precision
    if kind == "divide":
        if precision == 0.0:
            raise DivideByZeroPrecision(
                "zero topic-precision: unsuitable for financial analysis"
            )
        return raw / precision
    raise ValueError(f"unknown weighting kind {kind!r}")


@dataclass
class MetricsReport:
    npmi_raw: float
    npmi_weighted: float
    topic_precision: float
    intratopic_raw: float
    intratopic_weighted: float
    intertopic_raw: float
    intertopic_weighted: float
    outlier_count: int
    per_topic: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {
            "npmi_raw": self.npmi_raw,
            "npmi_weighted": self.npmi_weighted,
            "topic_precision": self.topic_precision,
            "intratopic_raw": self.intratopic_raw,
            "intratopic_weighted": self.intratopic_weighted,
            "intertopic_raw": self.intertopic_raw,
            "intertopic_weighted": self.intertopic_weighted,
            "outlier_count": self.outlier_count,
            "per_topic": self.per_topic,
        }


def format_cell(weighted: float, raw: float) -> str:
    """Report table cell: weighted first, raw in parentheses."""
    if math.isinf(weighted):
        return f"inf ({raw:.3f})"
    return f"{weighted:.3f} ({raw:.3f})"


def build_report(
    topics: TopicRepresentation,
    corpus: list[TokenDoc],
    keywords: KeywordList,
    embeddings: np.ndarray,
    labels: np.ndarray,
    outlier_count: int,
    cfg: CoherenceConfig = CoherenceConfig(),
) -> MetricsReport:
    """Assemble the full metric suite for one model run."""
    coherence = npmi_coherence(topics, corpus, cfg)
    precision = topic_precision(topics, keywords)
    intra_per_topic, intra = intratopic_similarity(embeddings, labels)
    try:
        inter = intertopic_similarity(embeddings, labels)
    except TooFewTopics:
        inter = float("nan")
    p = precision.model
    try:
        inter_weighted = weight_by_precision(inter, p, "divide")
    except DivideByZeroPrecision:
        inter_weighted = float("inf")
    return MetricsReport(
        npmi_raw=coherence.mean,
        npmi_weighted=weight_by_precision(coherence.mean, p, "multiply"),
        topic_precision=p,
        intratopic_raw=intra,
        intratopic_weighted=weight_by_precision(intra, p, "multiply"),
        intertopic_raw=inter,
        intertopic_weighted=inter_weighted,
        outlier_count=outlier_count,
        per_topic={
            "coherence": coherence.per_topic,
            "precision": precision.per_topic,
            "domain": precision.domain_of,
            "per_domain_precision": precision.per_domain,
            "intratopic": intra_per_topic,
            "coherence_missing_words": sorted(coherence.missing_words),
        },
    )
