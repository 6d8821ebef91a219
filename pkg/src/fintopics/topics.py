"""Topic representations via class-based tf-idf, plus the NMF baseline.

c-tf-idf weighs token importance within a document class (cluster) instead of
within single documents: W[t, c] = tf[t, c] * log(1 + A / f_t), with A the
average token count per class and f_t the token's total count across classes.
Seed tokens from the keyword list get their final weight boosted so topic
representations lean toward the economic domains.
"""

from dataclasses import dataclass, field

import numpy as np

from .density import NOISE, ClusterAssignment
from .errors import BadRank, NegativeInput
from .keywords import KeywordList
from .textprep import TokenDoc


@dataclass
class ClassTermCounts:
    counts: np.ndarray  # (n_classes, n_tokens)
    tokens: list[str]
    classes: list[int]


@dataclass
class TopicRepresentation:
    """Per-cluster ranked (token, weight) lists; `short` flags clusters that
    could not fill the requested k."""

    topics: dict[int, list[tuple[str, float]]]
    short: set[int] = field(default_factory=set)

    def words(self, cluster: int) -> list[str]:
        return [t for t, _ in self.topics[cluster]]


@dataclass
class NmfFactors:
    w: np.ndarray  # term-topic, nonnegative
    h: np.ndarray  # topic-document, nonnegative
    k: int
    residuals: list[float]


def build_class_counts(
    token_docs: list[TokenDoc],
    assignment: ClusterAssignment,
    stopwords: frozenset[str] = frozenset(),
    min_df: int = 10,
) -> ClassTermCounts:
    """Token counts per cluster; noise rows, stopwords, and tokens appearing
    in fewer than min_df documents are excluded."""
    if len(token_docs) != len(assignment.labels):
        raise ValueError("token docs and labels are misaligned")
    df: dict[str, int] = {}
    for doc in token_docs:
        for tok in set(doc.tokens):
            df[tok] = df.get(tok, 0) + 1
    vocab = sorted(
        t for t, d in df.items() if d >= min_df and t not in stopwords
    )
    index = {t: i for i, t in enumerate(vocab)}
    classes = sorted({int(l) for l in assignment.labels if l != NOISE})
    class_row = {c: i for i, c in enumerate(classes)}
    counts = np.zeros((len(classes), len(vocab)))
    for doc, label in zip(token_docs, assignment.labels):
        if label == NOISE:
            continue
        row = class_row[int(label)]
        for tok in doc.tokens:
            col = index.get(tok)
            if col is not None:
                counts[row, col] += 1.0
    return ClassTermCounts(counts=counts, tokens=vocab, classes=classes)


def ctfidf(
    class_counts: ClassTermCounts,
    seed_words: KeywordList | None = None,
    seed_multiplier: float = 50.0,
    reduce_frequent: bool = False,
) -> np.ndarray:
    """Class-based tf-idf weights, shape (n_classes, n_tokens).

    The idf part always uses the raw counts; `reduce_frequent` dampens only
    the tf factor with sqrt(tf * avg_class_total / f_t), pulling down terms
    frequent across many classes. Seed boosting multiplies the final weight
    of tokens containing a keyword substring and touches nothing else.
    """
    counts = class_counts.counts
    if counts.size == 0:
        raise ValueError("empty class counts")
    n_classes = counts.shape[0]
    f_t = counts.sum(axis=0)
    avg_per_class = counts.sum() / n_classes
    tf = counts
    if reduce_frequent:
        with np.errstate(divide="ignore", invalid="ignore"):
            tf = np.sqrt(counts * np.where(f_t > 0, avg_per_class / f_t, 0.0))
    with np.errstate(divide="ignore"):
        idf = np.where(f_t > 0, np.log1p(avg_per_class / np.maximum(f_t, 1e-300)), 0.0)
    weights = tf * idf
    if seed_words is not None and seed_multiplier != 1.0:
        union = seed_words.all_keywords()
        boost = np.array(
            [any(k in tok for k in union) for tok in class_counts.tokens]
        )
        weights = np.where(boost, weights * seed_multiplier, weights)
    return weights


def top_k_words(
    weights: np.ndarray, class_counts: ClassTermCounts, k: int = 5
) -> TopicRepresentation:
    """Largest-weight tokens per class; ties break lexicographically."""
    topics: dict[int, list[tuple[str, float]]] = {}
    short: set[int] = set()
    for row, cluster in enumerate(class_counts.classes):
        scored = [
            (tok, float(weights[row, col]))
            for col, tok in enumerate(class_counts.tokens)
            if weights[row, col] > 0.0
        ]
        scored.sort(key=lambda tw: (-tw[1], tw[0]))
        if len(scored) < k:
            short.add(cluster)
        topics[cluster] = scored[:k]
    return TopicRepresentation(topics=topics, short=short)


def nmf_fit(
    a: np.ndarray,
    k: int = 14,
    max_iters: int = 500,
    tol: float = 1e-7,
    seed: int = 0,
) -> NmfFactors:
    """Frobenius NMF of a document-term matrix by multiplicative updates.

    Internally factors the term-document transpose M ~ W @ H so that W is
    term-topic and H is topic-document. The residual after every full
    update pair is recorded; the history never increases.
    """
    a = np.asarray(a, dtype=np.float64)
    if np.any(a < 0):
        raise NegativeInput("NMF input must be nonnegative")
    if not (0 < k < min(a.shape)):
        raise BadRank(f"rank {k} invalid for shape {a.shape}")
    m = a.T  # (terms, docs)
    eps = 1e-10
    rng = np.random.default_rng(seed)
    w = rng.uniform(0.0, 1.0, size=(m.shape[0], k))
    h = rng.uniform(0.0, 1.0, size=(k, m.shape[1]))
    residuals = [float(np.linalg.norm(m - w @ h))]
    for _ in range(max_iters):
        h *= (w.T @ m) / (w.T @ w @ h + eps)
        w *= (m @ h.T) / (w @ h @ h.T + eps)
        residual = float(np.linalg.norm(m - w @ h))
        prev = residuals[-1]
        residuals.append(residual)
        if prev > 0 and (prev - residual) / prev < tol:
            break
    return NmfFactors(w=w, h=h, k=k, residuals=residuals)


def nmf_topic_words(
    factors: NmfFactors, tokens: list[str], k: int = 5
) -> TopicRepresentation:
    """Top-k tokens per NMF topic from the term-topic matrix columns."""
    topics: dict[int, list[tuple[str, float]]] = {}
    short: set[int] = set()
    for topic in range(factors.k):
        column = factors.w[:, topic]
        scored = [(tokens[i], float(column[i])) for i in np.nonzero(column > 0)[0]]
        scored.sort(key=lambda tw: (-tw[1], tw[0]))
        if len(scored) < k:
            short.add(topic)
        topics[topic] = scored[:k]
    return TopicRepresentation(topics=topics, short=short)


def grid_search_k(
    a: np.ndarray,
    tokens: list[str],
    candidate_ks: list[int],
    scorer,
    top_k: int = 5,
    seed: int = 0,
    max_iters: int = 500,
) -> tuple[int, dict[int, float]]:
    """Fit NMF per candidate rank (same seed), score each model's top words
    with `scorer`, and return the argmax; ties go to the smallest k."""
    if not candidate_ks:
        raise ValueError("no candidate ranks")
    scores: dict[int, float] = {}
    for k in sorted(candidate_ks):
        factors = nmf_fit(a, k=k, max_iters=max_iters, seed=seed)
        rep = nmf_topic_words(factors, tokens, k=top_k)
        scores[k] = float(scorer(rep))
    best_k = max(sorted(scores), key=lambda k: scores[k])
    # max() keeps the first maximum, i.e. the smallest k on ties
    return best_k, scores
