"""The 14-domain financial keyword list, substring matching, and labeling.

Matching is deliberately substring-based: keyword "logistic" hits the words
"logistics" and "logistical". The shipped list is curated so that no keyword
is a prefix of another anywhere in the union (e.g. it carries "cash" but not
"cashflow"), which keeps one word from generating two counts for the same
concept; the loader rejects lists violating that rule.
"""

import json
import math
import random
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from .errors import KeywordCollision, TopicTooSmall
from .textprep import Sentence

TOPIC_NAMES = (
    "Sales",
    "Cost",
    "Profit/Loss",
    "Operations",
    "Liquidity",
    "Investment",
    "Financing",
    "Litigation",
    "HR",
    "Regulation",
    "Accounting",
    "Energy",
    "ESG",
    "Covid-19",
)

DEFAULT_RELAXED_TOPICS = frozenset({"Litigation", "Covid-19"})


@dataclass(frozen=True)
class KeywordList:
    topics: dict[str, frozenset[str]]

    def domains(self) -> tuple[str, ...]:
        return tuple(self.topics)

    def all_keywords(self) -> frozenset[str]:
        out: set[str] = set()
        for kws in self.topics.values():
            out |= kws
        return frozenset(out)

    def matches_any(self, word: str) -> bool:
        word = word.lower()
        return any(k in word for k in self.all_keywords())


def _validate(topics: dict[str, frozenset[str]]) -> None:
    union = sorted(k for kws in topics.values() for k in kws)
    for name, kws in topics.items():
        for k in kws:
            if k != k.lower():
                raise KeywordCollision(f"{name}: keyword {k!r} is not lowercase")
    for i, a in enumerate(union):
        for b in union[i + 1 :]:
            if a != b and b.startswith(a):
                raise KeywordCollision(
                    f"keyword {a!r} is a prefix of {b!r}; curate the list"
                )
            if a == b:
                raise KeywordCollision(f"duplicate keyword {a!r}")


def load_keywords(path: str | Path | None = None) -> KeywordList:
    """Load a topic -> keywords map (JSON), defaulting to the bundled list.

    Validates the 14 expected domain names and the no-prefix rule.
    """
    if path is None:
        raw = resources.files("fintopics.data").joinpath("keywords.json").read_text("utf-8")
    else:
        raw = Path(path).read_text(encoding="utf-8")
    parsed = json.loads(raw)
    topics = {name: frozenset(words) for name, words in parsed.items()}
    if tuple(parsed) != TOPIC_NAMES:
        missing = set(TOPIC_NAMES) - set(parsed)
        extra = set(parsed) - set(TOPIC_NAMES)
        raise KeywordCollision(
            f"keyword list must cover exactly the 14 domains; missing={missing}, extra={extra}"
        )
    _validate(topics)
    return KeywordList(topics=topics)


def match_keywords(sentence_cleaned: str, keywords: KeywordList) -> dict[str, int]:
    """Count keyword hits per domain over the whitespace words of a sentence.

    A word matches a domain when any of its keywords is a substring of the
    word; each word contributes at most one count per domain.
    """
    counts: dict[str, int] = {}
    for word in sentence_cleaned.lower().split():
        for topic, kws in keywords.topics.items():
            if any(k in word for k in kws):
                counts[topic] = counts.get(topic, 0) + 1
    return counts


def build_keyword_sentence_matrix(
    sentences: list[Sentence], keywords: KeywordList
) -> dict[str, dict[str, int]]:
    """Sentence key -> per-domain match counts for a batch of sentences."""
    return {s.key: match_keywords(s.cleaned, keywords) for s in sentences}


def label_sentence(counts: dict[str, int]) -> str | None:
    """Label iff one domain has >= 2 hits and every other domain has 0."""
    hit = [t for t, c in counts.items() if c > 0]
    if len(hit) == 1 and counts[hit[0]] >= 2:
        return hit[0]
    return None


def dominant_topic(counts: dict[str, int]) -> str | None:
    """Domain with >= 2 hits while all others have <= 1; ambiguity -> None."""
    qualifying = [
        t
        for t, c in counts.items()
        if c >= 2 and all(o <= 1 for u, o in counts.items() if u != t)
    ]
    if len(qualifying) == 1:
        return qualifying[0]
    return None


@dataclass(frozen=True)
class LabeledSentence:
    key: str
    cleaned: str
    label: str


@dataclass
class LabeledDataset:
    train: list[LabeledSentence]
    test: list[LabeledSentence]
    per_topic_counts: dict[str, dict[str, int]] = field(default_factory=dict)


def _label_with_relaxation(
    counts: dict[str, int], relaxed_topics: frozenset[str]
) -> str | None:
    label = label_sentence(counts)
    if label is not None:
        return label
    # relaxed domains accept a single keyword and tolerate one foreign hit
    candidates = []
    for topic in relaxed_topics:
        own = counts.get(topic, 0)
        foreign = sum(c for t, c in counts.items() if t != topic)
        if own >= 1 and foreign <= 1:
            candidates.append(topic)
    if len(candidates) == 1:
        return candidates[0]
    return None


def build_labeled_dataset(
    sentences: list[Sentence],
    keywords: KeywordList,
    relaxed_topics: frozenset[str] = DEFAULT_RELAXED_TOPICS,
) -> list[LabeledSentence]:
    """Label cleaned sentences, deduplicating by cleaned text (first kept)."""
    seen: set[str] = set()
    out = []
    for sent in sentences:
        if sent.cleaned in seen:
            continue
        counts = match_keywords(sent.cleaned, keywords)
        label = _label_with_relaxation(counts, relaxed_topics)
        if label is None:
            continue
        seen.add(sent.cleaned)
        out.append(LabeledSentence(key=sent.key, cleaned=sent.cleaned, label=label))
    return out


def split_topicwise(
    dataset: list[LabeledSentence],
    train_fraction: float = 0.8,
    rng_seed: int = 0,
) -> LabeledDataset:
    """Seeded per-topic shuffle split; train receives ceil(fraction * n)."""
    by_topic: dict[str, list[LabeledSentence]] = {}
    for sent in dataset:
        by_topic.setdefault(sent.label, []).append(sent)
    for topic, sents in by_topic.items():
        if len(sents) < 2:
            raise TopicTooSmall(f"topic {topic!r} has only {len(sents)} sentence(s)")
    rng = random.Random(rng_seed)
    train: list[LabeledSentence] = []
    test: list[LabeledSentence] = []
    counts: dict[str, dict[str, int]] = {}
    for topic in sorted(by_topic):
        sents = list(by_topic[topic])
        rng.shuffle(sents)
        n_train = math.ceil(train_fraction * len(sents))
        train.extend(sents[:n_train])
        test.extend(sents[n_train:])
        counts[topic] = {"train": n_train, "test": len(sents) - n_train}
    return LabeledDataset(train=train, test=test, per_topic_counts=counts)


def write_labeled(sentences: list[LabeledSentence], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for s in sentences:
            fh.write(
                json.dumps(
                    {"key": s.key, "cleaned": s.cleaned, "label": s.label},
                    sort_keys=True,
                )
                + "\n"
            )


def read_labeled(path: str | Path) -> list[LabeledSentence]:
    out = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                out.append(LabeledSentence(**json.loads(line)))
    return out
