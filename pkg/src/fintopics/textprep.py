"""Sentence segmentation, cleaning, token normalization, phrase joining,
token-extremes filtering, and the corpus-level cosine document filter.

Everything here is deterministic and pure: corpus statistics (document
frequencies, phrase counts) are computed in one pass, then per-document
transforms apply independently.
"""

import json
import math
import re
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np

from .errors import EmptyVocabulary
from .ingest import Document, FunnelReport


@dataclass(frozen=True)
class Sentence:
    doc_id: str
    index: int
    raw: str
    cleaned: str
    word_count: int

    @property
    def key(self) -> str:
        return f"{self.doc_id}:{self.index}"


@dataclass(frozen=True)
class TokenDoc:
    key: str
    tokens: tuple[str, ...]


@dataclass
class Vocabulary:
    """Per-token stats: document frequency, collection frequency, and a
    tf-idf score (cf * log(N/df)) normalized by the corpus maximum."""

    entries: dict[str, tuple[int, int, float]]

    def __contains__(self, token: str) -> bool:
        return token in self.entries


_ABBREVIATIONS = {
    "u.s", "u.k", "u.s.a", "e.g", "i.e", "etc", "inc", "corp", "co", "ltd",
    "llc", "l.p", "no", "mr", "mrs", "ms", "dr", "jr", "sr", "st", "vs",
    "approx", "dept", "est", "fig", "sec", "jan", "feb", "mar", "apr", "jun",
    "jul", "aug", "sep", "sept", "oct", "nov", "dec",
}

_BOUNDARY_RE = re.compile(r"[.!?]+(?=\s)")
_HARD_BREAK_RE = re.compile(r"\n\s*\n")

_CONTRACTIONS = {
    "aren't": "are not", "can't": "cannot", "couldn't": "could not",
    "didn't": "did not", "doesn't": "does not", "don't": "do not",
    "hadn't": "had not", "hasn't": "has not", "haven't": "have not",
    "isn't": "is not", "it'll": "it will", "it's": "it is",
    "let's": "let us", "mightn't": "might not", "mustn't": "must not",
    "needn't": "need not", "shan't": "shall not", "shouldn't": "should not",
    "that's": "that is", "there's": "there is", "they're": "they are",
    "they've": "they have", "wasn't": "was not", "we'll": "we will",
    "we're": "we are", "we've": "we have", "weren't": "were not",
    "what's": "what is", "who's": "who is", "won't": "will not",
    "wouldn't": "would not", "you're": "you are", "you've": "you have",
    "i'm": "i am",
}
_CONTRACTION_RE = re.compile(
    r"\b(" + "|".join(re.escape(c) for c in _CONTRACTIONS) + r")\b",
    re.IGNORECASE,
)
_URL_RE = re.compile(r"(?<!\S)(?:http|www\.)\S*", re.IGNORECASE)
_TOKEN_RE = re.compile(r"[a-z]+(?:[_&-][a-z]+)*")


def load_stopwords(path: str | Path | None = None) -> frozenset[str]:
    if path is None:
        raw = resources.files("fintopics.data").joinpath("stopwords.txt").read_text("utf-8")
    else:
        raw = Path(path).read_text(encoding="utf-8")
    return frozenset(w.strip() for w in raw.splitlines() if w.strip())


def load_lemmas(path: str | Path | None = None) -> dict[str, str]:
    if path is None:
        raw = resources.files("fintopics.data").joinpath("lemmas.tsv").read_text("utf-8")
    else:
        raw = Path(path).read_text(encoding="utf-8")
    table = {}
    for line in raw.splitlines():
        line = line.strip()
        if line:
            form, lemma = line.split("\t")
            table[form] = lemma
    return table


def _expand_contraction(match: re.Match) -> str:
    original = match.group(0)
    expansion = _CONTRACTIONS[original.lower()]
    if original[0].isupper():
        return expansion[0].upper() + expansion[1:]
    return expansion


def clean_sentence(raw: str) -> str:
    """Expand contractions, drop URL tokens and digits, collapse whitespace.

    Idempotent: a cleaned sentence passes through unchanged.
    """
    text = _CONTRACTION_RE.sub(_expand_contraction, raw)
    text = _URL_RE.sub(" ", text)
    text = re.sub(r"[0-9]", "", text)
    return " ".join(text.split())


def _is_boundary(text: str, punct_start: int, punct_end: int) -> bool:
    # token immediately before the punctuation, e.g. "U.S" in "U.S. sales"
    before = text[:punct_start]
    prev_token = before.split()[-1] if before.split() else ""
    prev_token = (prev_token + text[punct_start:punct_end]).rstrip(".!?").lower()
    if prev_token in _ABBREVIATIONS:
        return False
    if len(prev_token) == 1 and prev_token.isalpha():
        return False  # initials such as "J. Smith"
    rest = text[punct_end:].lstrip()
    if not rest:
        return True
    return rest[0].isupper() or rest[0].isdigit() or rest[0] in "\"'([$"


def segment_sentences(doc: Document) -> list[Sentence]:
    """Split a document into sentences on terminal punctuation and blank lines.

    Sentences are slices of the original text (whitespace-trimmed), so their
    concatenation covers the document modulo delimiters and order is kept.
    """
    text = doc.text
    cut_points = set()
    for m in _BOUNDARY_RE.finditer(text):
        if _is_boundary(text, m.start(), m.end()):
            cut_points.add(m.end())
    for m in _HARD_BREAK_RE.finditer(text):
        cut_points.add(m.start())
    sentences = []
    start = 0
    for cut in sorted(cut_points) + [len(text)]:
        piece = text[start:cut].strip()
        start = cut
        if not piece:
            continue
        cleaned = clean_sentence(piece)
        sentences.append(
            Sentence(
                doc_id=doc.id,
                index=len(sentences),
                raw=piece,
                cleaned=cleaned,
                word_count=len(cleaned.split()),
            )
        )
    return sentences


def filter_sentence_length(
    sents: list[Sentence], min_words: int = 5, max_words: int = 50
) -> list[Sentence]:
    return [s for s in sents if min_words <= s.word_count <= max_words]


def _suffix_lemma(word: str) -> str:
    if len(word) < 5:
        return word
    if word.endswith("ies"):
        return word[:-3] + "y"
    if word.endswith(("sses", "ches", "shes", "xes", "zes")):
        return word[:-2]
    if word.endswith("s") and not word.endswith(("ss", "us", "is")):
        return word[:-1]
    if word.endswith("ing") and len(word) >= 7:
        stem = word[:-3]
        if len(stem) >= 4:
            if stem[-1] == stem[-2] and stem[-1] not in "aeiouls":
                stem = stem[:-1]
            return stem
    if word.endswith("ed") and len(word) >= 6:
        stem = word[:-2]
        if len(stem) >= 4:
            if stem[-1] == stem[-2] and stem[-1] not in "aeiouls":
                stem = stem[:-1]
            return stem
    return word


def normalize_tokens(
    text: str,
    stopwords: frozenset[str],
    lemma_table: dict[str, str],
    keywords: frozenset[str] = frozenset(),
    key: str = "",
) -> TokenDoc:
    """Lowercase, tokenize, drop stopwords, and lemmatize.

    Lemmatization is an exact-match table lookup with a conservative
    suffix-stripping fallback. Tokens containing a keyword substring are
    never dropped by the stopword list.
    """
    out = []
    for token in _TOKEN_RE.findall(text.lower()):
        preserved = any(k in token for k in keywords)
        if token in stopwords and not preserved:
            continue
        lemma = lemma_table.get(token)
        if lemma is None:
            lemma = _suffix_lemma(token)
        out.append(lemma)
    return TokenDoc(key=key, tokens=tuple(out))


def _phrase_pass(
    corpus: list[TokenDoc], min_count: int, score_threshold: float
) -> list[TokenDoc]:
    token_counts: dict[str, int] = {}
    pair_counts: dict[tuple[str, str], int] = {}
    total = 0
    for doc in corpus:
        total += len(doc.tokens)
        for tok in doc.tokens:
            token_counts[tok] = token_counts.get(tok, 0) + 1
        for a, b in zip(doc.tokens, doc.tokens[1:]):
            pair_counts[(a, b)] = pair_counts.get((a, b), 0) + 1

    def qualifies(a: str, b: str) -> bool:
        joint = pair_counts.get((a, b), 0)
        score = (joint - min_count) * total / (token_counts[a] * token_counts[b])
        return score >= score_threshold

    out = []
    for doc in corpus:
        tokens = []
        i = 0
        while i < len(doc.tokens):
            if i + 1 < len(doc.tokens) and qualifies(doc.tokens[i], doc.tokens[i + 1]):
                tokens.append(doc.tokens[i] + "_" + doc.tokens[i + 1])
                i += 2
            else:
                tokens.append(doc.tokens[i])
                i += 1
        out.append(TokenDoc(key=doc.key, tokens=tuple(tokens)))
    return out


def detect_phrases(
    corpus: list[TokenDoc], min_count: int = 5, score_threshold: float = 10.0
) -> list[TokenDoc]:
    """Join collocations with "_" using the discounted pointwise score
    (joint - min_count) * N / (count_a * count_b). Two passes, so the second
    pass can chain a joined bigram with a following token into a trigram."""
    if not corpus:
        raise ValueError("phrase detection needs a non-empty corpus")
    return _phrase_pass(
        _phrase_pass(corpus, min_count, score_threshold), min_count, score_threshold
    )


def filter_token_extremes(
    corpus: list[TokenDoc],
    min_df: float,
    max_df: float,
    tfidf_floor: float = 0.1,
    keywords: frozenset[str] = frozenset(),
) -> tuple[list[TokenDoc], Vocabulary]:
    """Keep tokens whose document frequency lies in [min_df, max_df] (as a
    fraction) and whose normalized tf-idf is at least the floor. Tokens with
    a keyword substring always survive."""
    if not (0.0 <= min_df < max_df <= 1.0):
        raise ValueError(f"bad df bounds [{min_df}, {max_df}]")
    n_docs = len(corpus)
    df: dict[str, int] = {}
    cf: dict[str, int] = {}
    for doc in corpus:
        for tok in set(doc.tokens):
            df[tok] = df.get(tok, 0) + 1
        for tok in doc.tokens:
            cf[tok] = cf.get(tok, 0) + 1
    raw_tfidf = {
        tok: cf[tok] * math.log(n_docs / df[tok]) if df[tok] < n_docs else 0.0
        for tok in df
    }
    peak = max(raw_tfidf.values(), default=0.0)
    norm = {tok: (v / peak if peak > 0 else 0.0) for tok, v in raw_tfidf.items()}

    def survives(tok: str) -> bool:
        if any(k in tok for k in keywords):
            return True
        frac = df[tok] / n_docs
        return min_df <= frac <= max_df and norm[tok] >= tfidf_floor

    surviving = {tok for tok in df if survives(tok)}
    if not surviving:
        raise EmptyVocabulary("no token survives the extremes filter")
    vocab = Vocabulary(
        entries={tok: (df[tok], cf[tok], norm[tok]) for tok in sorted(surviving)}
    )
    filtered = [
        TokenDoc(key=d.key, tokens=tuple(t for t in d.tokens if t in surviving))
        for d in corpus
    ]
    return filtered, vocab


def _tfidf_matrix(corpus: list[TokenDoc]) -> np.ndarray:
    """Rows are L2-normalized tf-idf vectors with idf = log(1 + N/df)."""
    vocab = sorted({t for d in corpus for t in d.tokens})
    index = {t: i for i, t in enumerate(vocab)}
    n = len(corpus)
    df = np.zeros(len(vocab))
    for doc in corpus:
        for tok in set(doc.tokens):
            df[index[tok]] += 1
    idf = np.log(1.0 + n / np.maximum(df, 1.0))
    mat = np.zeros((n, len(vocab)))
    for row, doc in enumerate(corpus):
        for tok in doc.tokens:
            mat[row, index[tok]] += 1.0
    mat *= idf
    norms = np.linalg.norm(mat, axis=1)
    norms[norms == 0.0] = 1.0
    return mat / norms[:, None]


def cosine_document_filter(
    corpus: list[TokenDoc], funnel: FunnelReport, threshold: float = 0.6
) -> list[TokenDoc]:
    """Single-pass filter keeping documents whose mean cosine similarity to
    every other document (self excluded) reaches the threshold."""
    if len(corpus) < 2:
        raise ValueError("cosine filter needs at least two documents")
    mat = _tfidf_matrix(corpus)
    total = mat.sum(axis=0)
    # row . total counts the self-similarity of 1, removed before averaging
    means = (mat @ total - 1.0) / (len(corpus) - 1)
    kept = [doc for doc, m in zip(corpus, means) if m >= threshold]
    funnel.add_stage("cosine", len(kept), len(corpus) - len(kept))
    return kept


def refine_sentences_by_keyword(
    sents: list[Sentence], keyword_union: frozenset[str]
) -> list[Sentence]:
    """Keep sentences containing a keyword plus their immediate neighbors
    within the same document; order preserved, no duplicates."""
    by_doc: dict[str, list[int]] = {}
    for pos, s in enumerate(sents):
        by_doc.setdefault(s.doc_id, []).append(pos)
    keep: set[int] = set()
    for positions in by_doc.values():
        for j, pos in enumerate(positions):
            words = sents[pos].cleaned.lower().split()
            if any(any(k in w for k in keyword_union) for w in words):
                keep.add(pos)
                if j > 0:
                    keep.add(positions[j - 1])
                if j + 1 < len(positions):
                    keep.add(positions[j + 1])
    return [s for pos, s in enumerate(sents) if pos in keep]


def write_sentences(sents: list[Sentence], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for s in sents:
            fh.write(
                json.dumps(
                    {
                        "doc_id": s.doc_id,
                        "index": s.index,
                        "raw": s.raw,
                        "cleaned": s.cleaned,
                        "word_count": s.word_count,
                    },
                    sort_keys=True,
                )
                + "\n"
            )


def read_sentences(path: str | Path) -> list[Sentence]:
    out = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                out.append(Sentence(**json.loads(line)))
    return out


def write_tokendocs(docs: list[TokenDoc], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for d in docs:
            fh.write(json.dumps({"key": d.key, "tokens": list(d.tokens)}, sort_keys=True) + "\n")


def read_tokendocs(path: str | Path) -> list[TokenDoc]:
    out = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                rec = json.loads(line)
                out.append(TokenDoc(key=rec["key"], tokens=tuple(rec["tokens"])))
    return out
