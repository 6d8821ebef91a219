import numpy as np
import pytest

from fintopics.ingest import Document
from fintopics.textprep import TokenDoc


@pytest.fixture
def make_doc():
    def _make(text, doc_id="d0", year=2020):
        return Document(
            id=doc_id, fiscal_year=year, text=text, word_count=len(text.split())
        )

    return _make


def random_tokendocs(rng, n_docs, vocab, max_len=60):
    """Random corpora for oracle-equivalence tests."""
    docs = []
    for i in range(n_docs):
        length = rng.integers(0, max_len + 1)
        tokens = tuple(rng.choice(vocab, size=length).tolist())
        docs.append(TokenDoc(key=f"doc{i}", tokens=tokens))
    return docs


def brute_force_window_counts(corpus, words, window_size):
    """Independent oracle: enumerate every sliding window explicitly."""
    word_w = {w: 0 for w in words}
    pair_w = {}
    total = 0
    for doc in corpus:
        t = len(doc.tokens)
        if t == 0:
            continue
        for start in range(max(1, t - window_size + 1)):
            total += 1
            present = sorted(set(doc.tokens[start : start + window_size]) & set(words))
            for w in present:
                word_w[w] += 1
            for i, a in enumerate(present):
                for b in present[i + 1 :]:
                    pair_w[(a, b)] = pair_w.get((a, b), 0) + 1
    return word_w, pair_w, total


def kruskal_mst_weight(weights: np.ndarray) -> float:
    """Brute-force MST oracle: sort all edges, Kruskal with naive union-find."""
    n = weights.shape[0]
    edges = [
        (float(weights[i, j]), i, j) for i in range(n) for j in range(i + 1, n)
    ]
    edges.sort()
    parent = list(range(n))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    total = 0.0
    used = 0
    for w, i, j in edges:
        ri, rj = find(i), find(j)
        if ri != rj:
            parent[ri] = rj
            total += w
            used += 1
            if used == n - 1:
                break
    return total
