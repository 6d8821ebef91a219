"""Deterministic toy corpus for end-to-end runs and demos.

Fifty synthetic filings built from a shared pool of domain sentences (at
least two keyword hits per domain sentence, none from other domains), plus a
matching pre-encoded vector file so the whole pipeline can run without any
embedding model. Everything derives from the seed; rebuilding with the same
seed is byte-identical.
"""

import hashlib
import json
import random
from pathlib import Path

import numpy as np

from . import ingest as ingest_mod
from . import keywords as kw_mod
from . import textprep
from .pipeline import PipelineConfig
from .vectors import EmbeddingMatrix, write_vectors

# Two or more same-domain keywords per sentence, zero foreign ones; the {}
# slot takes a neutral filler so deduplication keeps several variants alive.
_DOMAIN_SENTENCES = {
    "Sales": [
        "{} demand for our offerings lifted revenue across every region we serve",
        "new contract wins and firmer pricing strategies supported {} revenue growth",
        "consumer demand stayed {} although competition for shelf space intensified",
    ],
    "Cost": [
        "{} input costs and freight expenses weighed on the consolidated ledger",
        "we recorded a goodwill impairment charge alongside {} restructuring costs",
        "depreciation expense rose on the {} fleet additions placed in service",
    ],
    "Profit/Loss": [
        "{} margins and record earnings drove another year of solid income",
        "management expects profit and operating income to stay {} next year",
        "the segment posted a {} loss although gross margin held firm",
    ],
    "Operations": [
        "{} manufacturing throughput and steadier logistics kept operations on plan",
        "we expanded production capacity and simplified the supply chain {}",
        "plant operations ran at {} utilization while the logistics group rebuilt buffers",
    ],
    "Liquidity": [
        "cash balances and undrawn capital keep liquidity {} for the year ahead",
        "{} cash generation strengthened our capital position further",
        "interest coverage remains {} and excess cash backs the buyback",
    ],
    "Investment": [
        "{} expenditure went toward asset upgrades and plant tooling",
        "we completed the divestiture of a noncore asset portfolio {}",
        "invested amounts rose as expenditure on equipment stayed {}",
    ],
    "Financing": [
        "we refinanced maturing debt and trimmed borrowings at {} rates",
        "the board raised the dividend and authorized a {} share repurchase",
        "equity issuance and new credit facilities backed the {} financing plan",
    ],
    "Litigation": [
        "the pending lawsuit and related litigation remain {} to predict",
        "we settled a patent dispute with a {} onetime payment",
        "legal matters arising from the arbitration were resolved {}",
    ],
    "HR": [
        "employee retention improved after the {} wage and training programs",
        "we expanded hiring and added staff across {} fulfillment sites",
        "union negotiations concluded with a {} labor agreement",
    ],
    "Regulation": [
        "{} federal regulations raised our compliance and tax burden",
        "new legislation on data handling brought {} regulatory scrutiny",
        "the government enacted tax changes with a {} effect on deferred items",
    ],
    "Accounting": [
        "the audit committee reviewed {} accounting estimates and controls",
        "we adopted the new accounting standard and updated control filings {}",
        "an immaterial out of period adjustment was reported in the {} filing",
    ],
    "Energy": [
        "{} fuel and electric power tariffs pressured energy intensive lines",
        "the solar and wind portfolio generated {} megawatt volumes",
        "we hedge oil and energy exposure under a {} program",
    ],
    "ESG": [
        "our sustainability plan cut carbon emissions by a {} amount",
        "recycling programs reduced plastic waste across {} facilities",
        "renewable sourcing and environmental targets advanced {}",
    ],
    "Covid-19": [
        "the covid pandemic disrupted seasonal patterns in a {} way",
        "pandemic era disease measures phased out during the {} quarter",
        "covid related absences eased as the pandemic waned {}",
    ],
}

_FILLERS = (
    "broadly", "modestly", "markedly", "steadily", "notably", "gradually",
    "materially", "unevenly",
)

_NEUTRAL = [
    "the group reviewed the plan and kept the same cadence as before",
    "this discussion should be read together with the footnotes",
    "we will continue to monitor conditions and adapt where appropriate",
    "these trends are discussed in more detail elsewhere in this section",
    "our outlook reflects the assumptions described in the prior paragraphs",
]


def _filing_body(rng: random.Random, n_sentences: int, pad_words: int) -> str:
    pool = []
    for domain in kw_mod.TOPIC_NAMES:
        template = rng.choice(_DOMAIN_SENTENCES[domain])
        pool.append(template.format(rng.choice(_FILLERS)))
    while len(pool) < n_sentences:
        domain = rng.choice(kw_mod.TOPIC_NAMES)
        template = rng.choice(_DOMAIN_SENTENCES[domain])
        pool.append(template.format(rng.choice(_FILLERS)))
    rng.shuffle(pool)
    body = ". ".join(s.capitalize() for s in pool) + "."
    padding = []
    while len(padding) < pad_words:
        padding.extend(rng.choice(_NEUTRAL).split())
    body += " " + " ".join(padding[:pad_words]).capitalize() + "."
    return (
        "ANNUAL REPORT\n\nITEM 7. MANAGEMENT DISCUSSION AND ANALYSIS\n"
        + body
        + "\nITEM 8. FINANCIAL STATEMENTS\nBalance sheet follows."
    )


def _stable_rng(seed: int, key: str) -> np.random.Generator:
    digest = hashlib.sha256(f"{seed}:{key}".encode("utf-8")).digest()
    return np.random.default_rng(int.from_bytes(digest[:8], "little"))


def _toy_embeddings(
    sentences: list[textprep.Sentence],
    keywords: kw_mod.KeywordList,
    dim: int,
    seed: int,
) -> EmbeddingMatrix:
    """Unit vectors near a per-domain anchor; unlabeled sentences scatter."""
    anchor_rng = np.random.default_rng(seed)
    anchors = {name: anchor_rng.standard_normal(dim) for name in keywords.domains()}
    rows = []
    for sent in sentences:
        counts = kw_mod.match_keywords(sent.cleaned, keywords)
        label = kw_mod.label_sentence(counts)
        jitter = _stable_rng(seed, sent.key)
        if label is None:
            vec = jitter.standard_normal(dim)
        else:
            vec = anchors[label] + 0.05 * jitter.standard_normal(dim)
        rows.append(vec / np.linalg.norm(vec))
    data = np.array(rows, dtype=np.float32)
    return EmbeddingMatrix(data=data, keys=[s.key for s in sentences])


def build_toy_corpus(
    out_dir: str | Path, n_filings: int = 50, seed: int = 7, dim: int = 32
) -> PipelineConfig:
    """Write filings, manifest, vectors, and a ready-to-run config.

    Returns the config (also saved as toy_config.yaml in the directory).
    """
    out = Path(out_dir)
    filings_dir = out / "filings"
    filings_dir.mkdir(parents=True, exist_ok=True)
    rng = random.Random(seed)
    manifest_rows = []
    for i in range(n_filings):
        body = _filing_body(
            rng, n_sentences=rng.randint(28, 34), pad_words=rng.randint(60, 90)
        )
        name = f"filing_{i:03d}.txt"
        (filings_dir / name).write_text(body, encoding="utf-8")
        manifest_rows.append(
            {"id": f"F{i:03d}", "fiscal_year": 2016 + i % 7, "path": f"filings/{name}"}
        )
    with open(out / "manifest.jsonl", "w", encoding="utf-8") as fh:
        for row in manifest_rows:
            fh.write(json.dumps(row, sort_keys=True) + "\n")

    # toy-sized thresholds: the 50-doc pool tops out near 0.54 mean cosine,
    # so the document filter runs at 0.45 to drop some docs without
    # emptying the corpus
    cfg = PipelineConfig(
        manifest=str(out / "manifest.jsonl"),
        out_dir=str(out / "run"),
        vectors=str(out / "vectors.ftsvec"),
        min_words=120,
        extremes_min_df=0.02,
        extremes_max_df=1.0,
        tfidf_floor=0.0,
        cosine_floor=0.45,
        vectorizer_min_df=2,
        min_cluster_size=12,
        min_samples=4,
        rng_seed=seed,
    )

    # enumerate the sentences the pipeline will embed, then encode them
    keywords = kw_mod.load_keywords()
    stopwords = textprep.load_stopwords()
    lemmas = textprep.load_lemmas()
    union = keywords.all_keywords()
    funnel = ingest_mod.FunnelReport()
    docs = ingest_mod.extract_corpus(ingest_mod.load_manifest(cfg.manifest), funnel)
    docs = ingest_mod.filter_min_words(docs, funnel, cfg.min_words)
    docs = ingest_mod.filter_zscore(docs, funnel, cfg.zscore_threshold)
    docs = ingest_mod.filter_year(docs, funnel, cfg.year_first, cfg.year_last)
    doc_tokens = [
        textprep.normalize_tokens(d.text, stopwords, lemmas, union, key=d.id)
        for d in docs
    ]
    doc_tokens = textprep.detect_phrases(
        doc_tokens, cfg.phrase_min_count, cfg.phrase_threshold
    )
    doc_tokens, _ = textprep.filter_token_extremes(
        doc_tokens, cfg.extremes_min_df, cfg.extremes_max_df, cfg.tfidf_floor, union
    )
    kept = {
        t.key
        for t in textprep.cosine_document_filter(doc_tokens, funnel, cfg.cosine_floor)
    }
    sentences = []
    for doc in docs:
        if doc.id in kept:
            sentences.extend(textprep.segment_sentences(doc))
    matrix = _toy_embeddings(sentences, keywords, dim=dim, seed=seed)
    write_vectors(matrix, cfg.vectors)
    cfg.to_yaml(out / "toy_config.yaml")
    return cfg
