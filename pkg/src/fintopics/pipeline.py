"""Pipeline orchestration: config, stage execution, and report emission.

Stages run in the fixed order ingest -> prep -> label -> reduce -> cluster ->
topics -> metrics -> report, each reading its inputs from the run directory
written by earlier stages. Reruns with identical config, inputs, and seed
produce byte-identical artifacts; timings live only in the run manifest.
"""

import csv
import hashlib
import json
import os
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np
import yaml

from . import ingest as ingest_mod
from . import keywords as kw_mod
from . import metrics as metrics_mod
from . import textprep
from .density import ClusterAssignment, density_cluster
from .errors import ConfigInvalid, StageDependencyMissing
from .reduction import accept_external_reduction, reduce
from .topics import TopicRepresentation, build_class_counts, ctfidf, top_k_words
from .vectors import read_vectors, write_vectors

STAGES = (
    "ingest",
    "prep",
    "label",
    "reduce",
    "cluster",
    "topics",
    "metrics",
    "report",
)

_PATH_FIELDS = (
    "manifest",
    "keyword_list",
    "stopwords",
    "lemmas",
    "vectors",
    "external_reduced",
)


@dataclass
class PipelineConfig:
    # paths; keyword/stopword/lemma files default to the bundled data when None
    manifest: str = ""
    out_dir: str = "run"
    keyword_list: str | None = None
    stopwords: str | None = None
    lemmas: str | None = None
    vectors: str | None = None
    external_reduced: str | None = None
    # document funnel
    min_words: int = 250
    zscore_threshold: float = 2.0
    year_first: int = 2016
    year_last: int = 2022
    cosine_floor: float = 0.6
    # sentence handling
    sentence_min_words: int = 5
    sentence_max_words: int = 50
    # token handling
    phrase_min_count: int = 5
    phrase_threshold: float = 10.0
    extremes_min_df: float = 0.02
    extremes_max_df: float = 0.99
    tfidf_floor: float = 0.1
    vectorizer_min_df: int = 10
    # reduction and clustering
    n_components: int = 10
    min_cluster_size: int = 1250
    min_samples: int = 10
    # topics and metrics
    seed_multiplier: float = 50.0
    reduce_frequent: bool = True
    top_k: int = 5
    window: int = 20
    # labeling
    train_fraction: float = 0.8
    rng_seed: int = 0

    def validate(self, require_inputs: bool = True) -> None:
        checks = [
            (self.min_words >= 1, "min_words must be >= 1"),
            (self.zscore_threshold > 0, "zscore_threshold must be positive"),
            (self.year_first <= self.year_last, "year window inverted"),
            (0 < self.cosine_floor <= 1, "cosine_floor must be in (0, 1]"),
            (1 <= self.sentence_min_words <= self.sentence_max_words,
             "sentence length window inverted"),
            (0 <= self.extremes_min_df < self.extremes_max_df <= 1,
             "extremes df bounds invalid"),
            (self.n_components >= 1, "n_components must be >= 1"),
            (self.min_cluster_size >= 2, "min_cluster_size must be >= 2"),
            (self.min_samples >= 1, "min_samples must be >= 1"),
            (self.top_k >= 2, "top_k must be >= 2"),
            (self.window >= 2, "window must be >= 2"),
            (0 < self.train_fraction < 1, "train_fraction must be in (0, 1)"),
        ]
        for ok, message in checks:
            if not ok:
                raise ConfigInvalid(message)
        if require_inputs:
            if not self.manifest or not Path(self.manifest).exists():
                raise ConfigInvalid(f"manifest path missing: {self.manifest!r}")
            for name in ("keyword_list", "stopwords", "lemmas", "vectors",
                         "external_reduced"):
                value = getattr(self, name)
                if value is not None and not Path(value).exists():
                    raise ConfigInvalid(f"{name} path missing: {value!r}")

    @classmethod
    def from_yaml(cls, path: str | Path) -> "PipelineConfig":
        raw = yaml.safe_load(Path(path).read_text(encoding="utf-8")) or {}
        unknown = set(raw) - {f for f in cls.__dataclass_fields__}
        if unknown:
            raise ConfigInvalid(f"unknown config keys: {sorted(unknown)}")
        cfg = cls(**raw)
        # environment variables may override paths only
        for name in _PATH_FIELDS + ("out_dir",):
            override = os.environ.get(f"FINTOPICS_{name.upper()}")
            if override:
                setattr(cfg, name, override)
        return cfg

    def to_yaml(self, path: str | Path) -> None:
        Path(path).write_text(
            yaml.safe_dump(asdict(self), sort_keys=True), encoding="utf-8"
        )

    def config_hash(self) -> str:
        blob = json.dumps(asdict(self), sort_keys=True).encode("utf-8")
        return hashlib.sha256(blob).hexdigest()


@dataclass
class RunManifest:
    config_hash: str
    stage_timings: dict[str, float] = field(default_factory=dict)
    digests: dict[str, str] = field(default_factory=dict)

    def write(self, path: str | Path) -> None:
        payload = {
            "config_hash": self.config_hash,
            "stage_timings": self.stage_timings,
            "digests": self.digests,
        }
        Path(path).write_text(json.dumps(payload, indent=2, sort_keys=True))


def _sha256(path: Path) -> str:
    h = hashlib.sha256()
    h.update(path.read_bytes())
    return h.hexdigest()


class _Run:
    """Shared state for one pipeline execution."""

    def __init__(self, cfg: PipelineConfig):
        self.cfg = cfg
        self.out = Path(cfg.out_dir)
        self.keywords = kw_mod.load_keywords(cfg.keyword_list)
        self.stopwords = textprep.load_stopwords(cfg.stopwords)
        self.lemmas = textprep.load_lemmas(cfg.lemmas)

    def path(self, stage: str, name: str) -> Path:
        return self.out / stage / name

    def require(self, stage: str, name: str) -> Path:
        p = self.path(stage, name)
        if not p.exists():
            raise StageDependencyMissing(
                f"{p} not found; run the {stage!r} stage first"
            )
        return p

    def ensure_dir(self, stage: str) -> Path:
        d = self.out / stage
        d.mkdir(parents=True, exist_ok=True)
        return d

    # --- stages -----------------------------------------------------------

    def ingest(self) -> None:
        cfg = self.cfg
        self.ensure_dir("ingest")
        funnel = ingest_mod.FunnelReport()
        filings = ingest_mod.load_manifest(cfg.manifest)
        docs = ingest_mod.extract_corpus(filings, funnel)
        docs = ingest_mod.filter_min_words(docs, funnel, cfg.min_words)
        docs = ingest_mod.filter_zscore(docs, funnel, cfg.zscore_threshold)
        docs = ingest_mod.filter_year(docs, funnel, cfg.year_first, cfg.year_last)
        ingest_mod.write_documents(docs, self.path("ingest", "documents.jsonl"))
        self.path("ingest", "funnel.json").write_text(funnel.to_json())

    def prep(self) -> None:
        cfg = self.cfg
        self.ensure_dir("prep")
        docs = ingest_mod.read_documents(self.require("ingest", "documents.jsonl"))
        funnel = ingest_mod.FunnelReport.from_json(
            self.require("ingest", "funnel.json").read_text()
        )
        union = self.keywords.all_keywords()
        doc_tokens = [
            textprep.normalize_tokens(
                d.text, self.stopwords, self.lemmas, union, key=d.id
            )
            for d in docs
        ]
        doc_tokens = textprep.detect_phrases(
            doc_tokens, cfg.phrase_min_count, cfg.phrase_threshold
        )
        doc_tokens, _ = textprep.filter_token_extremes(
            doc_tokens, cfg.extremes_min_df, cfg.extremes_max_df,
            cfg.tfidf_floor, union,
        )
        kept_tokens = textprep.cosine_document_filter(
            doc_tokens, funnel, cfg.cosine_floor
        )
        kept_ids = {t.key for t in kept_tokens}
        sentences = []
        for doc in docs:
            if doc.id in kept_ids:
                sentences.extend(textprep.segment_sentences(doc))
        refined = textprep.refine_sentences_by_keyword(sentences, union)
        sent_tokens = [
            textprep.normalize_tokens(
                s.cleaned, self.stopwords, self.lemmas, union, key=s.key
            )
            for s in sentences
        ]
        textprep.write_sentences(sentences, self.path("prep", "sentences.jsonl"))
        textprep.write_sentences(refined, self.path("prep", "refined.jsonl"))
        textprep.write_tokendocs(sent_tokens, self.path("prep", "tokendocs.jsonl"))
        self.path("prep", "funnel.json").write_text(funnel.to_json())

    def label(self) -> None:
        cfg = self.cfg
        self.ensure_dir("label")
        sentences = textprep.read_sentences(self.require("prep", "sentences.jsonl"))
        sized = textprep.filter_sentence_length(
            sentences, cfg.sentence_min_words, cfg.sentence_max_words
        )
        labeled = kw_mod.build_labeled_dataset(sized, self.keywords)
        dataset = kw_mod.split_topicwise(labeled, cfg.train_fraction, cfg.rng_seed)
        kw_mod.write_labeled(dataset.train, self.path("label", "train.jsonl"))
        kw_mod.write_labeled(dataset.test, self.path("label", "test.jsonl"))
        self.path("label", "counts.json").write_text(
            json.dumps(dataset.per_topic_counts, indent=2, sort_keys=True)
        )

    def reduce(self) -> None:
        cfg = self.cfg
        self.ensure_dir("reduce")
        if cfg.external_reduced:
            reduced = accept_external_reduction(cfg.external_reduced, cfg.n_components)
        else:
            if not cfg.vectors:
                raise StageDependencyMissing(
                    "reduce stage needs `vectors` or `external_reduced` in the config"
                )
            full = read_vectors(cfg.vectors)
            reduced = reduce(full, cfg.n_components)
        write_vectors(reduced, self.path("reduce", "reduced.ftsvec"))

    def cluster(self) -> None:
        cfg = self.cfg
        self.ensure_dir("cluster")
        reduced = read_vectors(self.require("reduce", "reduced.ftsvec"))
        assignment = density_cluster(reduced, cfg.min_cluster_size, cfg.min_samples)
        with open(self.path("cluster", "assignments.jsonl"), "w", encoding="utf-8") as fh:
            for key, label in zip(reduced.keys, assignment.labels):
                fh.write(json.dumps({"key": key, "label": int(label)}) + "\n")
        summary = {
            "n_clusters": assignment.n_clusters,
            "outliers": int(np.sum(assignment.labels == -1)),
            "min_cluster_size": cfg.min_cluster_size,
            "min_samples": cfg.min_samples,
        }
        self.path("cluster", "summary.json").write_text(
            json.dumps(summary, indent=2, sort_keys=True)
        )

    def _load_assignments(self) -> tuple[list[str], np.ndarray]:
        keys, labels = [], []
        with open(self.require("cluster", "assignments.jsonl"), encoding="utf-8") as fh:
            for line in fh:
                if line.strip():
                    rec = json.loads(line)
                    keys.append(rec["key"])
                    labels.append(rec["label"])
        return keys, np.array(labels, dtype=np.int64)

    def topics(self) -> None:
        cfg = self.cfg
        self.ensure_dir("topics")
        keys, labels = self._load_assignments()
        token_by_key = {
            t.key: t
            for t in textprep.read_tokendocs(self.require("prep", "tokendocs.jsonl"))
        }
        aligned = [token_by_key[k] for k in keys]
        assignment = ClusterAssignment(
            labels=labels,
            n_clusters=len(set(labels[labels >= 0].tolist())),
            min_cluster_size=cfg.min_cluster_size,
            min_samples=cfg.min_samples,
        )
        class_counts = build_class_counts(
            aligned, assignment, self.stopwords, cfg.vectorizer_min_df
        )
        weights = ctfidf(
            class_counts, self.keywords, cfg.seed_multiplier, cfg.reduce_frequent
        )
        rep = top_k_words(weights, class_counts, cfg.top_k)
        payload = {
            str(cluster): [[tok, weight] for tok, weight in pairs]
            for cluster, pairs in rep.topics.items()
        }
        self.path("topics", "topics.json").write_text(
            json.dumps(
                {"topics": payload, "short": sorted(rep.short)},
                indent=2,
                sort_keys=True,
            )
        )

    def _load_topics(self) -> TopicRepresentation:
        raw = json.loads(self.require("topics", "topics.json").read_text())
        topics = {
            int(cluster): [(tok, float(weight)) for tok, weight in pairs]
            for cluster, pairs in raw["topics"].items()
        }
        return TopicRepresentation(topics=topics, short=set(raw["short"]))

    def metrics(self) -> None:
        cfg = self.cfg
        self.ensure_dir("metrics")
        rep = self._load_topics()
        keys, labels = self._load_assignments()
        token_by_key = {
            t.key: t
            for t in textprep.read_tokendocs(self.require("prep", "tokendocs.jsonl"))
        }
        # the reference corpus for coherence is exactly the model's input set
        corpus = [token_by_key[k] for k in keys]
        emb_path = cfg.vectors or self.require("reduce", "reduced.ftsvec")
        emb = read_vectors(emb_path)
        row_of = {k: i for i, k in enumerate(emb.keys)}
        rows = [row_of[k] for k in keys]
        embeddings = emb.data[rows]
        report = metrics_mod.build_report(
            rep,
            corpus,
            self.keywords,
            embeddings,
            labels,
            outlier_count=int(np.sum(labels == -1)),
            cfg=metrics_mod.CoherenceConfig(window_size=cfg.window, top_k=cfg.top_k),
        )
        self.path("metrics", "metrics.json").write_text(
            json.dumps(report.as_dict(), indent=2, sort_keys=True)
        )

    def report(self) -> None:
        self.ensure_dir("report")
        metrics_payload = json.loads(self.require("metrics", "metrics.json").read_text())
        rep = self._load_topics()
        funnel = ingest_mod.FunnelReport.from_json(
            self.require("prep", "funnel.json").read_text()
        )
        emit_report(metrics_payload, rep, funnel, self.keywords, self.out / "report")


def emit_report(
    metrics_payload: dict,
    topics: TopicRepresentation,
    funnel: ingest_mod.FunnelReport,
    keywords: kw_mod.KeywordList,
    out_dir: str | Path,
) -> None:
    """Write the metrics CSV, per-topic wordcloud weights, and funnel JSON."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    rows = [
        ("npmi", metrics_payload["npmi_weighted"], metrics_payload["npmi_raw"]),
        (
            "intratopic",
            metrics_payload["intratopic_weighted"],
            metrics_payload["intratopic_raw"],
        ),
        (
            "intertopic",
            metrics_payload["intertopic_weighted"],
            metrics_payload["intertopic_raw"],
        ),
    ]
    with open(out / "metrics.csv", "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["metric", "weighted (raw)"])
        for name, weighted, raw in rows:
            writer.writerow([name, metrics_mod.format_cell(weighted, raw)])
        writer.writerow(
            ["topic_precision", f"{metrics_payload['topic_precision']:.3f}"]
        )
        writer.writerow(["outliers", str(metrics_payload["outlier_count"])])

    clouds = {}
    for cluster, pairs in topics.topics.items():
        entries = []
        for token, weight in pairs:
            domains = sorted(
                name
                for name, kws in keywords.topics.items()
                if any(k in token for k in kws)
            )
            if not domains:
                tag = "none"
            elif len(domains) == 1:
                tag = domains[0]
            else:
                tag = "multiple"
            entries.append({"token": token, "weight": weight, "domain": tag})
        clouds[str(cluster)] = entries
    (out / "wordcloud.json").write_text(json.dumps(clouds, indent=2, sort_keys=True))
    (out / "funnel.json").write_text(funnel.to_json())


def run_pipeline(
    cfg: PipelineConfig, stages: tuple[str, ...] | None = None
) -> RunManifest:
    """Execute the requested stages (default: all) and write the run manifest."""
    cfg.validate()
    selected = STAGES if stages is None else tuple(s for s in STAGES if s in stages)
    unknown = set(stages or ()) - set(STAGES)
    if unknown:
        raise ConfigInvalid(f"unknown stages: {sorted(unknown)}")
    run = _Run(cfg)
    run.out.mkdir(parents=True, exist_ok=True)
    cfg.to_yaml(run.out / "config.yaml")
    manifest = RunManifest(config_hash=cfg.config_hash())
    for stage in selected:
        started = time.perf_counter()
        getattr(run, stage)()
        manifest.stage_timings[stage] = time.perf_counter() - started
    for path in sorted(run.out.rglob("*")):
        if path.is_file() and path.name != "manifest.json":
            manifest.digests[str(path.relative_to(run.out))] = _sha256(path)
    manifest.write(run.out / "manifest.json")
    return manifest
