"""Item 7 -> Item 8 span extraction and document-level corpus filters.

Filings arrive as plain text (stage-one parsed, HTML already stripped) plus a
manifest. The extractor isolates the MD&A span; the filters funnel the corpus
down by word count, word-count z-score, and fiscal year, recording kept/dropped
counts per stage so the whole reduction is auditable.
"""

import json
import re
import warnings
from dataclasses import dataclass, field
from pathlib import Path

from .errors import DegenerateDistribution, NoItem7Found, NoItem8AfterItem7


@dataclass(frozen=True)
class RawFiling:
    id: str
    fiscal_year: int
    body: str


@dataclass(frozen=True)
class Document:
    id: str
    fiscal_year: int
    text: str
    word_count: int


@dataclass
class FunnelReport:
    """Ordered per-stage (kept, dropped) accounting.

    Telescopes: each stage's kept + dropped equals the previous stage's kept.
    """

    stages: list[tuple[str, int, int]] = field(default_factory=list)

    def add_stage(self, name: str, kept: int, dropped: int) -> None:
        if self.stages:
            prev_kept = self.stages[-1][1]
            if kept + dropped != prev_kept:
                raise ValueError(
                    f"stage {name!r}: {kept}+{dropped} != previous kept {prev_kept}"
                )
        self.stages.append((name, kept, dropped))

    @property
    def final_kept(self) -> int:
        return self.stages[-1][1] if self.stages else 0

    def to_json(self) -> str:
        payload = [
            {"stage": name, "kept": kept, "dropped": dropped}
            for name, kept, dropped in self.stages
        ]
        return json.dumps(payload, indent=2)

    @classmethod
    def from_json(cls, text: str) -> "FunnelReport":
        report = cls()
        for row in json.loads(text):
            report.add_stage(row["stage"], row["kept"], row["dropped"])
        return report


# Heading grammar: "ITEM" at a line start, optional punctuation/whitespace,
# then the item number. Item 7 must not swallow 7A; both exclude a trailing
# alphanumeric so "ITEM 78" never matches.
_ITEM7_RE = re.compile(r"^[^\S\r\n]*item[\s.:\-–—]*7(?![a-z0-9])", re.IGNORECASE | re.MULTILINE)
_ITEM8_RE = re.compile(r"^[^\S\r\n]*item[\s.:\-–—]*8(?![a-z0-9])", re.IGNORECASE | re.MULTILINE)


def count_words(text: str) -> int:
    return len(text.split())


def extract_item7(filing: RawFiling) -> Document:
    """Extract the maximal Item 7 -> Item 8 span from a filing body.

    Filings usually mention both headings in a table of contents before the
    real section starts, so the extractor picks the *last* Item 7 occurrence
    that still precedes an Item 8 occurrence, then the first Item 8 after it.
    The Item 7 heading line is included in the extracted text.
    """
    sevens = [m.start() for m in _ITEM7_RE.finditer(filing.body)]
    if not sevens:
        raise NoItem7Found(f"filing {filing.id}: no Item 7 heading")
    eights = [m.start() for m in _ITEM8_RE.finditer(filing.body)]
    start = None
    end = None
    for seven in reversed(sevens):
        following = [e for e in eights if e > seven]
        if following:
            start = seven
            end = following[0]
            break
    if start is None:
        raise NoItem8AfterItem7(f"filing {filing.id}: no Item 8 after any Item 7")
    text = filing.body[start:end].strip()
    return Document(
        id=filing.id,
        fiscal_year=filing.fiscal_year,
        text=text,
        word_count=count_words(text),
    )


def filter_min_words(
    docs: list[Document], funnel: FunnelReport, min_words: int = 250
) -> list[Document]:
    kept = [d for d in docs if d.word_count >= min_words]
    funnel.add_stage("min_words", len(kept), len(docs) - len(kept))
    return kept


def filter_zscore(
    docs: list[Document], funnel: FunnelReport, threshold: float = 2.0
) -> list[Document]:
    """Drop documents whose word count deviates more than `threshold` standard
    deviations from the corpus mean (population stddev, single pass)."""
    if len(docs) < 2:
        raise ValueError("z-score filter needs at least two documents")
    counts = [d.word_count for d in docs]
    mean = sum(counts) / len(counts)
    var = sum((c - mean) ** 2 for c in counts) / len(counts)
    std = var ** 0.5
    if std == 0.0:
        warnings.warn(
            "zero word-count variance; z-score filter keeps all documents",
            DegenerateDistribution,
        )
        kept = list(docs)
    else:
        kept = [d for d in docs if abs(d.word_count - mean) <= threshold * std]
    funnel.add_stage("zscore", len(kept), len(docs) - len(kept))
    return kept


def filter_year(
    docs: list[Document], funnel: FunnelReport, first: int = 2016, last: int = 2022
) -> list[Document]:
    kept = [d for d in docs if first <= d.fiscal_year <= last]
    funnel.add_stage("year", len(kept), len(docs) - len(kept))
    return kept


def load_manifest(manifest_path: str | Path) -> list[RawFiling]:
    """Read a JSON-lines manifest (id, fiscal_year, path) and the filing texts.

    Paths are resolved relative to the manifest's directory.
    """
    manifest_path = Path(manifest_path)
    base = manifest_path.parent
    filings = []
    with open(manifest_path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            rec = json.loads(line)
            body = (base / rec["path"]).read_text(encoding="utf-8")
            filings.append(
                RawFiling(id=rec["id"], fiscal_year=int(rec["fiscal_year"]), body=body)
            )
    return filings


def extract_corpus(
    filings: list[RawFiling], funnel: FunnelReport
) -> list[Document]:
    """Run extraction over a manifest; unextractable filings count as dropped."""
    docs = []
    failed = 0
    for filing in filings:
        try:
            docs.append(extract_item7(filing))
        except (NoItem7Found, NoItem8AfterItem7):
            failed += 1
    funnel.add_stage("extracted", len(docs), failed)
    return docs


def write_documents(docs: list[Document], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for d in docs:
            fh.write(
                json.dumps(
                    {
                        "id": d.id,
                        "fiscal_year": d.fiscal_year,
                        "text": d.text,
                        "word_count": d.word_count,
                    },
                    sort_keys=True,
                )
                + "\n"
            )


def read_documents(path: str | Path) -> list[Document]:
    docs = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                rec = json.loads(line)
                docs.append(Document(**rec))
    return docs
