"""Corpus-to-report toolkit for financial 10-K topic modeling.

Pipeline: MD&A (Item 7/7A) extraction -> text preparation -> keyword
labeling -> embedding ingestion -> reduction -> density clustering ->
class-based tf-idf topics -> coherence/precision/similarity metrics.
"""

__version__ = "0.1.0"

from .ingest import Document, FunnelReport, RawFiling, extract_item7
from .keywords import KeywordList, load_keywords, match_keywords
from .vectors import EmbeddingMatrix, read_vectors, write_vectors

__all__ = [
    "Document",
    "EmbeddingMatrix",
    "FunnelReport",
    "KeywordList",
    "RawFiling",
    "extract_item7",
    "load_keywords",
    "match_keywords",
    "read_vectors",
    "write_vectors",
    "__version__",
]
