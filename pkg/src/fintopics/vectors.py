"""Embedding matrices, the FTSVEC01 binary vector format, and cosine helpers.

FTSVEC01 layout (all integers little-endian):

    bytes 0..7    magic b"FTSVEC01"
    bytes 8..11   dim   (u32)
    bytes 12..19  rows  (u64)
    then rows*dim float32 values, row-major
    then one length-prefixed UTF-8 key per row (u32 length + bytes)

Keys live inside the file so a matrix is self-describing across process
boundaries; the embedding bridge writes this format and the pipeline reads it.
"""

import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import BadMagic, NaNDetected, TruncatedFile, ZeroVector

MAGIC = b"FTSVEC01"


@dataclass
class EmbeddingMatrix:
    """Dense float32 matrix with one sentence key per row."""

    data: np.ndarray  # (rows, dim) float32
    keys: list[str]

    def __post_init__(self):
        self.data = np.ascontiguousarray(self.data, dtype=np.float32)
        if self.data.ndim != 2:
            raise ValueError("embedding data must be 2-D")
        if len(self.keys) != self.data.shape[0]:
            raise ValueError(
                f"{len(self.keys)} keys for {self.data.shape[0]} rows"
            )
        if not np.all(np.isfinite(self.data)):
            raise NaNDetected("embedding data contains NaN or Inf")

    @property
    def rows(self) -> int:
        return self.data.shape[0]

    @property
    def dim(self) -> int:
        return self.data.shape[1]


def write_vectors(matrix: EmbeddingMatrix, path: str | Path) -> None:
    """Serialize a matrix to FTSVEC01. Rejects non-finite data up front."""
    if not np.all(np.isfinite(matrix.data)):
        raise NaNDetected("refusing to write NaN/Inf vectors")
    path = Path(path)
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<I", matrix.dim))
        fh.write(struct.pack("<Q", matrix.rows))
        fh.write(matrix.data.astype("<f4", copy=False).tobytes())
        for key in matrix.keys:
            raw = key.encode("utf-8")
            fh.write(struct.pack("<I", len(raw)))
            fh.write(raw)


def read_vectors(path: str | Path) -> EmbeddingMatrix:
    """Parse an FTSVEC01 file, validating magic, counts, and finiteness."""
    blob = Path(path).read_bytes()
    if len(blob) < len(MAGIC) + 12:
        raise TruncatedFile(f"{path}: shorter than the fixed header")
    if blob[:8] != MAGIC:
        raise BadMagic(f"{path}: expected {MAGIC!r}, got {blob[:8]!r}")
    dim = struct.unpack_from("<I", blob, 8)[0]
    rows = struct.unpack_from("<Q", blob, 12)[0]
    offset = 20
    nbytes = rows * dim * 4
    if len(blob) < offset + nbytes:
        raise TruncatedFile(f"{path}: float payload cut short")
    data = np.frombuffer(blob, dtype="<f4", count=rows * dim, offset=offset)
    data = data.reshape(rows, dim).copy()
    offset += nbytes
    keys = []
    for _ in range(rows):
        if len(blob) < offset + 4:
            raise TruncatedFile(f"{path}: key table cut short")
        (klen,) = struct.unpack_from("<I", blob, offset)
        offset += 4
        if len(blob) < offset + klen:
            raise TruncatedFile(f"{path}: key bytes cut short")
        keys.append(blob[offset : offset + klen].decode("utf-8"))
        offset += klen
    if not np.all(np.isfinite(data)):
        raise NaNDetected(f"{path}: NaN/Inf in float payload")
    return EmbeddingMatrix(data=data, keys=keys)


def cosine(a: np.ndarray, b: np.ndarray) -> float:
    """Cosine similarity of two nonzero vectors, computed in float64."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    na = np.linalg.norm(a)
    nb = np.linalg.norm(b)
    if na == 0.0 or nb == 0.0:
        raise ZeroVector("cosine undefined for zero vectors")
    return float(np.dot(a, b) / (na * nb))


def normalize_rows(matrix: EmbeddingMatrix) -> EmbeddingMatrix:
    """Rescale every row to unit Euclidean norm."""
    norms = np.linalg.norm(matrix.data.astype(np.float64), axis=1)
    if np.any(norms == 0.0):
        raise ZeroVector("cannot normalize a zero row")
    data = (matrix.data.astype(np.float64) / norms[:, None]).astype(np.float32)
    return EmbeddingMatrix(data=data, keys=list(matrix.keys))
