"""Deterministic dimensionality reduction to a fixed component count.

Principal components are found by orthogonal (subspace) iteration on the
covariance matrix, finished with a Rayleigh-Ritz rotation, so the whole
reduction is deterministic given the input. Externally reduced vectors (for
runs that want a manifold method with the exact production settings) enter
through `accept_external_reduction` in the same FTSVEC01 format.
"""

from pathlib import Path

import numpy as np

from .errors import DimensionMismatch, RankDeficient
from .vectors import EmbeddingMatrix, read_vectors


def _fix_signs(components: np.ndarray) -> np.ndarray:
    """Flip each component so its largest-magnitude entry is positive."""
    flipped = components.copy()
    for j in range(flipped.shape[1]):
        pivot = np.argmax(np.abs(flipped[:, j]))
        if flipped[pivot, j] < 0:
            flipped[:, j] = -flipped[:, j]
    return flipped


def principal_components(
    data: np.ndarray, n_components: int, max_iters: int = 300, tol: float = 1e-12
) -> tuple[np.ndarray, np.ndarray]:
    """Top eigenpairs of the covariance of `data` via orthogonal iteration.

    Returns (eigenvalues desc, eigenvectors as columns) with the sign
    convention applied.
    """
    x = np.asarray(data, dtype=np.float64)
    n, d = x.shape
    centered = x - x.mean(axis=0)
    cov = centered.T @ centered / n
    rng = np.random.default_rng(0)
    q = np.linalg.qr(rng.standard_normal((d, n_components)))[0]
    prev = np.zeros(n_components)
    for _ in range(max_iters):
        q, _ = np.linalg.qr(cov @ q)
        eigs = np.diag(q.T @ cov @ q)
        if np.max(np.abs(eigs - prev)) <= tol * max(1.0, np.max(np.abs(eigs))):
            break
        prev = eigs
    # Rayleigh-Ritz: rotate the converged subspace onto exact eigenvectors
    small = q.T @ cov @ q
    vals, rot = np.linalg.eigh(small)
    order = np.argsort(vals)[::-1]
    vals = vals[order]
    components = _fix_signs(q @ rot[:, order])
    return vals, components


def reduce(matrix: EmbeddingMatrix, n_components: int = 10) -> EmbeddingMatrix:
    """Mean-center and project onto the top principal components."""
    if matrix.rows <= n_components:
        raise RankDeficient(
            f"{matrix.rows} rows cannot support {n_components} components"
        )
    data = matrix.data.astype(np.float64)
    _, components = principal_components(data, n_components)
    projected = (data - data.mean(axis=0)) @ components
    return EmbeddingMatrix(data=projected.astype(np.float32), keys=list(matrix.keys))


def accept_external_reduction(
    path: str | Path, n_components: int = 10
) -> EmbeddingMatrix:
    """Load reduced vectors produced out-of-process; dimension must match."""
    matrix = read_vectors(path)
    if matrix.dim != n_components:
        raise DimensionMismatch(
            f"{path}: dim {matrix.dim}, configured n_components {n_components}"
        )
    return matrix
