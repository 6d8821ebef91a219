"""Hierarchical density-based clustering with noise.

The pipeline clusters reduced sentence embeddings where topic clusters are
dense regions of very different sizes, so the algorithm follows the
density-hierarchy recipe end to end:

1. core distance of each point: distance to its min_samples-th neighbor;
2. mutual reachability d_mr(a, b) = max(core_a, core_b, d(a, b));
3. exact minimum spanning tree over d_mr (Prim, dense);
4. single-linkage hierarchy from the sorted MST edges;
5. condense the hierarchy at min_cluster_size;
6. pick clusters by maximal stability (excess of mass).

Points that never join a selected cluster keep the noise label -1. The
whole computation is deterministic: ties in edge weights break on point
indices, and condensed-cluster ids follow traversal order.
"""

from dataclasses import dataclass

import numpy as np

from .errors import TooFewPoints
from .vectors import EmbeddingMatrix

NOISE = -1


@dataclass
class ClusterAssignment:
    labels: np.ndarray  # int per row; -1 = noise
    n_clusters: int
    min_cluster_size: int
    min_samples: int


def pairwise_distances(data: np.ndarray) -> np.ndarray:
    x = np.asarray(data, dtype=np.float64)
    sq = np.sum(x * x, axis=1)
    d2 = sq[:, None] + sq[None, :] - 2.0 * (x @ x.T)
    np.maximum(d2, 0.0, out=d2)
    d = np.sqrt(d2)
    np.fill_diagonal(d, 0.0)
    return d


def core_distances(dist: np.ndarray, min_samples: int) -> np.ndarray:
    """Distance to the min_samples-th nearest neighbor (self excluded).

    When min_samples reaches the point count the farthest neighbor is used,
    which makes the clustering maximally conservative (documented degenerate
    case: everything may become noise or one cluster).
    """
    n = dist.shape[0]
    k = min(min_samples, n - 1)
    part = np.sort(dist, axis=1)
    return part[:, k]


def mutual_reachability(dist: np.ndarray, core: np.ndarray) -> np.ndarray:
    mr = np.maximum(dist, np.maximum(core[:, None], core[None, :]))
    np.fill_diagonal(mr, 0.0)
    return mr


def minimum_spanning_tree(weights: np.ndarray) -> np.ndarray:
    """Prim's algorithm on a dense symmetric weight matrix.

    Returns edges as an (n-1, 3) float array [src, dst, weight]; vertex 0 is
    the root, so the result is unique up to equal-weight edge choices, which
    resolve to the smallest destination index via argmin.
    """
    n = weights.shape[0]
    in_tree = np.zeros(n, dtype=bool)
    best = weights[0].copy()
    src = np.zeros(n, dtype=np.int64)
    in_tree[0] = True
    best[0] = np.inf
    edges = np.empty((n - 1, 3))
    for t in range(n - 1):
        nxt = int(np.argmin(best))
        edges[t] = (src[nxt], nxt, best[nxt])
        in_tree[nxt] = True
        row = weights[nxt]
        improved = row < best
        improved[in_tree] = False
        best[improved] = row[improved]
        src[improved] = nxt
        best[nxt] = np.inf
    return edges


class _UnionFind:
    def __init__(self, n: int):
        self.parent = list(range(n))

    def find(self, a: int) -> int:
        root = a
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[a] != root:
            self.parent[a], a = root, self.parent[a]
        return root

    def union(self, a: int, b: int) -> None:
        self.parent[self.find(a)] = self.find(b)


def _single_linkage(edges: np.ndarray, n: int):
    """Merge MST edges in weight order into a dendrogram.

    Returns (children, dists) where node n+t merges children[t] at dists[t];
    leaves are 0..n-1.
    """
    order = np.lexsort((edges[:, 1], edges[:, 0], edges[:, 2]))
    uf = _UnionFind(n)
    node_of = list(range(n))  # component root -> dendrogram node id
    children = []
    dists = []
    for a, b, w in edges[order]:
        ra, rb = uf.find(int(a)), uf.find(int(b))
        children.append((node_of[ra], node_of[rb]))
        dists.append(w)
        uf.union(ra, rb)
        node_of[uf.find(ra)] = n + len(children) - 1
    return children, dists


def _condense(children, dists, n: int, min_cluster_size: int):
    """Condensed tree rows (parent, child, lambda, size); child < n is a point.

    Splitting off a side smaller than min_cluster_size does not create a new
    cluster: its points fall out of the running cluster at the split's lambda
    and the cluster continues through the big side.
    """
    n_nodes = n + len(children)
    root = n_nodes - 1

    def node_points(node):
        stack = [node]
        points = []
        while stack:
            cur = stack.pop()
            if cur < n:
                points.append(cur)
            else:
                stack.extend(children[cur - n])
        return points

    def node_size(node):
        return 1 if node < n else subtree_size[node - n]

    subtree_size = [0] * len(children)
    for t, (l, r) in enumerate(children):
        subtree_size[t] = node_size(l) + node_size(r)

    rows = []  # (parent_cid, child_cid_or_point, lambda, size)
    next_cid = [1]
    stack = [(root, 0)]  # (dendrogram node, condensed cluster id)
    while stack:
        node, cid = stack.pop()
        if node < n:
            continue
        left, right = children[node - n]
        dist = dists[node - n]
        lam = 1.0 / dist if dist > 0.0 else np.inf
        sl, sr = node_size(left), node_size(right)
        if sl >= min_cluster_size and sr >= min_cluster_size:
            for child in (left, right):
                child_cid = next_cid[0]
                next_cid[0] += 1
                rows.append((cid, -child_cid, lam, node_size(child)))
                stack.append((child, child_cid))
        elif sl < min_cluster_size and sr < min_cluster_size:
            for p in node_points(left) + node_points(right):
                rows.append((cid, p, lam, 1))
        else:
            small, big = (left, right) if sl < min_cluster_size else (right, left)
            for p in node_points(small):
                rows.append((cid, p, lam, 1))
            stack.append((big, cid))
    return rows


def _extract_clusters(rows):
    """Excess-of-mass selection over the condensed tree; root never selected."""
    birth = {0: 0.0}
    cluster_children: dict[int, list[int]] = {0: []}
    for parent, child, lam, _ in rows:
        if child < 0:
            cid = -child
            birth[cid] = lam
            cluster_children[cid] = []
            cluster_children[parent].append(cid)
    stability = {c: 0.0 for c in birth}
    for parent, child, lam, size in rows:
        contribution = (lam - birth[parent]) * size
        if np.isfinite(contribution):
            stability[parent] += contribution
        else:
            stability[parent] = np.inf

    selected = {c: True for c in birth if c != 0}
    for cid in sorted(birth, reverse=True):
        if cid == 0:
            continue
        child_sum = sum(stability[c] for c in cluster_children[cid])
        if cluster_children[cid] and child_sum > stability[cid]:
            selected[cid] = False
            stability[cid] = child_sum
        else:
            stack = list(cluster_children[cid])
            while stack:
                sub = stack.pop()
                selected[sub] = False
                stack.extend(cluster_children[sub])
    return [c for c in sorted(selected) if selected[c]], cluster_children


def density_cluster(
    reduced: EmbeddingMatrix, min_cluster_size: int, min_samples: int
) -> ClusterAssignment:
    """Cluster reduced vectors; unassigned points get the noise label -1."""
    n = reduced.rows
    if n < max(2, min_samples):
        raise TooFewPoints(f"{n} rows with min_samples={min_samples}")
    if min_cluster_size < 2:
        raise ValueError("min_cluster_size must be at least 2")
    dist = pairwise_distances(reduced.data)
    core = core_distances(dist, min_samples)
    mst = minimum_spanning_tree(mutual_reachability(dist, core))
    children, dists = _single_linkage(mst, n)
    rows = _condense(children, dists, n, min_cluster_size)
    chosen, cluster_children = _extract_clusters(rows)

    labels = np.full(n, NOISE, dtype=np.int64)
    label_of = {cid: i for i, cid in enumerate(chosen)}
    points_of: dict[int, list[int]] = {}
    for parent, child, _, _ in rows:
        if child >= 0:
            points_of.setdefault(parent, []).append(child)
    for cid in chosen:
        stack = [cid]
        while stack:
            cur = stack.pop()
            for p in points_of.get(cur, ()):
                labels[p] = label_of[cid]
            stack.extend(cluster_children.get(cur, ()))
    return ClusterAssignment(
        labels=labels,
        n_clusters=len(chosen),
        min_cluster_size=min_cluster_size,
        min_samples=min_samples,
    )


def count_outliers(assignment: ClusterAssignment) -> int:
    return int(np.sum(assignment.labels == NOISE))
