"""Modularity-based community detection and partition comparison."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import sparse
from scipy.optimize import linear_sum_assignment

from . import _kernels
from .graph import CommunityLabeling, Graph
from .synth import make_rng

__all__ = [
    "DetectedPartition",
    "CommunityComparison",
    "detect_communities",
    "modularity",
    "jaccard",
    "match_communities",
    "label_agreement",
]

DEFAULT_MIN_SIZE = 4


@dataclass(frozen=True)
class DetectedPartition:
    labeling: CommunityLabeling
    modularity: float
    min_size_filter: int = DEFAULT_MIN_SIZE
    levels: int = 0

    @property
    def sizes(self):
        return self.labeling.sizes

    def true_communities(self):
        """Indices of communities with at least ``min_size_filter`` members."""
        return np.flatnonzero(self.labeling.sizes >= self.min_size_filter)

    @property
    def count(self):
        return int(len(self.true_communities()))


def modularity(G: Graph, L: CommunityLabeling) -> float:
    """Newman modularity at resolution 1; 0 for an edgeless graph."""
    if L.n != G.n:
        raise ValueError("labeling size does not match graph")
    m = G.m
    if m == 0:
        return 0.0
    lab = L.labels
    u, v = G.edges[:, 0], G.edges[:, 1]
    inside = lab[u] == lab[v]
    e_c = np.bincount(lab[u[inside]], minlength=L.C).astype(np.float64)
    d_c = np.bincount(lab, weights=G.degrees.astype(np.float64), minlength=L.C)
    return float(np.sum(e_c / m - (d_c / (2.0 * m)) ** 2))


def _weighted_csr(n, rows, cols, w):
    mat = sparse.coo_matrix((w, (rows, cols)), shape=(n, n)).tocsr()
    mat.sum_duplicates()
    mat.sort_indices()
    return (mat.indptr.astype(np.int64), mat.indices.astype(np.int64),
            mat.data.astype(np.float64))


def _aggregate(indptr, indices, weights, comm, k):
    n = len(indptr) - 1
    rows = np.repeat(np.arange(n, dtype=np.int64), np.diff(indptr))
    return _weighted_csr(k, comm[rows], comm[indices], weights)


def _renumber(comm):
    _, first, inv = np.unique(comm, return_index=True, return_inverse=True)
    rank = np.empty(len(first), dtype=np.int64)
    rank[np.argsort(first, kind="stable")] = np.arange(len(first))
    return rank[inv.ravel()], len(first)


def detect_communities(G: Graph, seed, min_size_filter=DEFAULT_MIN_SIZE,
                       max_levels=50, max_sweeps=1000) -> DetectedPartition:
    """Two-phase Louvain: seeded local moving, then aggregation, until stable.

    Each level visits vertices in a fresh seeded random order.  The returned
    labels are numbered by first appearance.
    """
    n = G.n
    if n == 0:
        raise ValueError("cannot detect communities on an empty vertex set")
    if G.m == 0:
        lab = CommunityLabeling(np.arange(n, dtype=np.int64), n)
        return DetectedPartition(lab, 0.0, min_size_filter, 0)

    rng = make_rng(seed)
    e = G.edges
    indptr, indices, weights = _weighted_csr(
        n, np.concatenate([e[:, 0], e[:, 1]]), np.concatenate([e[:, 1], e[:, 0]]),
        np.ones(2 * G.m))
    m2 = 2.0 * G.m
    membership = np.arange(n, dtype=np.int64)
    levels = 0
    for _ in range(max_levels):
        k = len(indptr) - 1
        degrees = np.bincount(np.repeat(np.arange(k), np.diff(indptr)), weights=weights, minlength=k)
        comm = np.arange(k, dtype=np.int64)
        order = rng.permutation(k).astype(np.int64)
        moved = _kernels.louvain_move(indptr, indices, weights, degrees, order, comm, m2, max_sweeps)
        if not moved:
            break
        comm, k_new = _renumber(comm)
        membership = comm[membership]
        levels += 1
        indptr, indices, weights = _aggregate(indptr, indices, weights, comm, k_new)
    labels, C = _renumber(membership)
    lab = CommunityLabeling(labels, C)
    return DetectedPartition(lab, modularity(G, lab), min_size_filter, levels)


def jaccard(A, B) -> float:
    A, B = set(A), set(B)
    if not A and not B:
        return 1.0
    return len(A & B) / len(A | B)


@dataclass
class CommunityComparison:
    base_index: np.ndarray      # filtered base communities, largest first
    base_sizes: np.ndarray
    best_match: np.ndarray      # index into the other partition
    best_jaccard: np.ndarray
    preservation: dict          # epsilon -> count with J >= 1 - epsilon
    base_stats: dict = field(default_factory=dict)
    other_stats: dict = field(default_factory=dict)

    def top_jaccard(self, k=5):
        return self.best_jaccard[:k]


def _size_stats(part: DetectedPartition):
    keep = part.true_communities()
    s = part.sizes[keep]
    if len(s) == 0:
        return {"count": 0, "min": 0, "max": 0}
    return {"count": int(len(s)), "min": int(s.min()), "max": int(s.max())}


def match_communities(base: DetectedPartition, other: DetectedPartition,
                      eps=(0.1, 0.15)) -> CommunityComparison:
    """Best Jaccard match in ``other`` for every (size-filtered) base community.

    Matches are chosen independently per base community, so two base
    communities may share a best match.
    """
    lb, lo = base.labeling, other.labeling
    if lb.n != lo.n:
        raise ValueError("partitions cover different vertex sets")
    inter = sparse.coo_matrix(
        (np.ones(lb.n), (lb.labels, lo.labels)), shape=(lb.C, lo.C)).tocsr()
    inter.sum_duplicates()
    keep = base.true_communities()
    keep = keep[np.argsort(-lb.sizes[keep], kind="stable")]
    best_j = np.zeros(len(keep))
    best_c = np.full(len(keep), -1, dtype=np.int64)
    for pos, c in enumerate(keep):
        row = inter.getrow(c)
        cols, vals = row.indices, row.data
        union = lb.sizes[c] + lo.sizes[cols] - vals
        j = vals / union
        at = int(np.argmax(j))
        best_j[pos], best_c[pos] = j[at], cols[at]
    preservation = {float(e): int(np.count_nonzero(best_j >= 1 - e - 1e-12)) for e in eps}
    return CommunityComparison(keep, lb.sizes[keep].copy(), best_c, best_j, preservation,
                               _size_stats(base), _size_stats(other))


def label_agreement(L: CommunityLabeling, truth: CommunityLabeling, exact_limit=10) -> float:
    """Best fraction of matching labels over bijections between label sets.

    Exact assignment when both label counts are at most ``exact_limit``,
    greedy largest-overlap pairing otherwise.
    """
    if L.n != truth.n:
        raise ValueError("labelings differ in length")
    if L.n == 0:
        return 1.0
    conf = np.zeros((L.C, truth.C), dtype=np.int64)
    np.add.at(conf, (L.labels, truth.labels), 1)
    if max(L.C, truth.C) <= exact_limit:
        r, c = linear_sum_assignment(conf, maximize=True)
        hits = conf[r, c].sum()
    else:
        hits = 0
        work = conf.copy()
        for _ in range(min(L.C, truth.C)):
            i, j = np.unravel_index(np.argmax(work), work.shape)
            if work[i, j] <= 0:
                break
            hits += work[i, j]
            work[i, :] = -1
            work[:, j] = -1
    return float(hits) / L.n
