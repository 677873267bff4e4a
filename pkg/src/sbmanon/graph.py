"""Undirected simple graphs on dense vertex ids, permutations and labelings.

Edges are kept as an ``(m, 2)`` int64 array with ``u < v`` in each row and rows
sorted lexicographically.  Set operations go through the scalar key
``u * n + v``, which is order-preserving for canonical edges.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "Graph",
    "CommunityLabeling",
    "EdgeDifference",
    "identity",
    "inverse",
    "compose",
    "check_permutation",
    "apply_permutation",
    "intersect",
    "symmetric_edge_difference",
    "isolated_vertices",
    "is_community_preserving",
]


def _readonly(a):
    a.setflags(write=False)
    return a


class Graph:
    """Immutable undirected simple graph on vertices ``0..n-1``."""

    __slots__ = ("n", "edges", "_keys", "_csr", "_degrees")

    def __init__(self, n, edges=None):
        n = int(n)
        if n < 0:
            raise ValueError("vertex count must be non-negative")
        if edges is None:
            e = np.empty((0, 2), dtype=np.int64)
        else:
            e = np.asarray(edges, dtype=np.int64)
            if e.size == 0:
                e = np.empty((0, 2), dtype=np.int64)
            if e.ndim != 2 or e.shape[1] != 2:
                raise ValueError("edges must have shape (m, 2)")
        if len(e):
            if e.min() < 0 or e.max() >= n:
                raise ValueError(f"edge endpoint out of range for n={n}")
            if np.any(e[:, 0] == e[:, 1]):
                raise ValueError("self-loops are not allowed")
        lo = np.minimum(e[:, 0], e[:, 1])
        hi = np.maximum(e[:, 0], e[:, 1])
        keys = np.unique(lo * n + hi)
        self.n = n
        self._keys = _readonly(keys)
        self.edges = _readonly(np.stack([keys // n, keys % n], axis=1) if n else e[:0])
        self._csr = None
        self._degrees = None

    @classmethod
    def from_keys(cls, n, keys):
        """Build from (possibly unsorted, duplicated) canonical pair keys."""
        keys = np.unique(np.asarray(keys, dtype=np.int64))
        g = cls.__new__(cls)
        g.n = int(n)
        g._keys = _readonly(keys)
        g.edges = _readonly(np.stack([keys // n, keys % n], axis=1) if n else np.empty((0, 2), np.int64))
        g._csr = None
        g._degrees = None
        return g

    @classmethod
    def empty(cls, n):
        return cls(n)

    @classmethod
    def complete(cls, n):
        i, j = np.triu_indices(n, k=1)
        return cls.from_keys(n, i.astype(np.int64) * n + j)

    @property
    def keys(self):
        return self._keys

    @property
    def m(self):
        return len(self._keys)

    def __len__(self):
        return self.n

    def __repr__(self):
        return f"Graph(n={self.n}, m={self.m})"

    def __eq__(self, other):
        if not isinstance(other, Graph):
            return NotImplemented
        return self.n == other.n and np.array_equal(self._keys, other._keys)

    __hash__ = None

    @property
    def degrees(self):
        if self._degrees is None:
            d = np.bincount(self.edges.ravel(), minlength=self.n).astype(np.int64)
            self._degrees = _readonly(d)
        return self._degrees

    @property
    def csr(self):
        """``(indptr, indices)`` of the symmetric adjacency, neighbors sorted."""
        if self._csr is None:
            src = np.concatenate([self.edges[:, 0], self.edges[:, 1]])
            dst = np.concatenate([self.edges[:, 1], self.edges[:, 0]])
            order = np.lexsort((dst, src))
            indices = dst[order]
            indptr = np.zeros(self.n + 1, dtype=np.int64)
            np.cumsum(np.bincount(src, minlength=self.n), out=indptr[1:])
            self._csr = (_readonly(indptr), _readonly(indices.astype(np.int64)))
        return self._csr

    def neighbors(self, i):
        indptr, indices = self.csr
        return indices[indptr[i]:indptr[i + 1]]

    def has_edge(self, i, j):
        if i == j:
            return False
        lo, hi = (i, j) if i < j else (j, i)
        k = lo * self.n + hi
        pos = np.searchsorted(self._keys, k)
        return bool(pos < len(self._keys) and self._keys[pos] == k)

    def adjacency(self):
        """Dense boolean adjacency matrix; meant for small graphs."""
        a = np.zeros((self.n, self.n), dtype=bool)
        a[self.edges[:, 0], self.edges[:, 1]] = True
        a[self.edges[:, 1], self.edges[:, 0]] = True
        return a

    def edge_set(self):
        return {(int(u), int(v)) for u, v in self.edges}


def _pair_keys(u, v, n):
    lo = np.minimum(u, v)
    hi = np.maximum(u, v)
    return lo * n + hi


# -- permutations -----------------------------------------------------------

def check_permutation(phi, n=None):
    """Return ``phi`` as an int64 array after checking it is a bijection."""
    phi = np.asarray(phi, dtype=np.int64)
    if phi.ndim != 1:
        raise ValueError("permutation must be one-dimensional")
    if n is not None and len(phi) != n:
        raise ValueError(f"permutation has length {len(phi)}, expected {n}")
    if len(phi) and (phi.min() < 0 or phi.max() >= len(phi)):
        raise ValueError("permutation entries out of range")
    if len(np.unique(phi)) != len(phi):
        raise ValueError("permutation is not a bijection")
    return phi


def identity(n):
    return np.arange(n, dtype=np.int64)


def inverse(phi):
    phi = np.asarray(phi, dtype=np.int64)
    inv = np.empty_like(phi)
    inv[phi] = np.arange(len(phi), dtype=np.int64)
    return inv


def compose(phi, psi):
    """``(phi o psi)(i) = phi[psi[i]]``."""
    return np.asarray(phi, dtype=np.int64)[np.asarray(psi, dtype=np.int64)]


# -- labelings --------------------------------------------------------------

class CommunityLabeling:
    """Vertex -> community map with ``C`` nonempty communities."""

    __slots__ = ("labels", "C", "_sizes")

    def __init__(self, labels, C=None):
        labels = np.asarray(labels, dtype=np.int64)
        if labels.ndim != 1:
            raise ValueError("labels must be one-dimensional")
        if C is None:
            C = int(labels.max()) + 1 if len(labels) else 0
        C = int(C)
        if len(labels) and (labels.min() < 0 or labels.max() >= C):
            raise ValueError(f"labels must lie in 0..{C - 1}")
        sizes = np.bincount(labels, minlength=C)
        if np.any(sizes == 0):
            raise ValueError("every community must be nonempty")
        self.labels = _readonly(labels.copy())
        self.C = C
        self._sizes = _readonly(sizes.astype(np.int64))

    @classmethod
    def equal_blocks(cls, n, C):
        """Vertices ``0..n/C-1`` get label 0, the next block label 1, and so on."""
        if C <= 0 or n % C:
            raise ValueError(f"C={C} must divide n={n}")
        return cls(np.repeat(np.arange(C, dtype=np.int64), n // C), C)

    @classmethod
    def from_partition(cls, labels):
        """Relabel arbitrary ids to ``0..C-1`` in order of first appearance."""
        labels = np.asarray(labels)
        _, first, inv = np.unique(labels, return_index=True, return_inverse=True)
        rank = np.empty(len(first), dtype=np.int64)
        rank[np.argsort(first, kind="stable")] = np.arange(len(first))
        return cls(rank[inv.ravel()], len(first))

    @property
    def n(self):
        return len(self.labels)

    @property
    def sizes(self):
        return self._sizes

    def members(self, k):
        return np.flatnonzero(self.labels == k)

    def communities(self):
        order = np.argsort(self.labels, kind="stable")
        return np.split(order, np.cumsum(self._sizes)[:-1])

    def is_equal_size(self):
        return bool(self.C and np.all(self._sizes == self._sizes[0]))

    def permuted(self, phi):
        """Labeling of ``apply_permutation(G, phi)``: vertex ``phi[i]`` keeps ``i``'s label."""
        phi = check_permutation(phi, self.n)
        out = np.empty_like(self.labels)
        out[phi] = self.labels
        return CommunityLabeling(out, self.C)

    def __eq__(self, other):
        if not isinstance(other, CommunityLabeling):
            return NotImplemented
        return self.C == other.C and np.array_equal(self.labels, other.labels)

    __hash__ = None

    def __repr__(self):
        return f"CommunityLabeling(n={self.n}, C={self.C})"


@dataclass(frozen=True)
class EdgeDifference:
    """Symmetric edge difference split into intra- and inter-community pairs."""

    intra: np.ndarray
    inter: np.ndarray

    @property
    def n_intra(self):
        return len(self.intra)

    @property
    def n_inter(self):
        return len(self.inter)

    def __len__(self):
        return self.n_intra + self.n_inter


# -- operations -------------------------------------------------------------

def apply_permutation(G: Graph, phi) -> Graph:
    """Relabel vertex ``i`` as ``phi[i]``."""
    phi = check_permutation(phi)
    if len(phi) != G.n:
        raise ValueError(f"permutation length {len(phi)} does not match n={G.n}")
    e = phi[G.edges]
    return Graph.from_keys(G.n, _pair_keys(e[:, 0], e[:, 1], G.n))


def _same_size(*graphs):
    n = graphs[0].n
    for g in graphs[1:]:
        if g.n != n:
            raise ValueError(f"graph sizes differ: {n} vs {g.n}")
    return n


def intersect(G1: Graph, G2: Graph) -> Graph:
    n = _same_size(G1, G2)
    return Graph.from_keys(n, np.intersect1d(G1.keys, G2.keys, assume_unique=True))


def symmetric_edge_difference(G1: Graph, G2: Graph, phi, L: CommunityLabeling) -> EdgeDifference:
    """Pairs that are edges in exactly one of ``G1`` and ``phi(G2)``, split by ``L``."""
    n = _same_size(G1, G2)
    if L.n != n:
        raise ValueError("labeling size does not match graphs")
    pushed = apply_permutation(G2, phi)
    keys = np.setxor1d(G1.keys, pushed.keys, assume_unique=True)
    u, v = keys // n, keys % n
    same = L.labels[u] == L.labels[v]
    pairs = np.stack([u, v], axis=1)
    return EdgeDifference(intra=pairs[same], inter=pairs[~same])


def isolated_vertices(G: Graph, L: CommunityLabeling):
    """Per-community lists of degree-0 vertices; ``len(result[k])`` is ``X_k``."""
    if L.n != G.n:
        raise ValueError("labeling size does not match graph")
    iso = np.flatnonzero(G.degrees == 0)
    lab = L.labels[iso]
    return [iso[lab == k] for k in range(L.C)]


def is_community_preserving(phi, L: CommunityLabeling, L_target: CommunityLabeling | None = None) -> bool:
    """True iff ``label(phi(i)) == label(i)`` for every vertex.

    With ``L_target`` the image label is read from a second labeling, which is
    how a map between two differently labeled graphs is checked.
    """
    phi = np.asarray(phi, dtype=np.int64)
    target = L if L_target is None else L_target
    if len(phi) != L.n or target.n != L.n:
        raise ValueError("permutation and labeling sizes differ")
    return bool(np.array_equal(target.labels[phi], L.labels))
