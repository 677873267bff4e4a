"""Seeded generation of SBM graphs, correlated pairs and sanitized variants.

All randomness comes from numpy's ``PCG64`` bit generator driven by a
``SeedSequence``; sub-streams are derived with ``SeedSequence.spawn`` so a
given integer seed replays identically on any machine.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from .errors import InfeasibleError, ParameterError
from .graph import CommunityLabeling, Graph, apply_permutation

__all__ = [
    "SbmParams",
    "SampleParams",
    "CorrelatedPair",
    "make_rng",
    "spawn_seeds",
    "sample_sbm",
    "sample_correlated_pair",
    "subsample_edges",
    "rewire_edges",
    "anonymize",
    "pair_count",
    "triangle_pairs",
]


def make_rng(seed) -> np.random.Generator:
    """PCG64 generator for an int, ``SeedSequence`` or existing ``Generator``."""
    if isinstance(seed, np.random.Generator):
        return seed
    if isinstance(seed, np.random.SeedSequence):
        return np.random.Generator(np.random.PCG64(seed))
    if seed is None:
        raise ParameterError("a seed is required for reproducible sampling")
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(int(seed))))


def spawn_seeds(seed, k):
    """``k`` independent child seed sequences of ``seed``."""
    ss = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(int(seed))
    return ss.spawn(k)


def _check_prob(name, x):
    if not (0.0 <= x <= 1.0) or math.isnan(x):
        raise ParameterError(f"{name}={x} is not a probability in [0, 1]")


@dataclass(frozen=True)
class SbmParams:
    """Planted partition parameters.

    Give either the rate constants ``a, b`` (``p = a log n / n`` with natural
    log) or the raw probabilities ``p, q``.
    """

    n: int
    C: int = 2
    a: float | None = None
    b: float | None = None
    p: float | None = None
    q: float | None = None

    def __post_init__(self):
        if self.n <= 0:
            raise ParameterError("n must be positive")
        if self.C <= 0:
            raise ParameterError("C must be positive")
        if self.n % self.C:
            raise ParameterError(f"C={self.C} must divide n={self.n}")
        rates = self.a is not None or self.b is not None
        probs = self.p is not None or self.q is not None
        if rates == probs:
            raise ParameterError("give exactly one of (a, b) or (p, q)")
        if rates:
            if self.a is None or self.b is None:
                raise ParameterError("both a and b are required")
            if self.a < 0 or self.b < 0:
                raise ParameterError("rate constants must be non-negative")
            scale = math.log(self.n) / self.n if self.n > 1 else 0.0
            object.__setattr__(self, "p", self.a * scale)
            object.__setattr__(self, "q", self.b * scale)
        else:
            if self.p is None or self.q is None:
                raise ParameterError("both p and q are required")
            if self.n > 1:
                scale = math.log(self.n) / self.n
                object.__setattr__(self, "a", self.p / scale)
                object.__setattr__(self, "b", self.q / scale)
        _check_prob("p", self.p)
        _check_prob("q", self.q)
        if self.q > self.p:
            raise ParameterError(f"expected q <= p, got p={self.p}, q={self.q}")

    @property
    def block_size(self):
        return self.n // self.C

    def to_dict(self):
        return asdict(self)

    @classmethod
    def from_dict(cls, d):
        if d.get("a") is not None and d.get("b") is not None:
            return cls(n=d["n"], C=d.get("C", 2), a=d["a"], b=d["b"])
        return cls(n=d["n"], C=d.get("C", 2), p=d["p"], q=d["q"])


@dataclass(frozen=True)
class SampleParams:
    s1: float = 1.0
    s2: float = 1.0
    t: float = 1.0

    def __post_init__(self):
        _check_prob("s1", self.s1)
        _check_prob("s2", self.s2)
        _check_prob("t", self.t)

    def to_dict(self):
        return asdict(self)


@dataclass(frozen=True)
class CorrelatedPair:
    """Ground graph, both subsamples and the anonymized release.

    ``sensitive`` is the ``s2``-retained graph before publisher subsampling;
    ``g2`` is the graph actually released (``sensitive`` thinned by ``t``) and
    ``anonymized == apply_permutation(g2, pi)``.
    """

    ground: Graph
    g1: Graph
    g2: Graph
    sensitive: Graph
    labeling: CommunityLabeling
    pi: np.ndarray
    anonymized: Graph
    sbm: SbmParams
    sample: SampleParams
    seed: int

    @property
    def anonymized_labeling(self):
        return self.labeling.permuted(self.pi)


def pair_count(s):
    return s * (s - 1) // 2


def triangle_pairs(idx, s):
    """Decode row-major indices of the strict upper triangle of an ``s x s`` grid."""
    idx = np.asarray(idx, dtype=np.int64)
    if idx.size == 0:
        z = np.empty(0, dtype=np.int64)
        return z, z.copy()
    two_s = 2 * s - 1
    i = np.floor((two_s - np.sqrt(np.maximum(two_s * two_s - 8.0 * idx, 0.0))) / 2).astype(np.int64)
    i = np.clip(i, 0, s - 2)

    def start(r):
        return r * (2 * s - r - 1) // 2

    # float rounding can be off by one row either way
    for _ in range(2):
        i = np.where(start(i) > idx, i - 1, i)
        i = np.where(start(i + 1) <= idx, i + 1, i)
    j = idx - start(i) + i + 1
    return i, j


def _sample_indices(rng, total, prob):
    """Uniform subset of ``range(total)`` where each element is kept w.p. ``prob``."""
    if total == 0 or prob <= 0.0:
        return np.empty(0, dtype=np.int64)
    if prob >= 1.0:
        return np.arange(total, dtype=np.int64)
    k = int(rng.binomial(total, prob))
    return np.sort(rng.choice(total, size=k, replace=False)).astype(np.int64)


def sample_sbm(params: SbmParams, seed):
    """Draw ``G ~ SBM(n, p, q)`` with equal contiguous blocks.

    Each block pair receives a binomial edge count followed by a uniform
    choice of that many distinct vertex pairs, which is the same law as
    independent Bernoulli trials per pair.
    """
    rng = make_rng(seed)
    n, C, s = params.n, params.C, params.block_size
    labeling = CommunityLabeling.equal_blocks(n, C)
    chunks = []
    for k in range(C):
        off_k = k * s
        idx = _sample_indices(rng, pair_count(s), params.p)
        i, j = triangle_pairs(idx, s)
        chunks.append((i + off_k) * n + (j + off_k))
        for l in range(k + 1, C):
            off_l = l * s
            idx = _sample_indices(rng, s * s, params.q)
            chunks.append((idx // s + off_k) * n + (idx % s + off_l))
    keys = np.concatenate(chunks) if chunks else np.empty(0, dtype=np.int64)
    return Graph.from_keys(n, keys), labeling


def subsample_edges(G: Graph, t, seed) -> Graph:
    """Keep each edge independently with probability ``t``."""
    _check_prob("t", t)
    rng = make_rng(seed)
    keep = rng.random(G.m) < t
    return Graph.from_keys(G.n, G.keys[keep])


def anonymize(G: Graph, seed):
    """Uniform random relabeling; returns ``(pi, pi(G))``."""
    rng = make_rng(seed)
    pi = rng.permutation(G.n).astype(np.int64)
    return pi, apply_permutation(G, pi)


def sample_correlated_pair(sbm: SbmParams, sample: SampleParams, seed) -> CorrelatedPair:
    """Ground SBM graph plus independently edge-subsampled ``G1`` and ``G2``."""
    if not isinstance(seed, (int, np.integer)):
        raise ParameterError("correlated pairs take an integer seed")
    s_ground, s_g1, s_g2, s_t, s_pi = spawn_seeds(seed, 5)
    ground, labeling = sample_sbm(sbm, s_ground)
    g1 = subsample_edges(ground, sample.s1, s_g1)
    sensitive = subsample_edges(ground, sample.s2, s_g2)
    g2 = sensitive if sample.t == 1.0 else subsample_edges(sensitive, sample.t, s_t)
    pi, anon = anonymize(g2, s_pi)
    return CorrelatedPair(
        ground=ground, g1=g1, g2=g2, sensitive=sensitive, labeling=labeling,
        pi=pi, anonymized=anon, sbm=sbm, sample=sample, seed=int(seed),
    )


def rewire_edges(G: Graph, fraction, seed) -> Graph:
    """Replace ``round(fraction * m)`` random edges by random non-edges of ``G``.

    Uniform edge replacement; degrees are not preserved.
    """
    _check_prob("fraction", fraction)
    rng = make_rng(seed)
    n, m = G.n, G.m
    k = int(math.floor(fraction * m + 0.5))
    if k == 0:
        return G
    total = pair_count(n)
    free = total - m
    if free < k:
        raise InfeasibleError(f"need {k} non-edges but only {free} exist")
    drop = rng.choice(m, size=k, replace=False)
    kept = np.delete(G.keys, drop)

    if free <= 4 * k or total <= 2_000_000:
        # enumerate the complement directly
        i, j = np.triu_indices(n, k=1)
        all_keys = i.astype(np.int64) * n + j
        non_edges = np.setdiff1d(all_keys, G.keys, assume_unique=True)
        added = non_edges[rng.choice(len(non_edges), size=k, replace=False)]
    else:
        added = np.empty(0, dtype=np.int64)
        while len(added) < k:
            need = k - len(added)
            idx = rng.integers(0, total, size=2 * need + 16)
            i, j = triangle_pairs(idx, n)
            cand = i * n + j
            cand = cand[~np.isin(cand, G.keys)]
            # keep first occurrences in draw order so the result is seed-stable
            cand = np.concatenate([added, cand])
            _, first = np.unique(cand, return_index=True)
            added = cand[np.sort(first)][:k]
    return Graph.from_keys(n, np.concatenate([kept, added]))
