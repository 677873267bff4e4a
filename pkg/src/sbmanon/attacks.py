"""Deanonymization attacks: exhaustive MAP on small instances and seeded
percolation graph matching (PGM) at scale.

Throughout, a *mapping* is an int array where ``mapping[i]`` is the vertex of
the anonymized graph proposed for vertex ``i`` of the auxiliary graph ``g1``
(``-1`` when unmapped).  The true mapping is the anonymizing permutation.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from . import _kernels
from .errors import CapacityError, ParameterError
from .graph import (
    CommunityLabeling,
    Graph,
    check_permutation,
    inverse,
    isolated_vertices,
    symmetric_edge_difference,
)
from .synth import make_rng

__all__ = [
    "MapConstants",
    "MapScore",
    "PgmParams",
    "AttackResult",
    "AttackMetrics",
    "map_constants",
    "map_log_score",
    "brute_force_map",
    "map_attack",
    "automorphism_confusion",
    "pgm_attack",
    "random_seed_pairs",
    "evaluate_attack",
]

MAP_ENUMERATION_LIMIT = 10_000_000
PGM_PAIR_LIMIT = 400_000_000


@dataclass(frozen=True)
class MapConstants:
    """Per-class posterior bases; ``w = -log c`` is the weight per mismatch."""

    c1: float
    c2: float

    @property
    def w_in(self):
        return math.inf if self.c1 == 0 else -math.log(self.c1)

    @property
    def w_out(self):
        return math.inf if self.c2 == 0 else -math.log(self.c2)


def _c(x, s1, s2):
    num = x * (1 - s1) * (1 - s2)
    den = 1 - x + num
    if num == 0:
        return 0.0
    return num / den


def map_constants(p, q, s1, s2) -> MapConstants:
    for name, v in (("p", p), ("q", q), ("s1", s1), ("s2", s2)):
        if not 0.0 <= v <= 1.0:
            raise ParameterError(f"{name}={v} is not a probability")
    return MapConstants(_c(p, s1, s2), _c(q, s1, s2))


@dataclass(frozen=True)
class MapScore:
    """Negative log-posterior up to a constant, kept in two levels.

    ``forbidden`` counts mismatches in a class whose constant is zero (each
    one is a probability-zero event); ``finite`` is the weighted count of
    the remaining mismatches.  Scores compare lexicographically, lower wins.
    """

    forbidden: int
    finite: float
    intra: int
    inter: int

    @property
    def value(self):
        return math.inf if self.forbidden else self.finite

    def _key(self):
        return (self.forbidden, self.finite)

    def __lt__(self, other):
        return self._key() < other._key()

    def __le__(self, other):
        return self._key() <= other._key()

    def __gt__(self, other):
        return self._key() > other._key()

    def __ge__(self, other):
        return self._key() >= other._key()

    def ties(self, other, rel=1e-12):
        """Equal score; distinct count pairs are compared with relative tolerance."""
        if self.forbidden != other.forbidden:
            return False
        if (self.intra, self.inter) == (other.intra, other.inter):
            return True
        return math.isclose(self.finite, other.finite, rel_tol=rel, abs_tol=rel)


def _score(intra, inter, constants: MapConstants) -> MapScore:
    forbidden = 0
    finite = 0.0
    for count, w in ((intra, constants.w_in), (inter, constants.w_out)):
        if math.isinf(w):
            forbidden += int(count)
        elif count:
            finite += w * int(count)
    return MapScore(forbidden, finite, int(intra), int(inter))


def _check_map_inputs(g1, anonymized, labels1, labels2):
    if g1.n != anonymized.n:
        raise ValueError("graphs must have the same vertex count")
    if labels1.n != g1.n or labels2.n != anonymized.n:
        raise ValueError("labelings must match the graphs")


def map_log_score(g1: Graph, anonymized: Graph, labels1: CommunityLabeling,
                  labels2: CommunityLabeling, mapping, constants: MapConstants) -> MapScore:
    """``w_in |E_in| + w_out |E_out|`` for the symmetric difference between
    ``g1`` and the anonymized graph pulled back through ``mapping``."""
    _check_map_inputs(g1, anonymized, labels1, labels2)
    mapping = check_permutation(mapping, g1.n)
    if not np.array_equal(labels2.labels[mapping], labels1.labels):
        raise ValueError("mapping is not community preserving")
    diff = symmetric_edge_difference(g1, anonymized, inverse(mapping), labels1)
    return _score(diff.n_intra, diff.n_inter, constants)


class MapSolution(NamedTuple):
    argmin: np.ndarray  # (k, n) minimizing mappings, in enumeration order
    score: MapScore
    candidates: int


def _community_blocks(labels1, labels2):
    blocks = []
    for k in range(labels1.C):
        a = labels1.members(k)
        b = labels2.members(k) if k < labels2.C else np.empty(0, np.int64)
        if len(a) != len(b):
            raise ValueError(f"community {k} has different sizes in the two labelings")
        blocks.append((a, b))
    return blocks


def _enumerate_maps(blocks, n):
    per_block = [list(itertools.permutations(b.tolist())) for _, b in blocks]
    for choice in itertools.product(*per_block):
        m = np.empty(n, dtype=np.int64)
        for (a, _), img in zip(blocks, choice):
            m[a] = img
        yield m


def brute_force_map(g1: Graph, anonymized: Graph, labels1: CommunityLabeling,
                    labels2: CommunityLabeling, constants: MapConstants,
                    limit=MAP_ENUMERATION_LIMIT, chunk=4096) -> MapSolution:
    """Score every community-preserving mapping and return the full argmin set."""
    _check_map_inputs(g1, anonymized, labels1, labels2)
    n = g1.n
    blocks = _community_blocks(labels1, labels2)
    total = math.prod(math.factorial(len(a)) for a, _ in blocks)
    if total > limit:
        raise CapacityError(f"{total} community-preserving maps exceed the limit {limit}")

    a1 = g1.adjacency()
    a2 = anonymized.adjacency()
    iu, ju = np.triu_indices(n, k=1)
    same = labels1.labels[iu] == labels1.labels[ju]
    x1 = a1[iu, ju]

    def batches():
        it = _enumerate_maps(blocks, n)
        while True:
            batch = np.array(list(itertools.islice(it, chunk)), dtype=np.int64).reshape(-1, n)
            if not len(batch):
                return
            diff = a2[batch[:, iu], batch[:, ju]] != x1
            yield batch, diff[:, same].sum(axis=1), diff[:, ~same].sum(axis=1)

    # first pass: distinct (intra, inter) count pairs only
    seen = set()
    for _, ci, co in batches():
        seen.update(zip(ci.tolist(), co.tolist()))
    scores = {pair: _score(*pair, constants) for pair in seen}
    best = min(scores.values())
    winning = {pair for pair, s in scores.items() if s.ties(best)}

    # second pass: collect the minimizers
    out = []
    for batch, ci, co in batches():
        keep = [(i, o) in winning for i, o in zip(ci.tolist(), co.tolist())]
        if any(keep):
            out.append(batch[np.asarray(keep)])
    return MapSolution(np.concatenate(out), best, total)


@dataclass
class AttackResult:
    mapping: np.ndarray
    seeds: np.ndarray
    algorithm: str
    params: dict = field(default_factory=dict)

    @property
    def mapped_count(self):
        return int(np.count_nonzero(self.mapping >= 0))

    def as_dict(self):
        return {int(i): int(j) for i, j in enumerate(self.mapping) if j >= 0}


def map_attack(g1, anonymized, labels1, labels2, constants, **kw) -> AttackResult:
    """MAP estimate; the first minimizer in enumeration order when tied."""
    sol = brute_force_map(g1, anonymized, labels1, labels2, constants, **kw)
    return AttackResult(
        mapping=sol.argmin[0].copy(),
        seeds=np.empty((0, 2), dtype=np.int64),
        algorithm="map",
        params={"c1": constants.c1, "c2": constants.c2, "ties": int(len(sol.argmin)),
                "score": sol.score.value, "candidates": sol.candidates},
    )


class Confusion(NamedTuple):
    bound: int                 # prod_k X_k!
    log2_bound: float
    isolated: list             # per-community isolated vertices
    witnesses: list            # transposition permutations


def automorphism_confusion(g_int: Graph, labels: CommunityLabeling, max_witnesses=None) -> Confusion:
    """Lower-bound the community-preserving automorphisms of ``g_int``.

    Any permutation of isolated vertices inside one community fixes every
    edge.  Adjacent transpositions of each community's isolated vertices are
    returned as generators.
    """
    iso = isolated_vertices(g_int, labels)
    bound = math.prod(math.factorial(len(x)) for x in iso)
    log2_bound = sum(math.lgamma(len(x) + 1) for x in iso) / math.log(2)
    witnesses = []
    for x in iso:
        for u, v in zip(x[:-1], x[1:]):
            if max_witnesses is not None and len(witnesses) >= max_witnesses:
                break
            w = np.arange(g_int.n, dtype=np.int64)
            w[u], w[v] = v, u
            witnesses.append(w)
    return Confusion(bound, log2_bound, iso, witnesses)


@dataclass(frozen=True)
class PgmParams:
    r: int = 4
    seed_count: int = 0
    community_constrained: bool = False

    def __post_init__(self):
        if self.r < 2:
            raise ParameterError("percolation threshold r must be at least 2")
        if self.seed_count < 0:
            raise ParameterError("seed_count must be non-negative")


def _check_seeds(seed_pairs, n1, n2):
    seeds = np.asarray(seed_pairs, dtype=np.int64).reshape(-1, 2)
    if len(seeds):
        if seeds[:, 0].min() < 0 or seeds[:, 0].max() >= n1 or seeds[:, 1].min() < 0 or seeds[:, 1].max() >= n2:
            raise ValueError("seed vertex out of range")
        if len(np.unique(seeds[:, 0])) != len(seeds) or len(np.unique(seeds[:, 1])) != len(seeds):
            raise ValueError("duplicate or conflicting seed pairs")
    return seeds


def pgm_attack(g1: Graph, anonymized: Graph, seed_pairs, params: PgmParams,
               labels1: CommunityLabeling | None = None,
               labels2: CommunityLabeling | None = None) -> AttackResult:
    """Percolation graph matching from ``seed_pairs``.

    Every matched pair ``(u, v)`` adds a mark to each pair ``(u', v')`` with
    ``u'`` a neighbor of ``u`` in ``g1`` and ``v'`` a neighbor of ``v`` in
    ``anonymized``.  A pair whose marks reach ``params.r`` is queued and
    matched in FIFO order unless one endpoint was taken in the meantime.
    """
    n1, n2 = g1.n, anonymized.n
    if n1 * n2 > PGM_PAIR_LIMIT:
        raise CapacityError(f"{n1}x{n2} pair table exceeds {PGM_PAIR_LIMIT} entries")
    seeds = _check_seeds(seed_pairs, n1, n2)
    constrained = params.community_constrained
    if constrained:
        if labels1 is None or labels2 is None:
            raise ValueError("community-constrained matching needs both labelings")
        if labels1.n != n1 or labels2.n != n2:
            raise ValueError("labelings must match the graphs")
        if len(seeds) and np.any(labels1.labels[seeds[:, 0]] != labels2.labels[seeds[:, 1]]):
            raise ValueError("seed pair crosses communities")
        lab1, lab2 = labels1.labels, labels2.labels
    else:
        lab1 = np.zeros(n1, dtype=np.int64)
        lab2 = np.zeros(n2, dtype=np.int64)

    map12 = np.full(n1, -1, dtype=np.int64)
    map21 = np.full(n2, -1, dtype=np.int64)
    map12[seeds[:, 0]] = seeds[:, 1]
    map21[seeds[:, 1]] = seeds[:, 0]
    ip1, ix1 = g1.csr
    ip2, ix2 = anonymized.csr
    _kernels.pgm_percolate(ip1, ix1, ip2, ix2, lab1, lab2, constrained,
                           seeds[:, 0].copy(), int(params.r), map12, map21)
    return AttackResult(
        mapping=map12, seeds=seeds, algorithm="pgm",
        params={"r": int(params.r), "seed_count": int(len(seeds)),
                "community_constrained": bool(constrained)},
    )


def random_seed_pairs(truth, count, seed):
    """``count`` uniformly chosen correct pairs ``(v, truth[v])``."""
    truth = np.asarray(truth, dtype=np.int64)
    if count > len(truth):
        raise ParameterError(f"cannot draw {count} seeds from {len(truth)} vertices")
    rng = make_rng(seed)
    v = np.sort(rng.choice(len(truth), size=int(count), replace=False)).astype(np.int64)
    return np.stack([v, truth[v]], axis=1)


class AttackMetrics(NamedTuple):
    mapped_count: int
    error_rate: float
    wrong: int
    non_seed_mapped: int


def evaluate_attack(result: AttackResult, truth) -> AttackMetrics:
    """Error rate over mapped non-seed vertices (0 when there are none)."""
    truth = np.asarray(truth, dtype=np.int64)
    mapping = result.mapping
    if len(truth) != len(mapping):
        raise ValueError("truth length does not match the mapping")
    mapped = mapping >= 0
    if len(result.seeds):
        mapped[result.seeds[:, 0]] = False
    non_seed = int(mapped.sum())
    wrong = int(np.count_nonzero(mapping[mapped] != truth[mapped]))
    rate = wrong / non_seed if non_seed else 0.0
    return AttackMetrics(int(np.count_nonzero(mapping >= 0)), rate, wrong, non_seed)

