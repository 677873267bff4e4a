"""Closed-form anonymity and community-recovery thresholds.

Rates are written in terms of the normalized intersection rate
``(a + (C-1) b) * s1 * s2 * t / C``.  All inequalities are strict; a query
sitting exactly on a threshold gets verdict ``False`` and margin ``0``.
Verdicts are asymptotic in ``n``; the margin is reported so finite-size
users can judge how far from the boundary they are.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import ParameterError
from .graph import CommunityLabeling, Graph, intersect, isolated_vertices
from .synth import SbmParams

__all__ = [
    "RegionQuery",
    "RegionVerdict",
    "SubsampleWindow",
    "AnonymityCertificate",
    "Verdict",
    "normalized_rate",
    "expected_isolated",
    "converse_verdict",
    "achievability_verdict",
    "community_recovery_verdict",
    "safe_region_query",
    "subsample_window",
    "sublinear_converse_verdict",
    "offset_delta",
    "certify_anonymity",
]


@dataclass(frozen=True)
class RegionQuery:
    a: float
    b: float
    C: int = 2
    s1: float = 1.0
    s2: float = 1.0
    t: float = 1.0
    alpha: float = 0.0
    beta: float = 0.0
    n: int | None = None

    def __post_init__(self):
        for name in ("s1", "s2", "t"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ParameterError(f"{name}={v} is not a probability")
        if not self.a >= self.b >= 0:
            raise ParameterError(f"need a >= b >= 0, got a={self.a}, b={self.b}")
        if self.C < 1:
            raise ParameterError("C must be at least 1")
        if not 0.0 <= self.alpha < 1.0 or not 0.0 <= self.beta < 1.0:
            raise ParameterError("alpha and beta must lie in [0, 1)")


class Verdict(NamedTuple):
    holds: bool
    margin: float


def _verdict(margin):
    return Verdict(bool(margin > 0), float(margin))


def normalized_rate(a, b, C, s1, s2, t=1.0):
    return (a + (C - 1) * b) * s1 * s2 * t / C


def expected_isolated(params: SbmParams):
    """Expected isolated-vertex count of each community of ``SBM(n, p, q)``."""
    nb = params.block_size
    p, q, C = params.p, params.q, params.C
    e = nb * (1 - p) ** (nb - 1) * (1 - q) ** ((C - 1) * nb)
    return np.full(C, e, dtype=np.float64)


def converse_verdict(q: RegionQuery) -> Verdict:
    """Exact deanonymization impossible (with ``alpha > 0``: a growing set of
    confusable vertices)."""
    rate = normalized_rate(q.a, q.b, q.C, q.s1, q.s2, q.t)
    return _verdict((1 - q.alpha) - rate)


def achievability_verdict(q: RegionQuery) -> Verdict:
    rate = normalized_rate(q.a, q.b, q.C, q.s1, q.s2, q.t)
    return _verdict(rate - 2)


def community_recovery_verdict(a, b, C, retention) -> Verdict:
    """Exact label recovery in ``SBM`` thinned to ``retention``."""
    if not 0.0 <= retention <= 1.0:
        raise ParameterError(f"retention={retention} is not a probability")
    if a < 0 or b < 0:
        raise ParameterError("rate constants must be non-negative")
    return _verdict(math.sqrt(a * retention) - math.sqrt(b * retention) - math.sqrt(C))


class RegionVerdict(NamedTuple):
    cd_possible: bool
    da_impossible: bool
    ach_possible: bool
    cd_margin: float
    converse_margin: float
    achievability_margin: float
    safe: bool
    n: int | None = None


def safe_region_query(q: RegionQuery) -> RegionVerdict:
    """Community recovery in the release and no exact deanonymization."""
    cd = community_recovery_verdict(q.a, q.b, q.C, q.s2 * q.t)
    da = converse_verdict(RegionQuery(q.a, q.b, q.C, q.s1, q.s2, q.t, 0.0, q.beta, q.n))
    ach = achievability_verdict(q)
    return RegionVerdict(cd.holds, da.holds, ach.holds, cd.margin, da.margin, ach.margin,
                         cd.holds and da.holds, q.n)


class SubsampleWindow(NamedTuple):
    """Admissible publisher subsampling probabilities ``lo < t <= hi``.

    ``empty`` is set when no ``t`` in ``(0, 1]`` works; ``two_block`` is the
    two-community closed-form criterion (``None`` for other ``C``).
    """

    lo: float
    hi: float
    empty: bool
    two_block: bool | None


def subsample_window(a, b, C, s1, s2) -> SubsampleWindow:
    """Solve both threshold inequalities for ``t``.

    Community recovery needs ``t > C / (s2 (sqrt a - sqrt b)^2)`` and the
    converse needs ``t < C / ((a + (C-1) b) s1 s2)``.
    """
    RegionQuery(a, b, C, s1, s2)
    gap = (math.sqrt(a) - math.sqrt(b)) ** 2 * s2
    lo = C / gap if gap > 0 else math.inf
    load = (a + (C - 1) * b) * s1 * s2
    hi = C / load if load > 0 else math.inf
    hi_eff = min(hi, 1.0)
    # the upper bound is strict unless it is clipped at 1
    if hi <= 1.0:
        empty = not lo < hi
    else:
        empty = not lo < 1.0
    two_block = None
    if C == 2:
        two_block = a + b > 0 and ((a - b) / (a + b)) ** 2 + (1 - s1) ** 2 > 1
    return SubsampleWindow(lo, hi_eff, empty, two_block)


def sublinear_converse_verdict(q: RegionQuery) -> Verdict:
    """Converse with ``C = n**beta`` communities: the threshold drops by ``beta``."""
    if q.alpha + q.beta >= 1:
        raise ParameterError(f"alpha + beta = {q.alpha + q.beta} >= 1 leaves nothing to certify")
    rate = normalized_rate(q.a, q.b, q.C, q.s1, q.s2, q.t)
    return _verdict((1 - q.alpha - q.beta) - rate)


def offset_delta(a, b, s1, s2, t=1.0):
    """Signed distance from the two-community exact-deanonymization threshold."""
    return (a + b) * s1 * s2 * t / 2 - 1


@dataclass(frozen=True)
class AnonymityCertificate:
    isolated: tuple          # per-community isolated vertex arrays
    counts: tuple            # X_k
    bits: np.ndarray         # per-vertex lower bound, log2 X_k on isolated vertices
    automorphism_bound: int  # prod_k X_k!
    log2_automorphism_bound: float

    @property
    def total_isolated(self):
        return int(sum(self.counts))

    @property
    def max_bits(self):
        return float(self.bits.max()) if len(self.bits) else 0.0


def certify_anonymity(g1: Graph, g2: Graph, labels: CommunityLabeling) -> AnonymityCertificate:
    """Isolated-vertex certificate on the (aligned) intersection ``g1 & g2``.

    Same-community isolated vertices of the intersection are interchangeable
    for any attacker, so each one keeps ``log2 X_k`` bits of uncertainty.
    """
    iso = isolated_vertices(intersect(g1, g2), labels)
    counts = tuple(len(x) for x in iso)
    bits = np.zeros(g1.n, dtype=np.float64)
    for x in iso:
        if len(x) > 1:
            bits[x] = math.log2(len(x))
    bound = math.prod(math.factorial(c) for c in counts)
    log2_bound = sum(math.lgamma(c + 1) for c in counts) / math.log(2)
    return AnonymityCertificate(tuple(iso), counts, bits, bound, log2_bound)
