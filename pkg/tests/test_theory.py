import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from sbmanon.errors import ParameterError
from sbmanon.graph import CommunityLabeling, Graph
from sbmanon.synth import SbmParams
from sbmanon.theory import (
    RegionQuery,
    achievability_verdict,
    certify_anonymity,
    community_recovery_verdict,
    converse_verdict,
    expected_isolated,
    normalized_rate,
    offset_delta,
    safe_region_query,
    sublinear_converse_verdict,
    subsample_window,
)


def bisect(pred, lo, hi, tol=1e-12):
    """Boundary of a predicate that flips once on [lo, hi]."""
    flo = pred(lo)
    while hi - lo > tol * max(1.0, abs(hi)):
        mid = 0.5 * (lo + hi)
        if pred(mid) == flo:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def test_rate_and_margins():
    q = RegionQuery(a=6, b=2, C=2, s1=0.5, s2=0.5, t=0.8)
    rate = (6 + 2) * 0.25 * 0.8 / 2
    assert normalized_rate(6, 2, 2, 0.5, 0.5, 0.8) == pytest.approx(rate)
    assert converse_verdict(q).margin == pytest.approx(1 - rate)
    assert achievability_verdict(q).margin == pytest.approx(rate - 2)
    cd = community_recovery_verdict(30, 2, 2, 0.5)
    assert cd.margin == pytest.approx(math.sqrt(15) - 1 - math.sqrt(2))
    assert cd.holds


def test_threshold_is_strict():
    q = RegionQuery(a=1.5, b=0.5, C=2)  # rate exactly 1
    v = converse_verdict(q)
    assert not v.holds and v.margin == 0
    assert not achievability_verdict(RegionQuery(a=3, b=1, C=2)).holds


def test_alpha_shifts_converse():
    q = RegionQuery(a=1.0, b=0.2, C=2, alpha=0.5)  # rate 0.6
    assert not converse_verdict(q).holds
    assert converse_verdict(RegionQuery(a=1.0, b=0.2, C=2, alpha=0.3, s1=0.9)).margin == pytest.approx(
        0.7 - 0.54)


def test_sublinear_converse():
    q = RegionQuery(a=1.0, b=0.2, C=2, alpha=0.1, beta=0.2, t=0.5)
    assert sublinear_converse_verdict(q).margin == pytest.approx(0.7 - 0.3)
    with pytest.raises(ParameterError):
        sublinear_converse_verdict(RegionQuery(a=1, b=0, alpha=0.6, beta=0.5))


@pytest.mark.parametrize("kwargs", [dict(a=1, b=2), dict(a=1, b=0, s1=1.5), dict(a=1, b=0, alpha=1.0),
                                    dict(a=-1, b=-2)])
def test_query_validation(kwargs):
    with pytest.raises(ParameterError):
        RegionQuery(**kwargs)


def test_expected_isolated_closed_form():
    params = SbmParams(n=2000, C=2, a=0.3, b=0.1)
    nb = 1000
    e = nb * (1 - params.p) ** (nb - 1) * (1 - params.q) ** nb
    assert np.allclose(expected_isolated(params), [e, e])


def test_safe_region_b_zero_window_by_bisection():
    C, s1, s2, t = 2, 0.1, 0.5, 1.0

    def safe(a):
        return safe_region_query(RegionQuery(a, 0.0, C, s1, s2, t)).safe

    lo = bisect(safe, 1.0, 10.0)
    hi = bisect(safe, 10.0, 100.0)
    assert lo == pytest.approx(C / (s2 * t), abs=1e-9)
    assert hi == pytest.approx(C / (s1 * s2 * t), abs=1e-9)


def test_subsample_window_by_bisection():
    a, b, C, s1, s2 = 40.0, 4.0, 2, 0.3, 0.6
    w = subsample_window(a, b, C, s1, s2)
    cd = bisect(lambda t: community_recovery_verdict(a, b, C, s2 * t).holds, 1e-6, 1.0)
    conv = bisect(lambda t: converse_verdict(RegionQuery(a, b, C, s1, s2, t)).holds, 1e-6, 1.0)
    assert w.lo == pytest.approx(cd, abs=1e-9)
    assert w.hi == pytest.approx(conv, abs=1e-9)
    assert not w.empty
    assert safe_region_query(RegionQuery(a, b, C, s1, s2, 0.5 * (w.lo + w.hi))).safe


def test_subsample_window_empty_and_clipped():
    w = subsample_window(20.0, 5.0, 2, 1.0, 1.0)
    assert w.empty and w.two_block is False
    w = subsample_window(50.0, 0.0, 2, 0.01, 1.0)
    assert w.hi == 1.0 and not w.empty
    assert subsample_window(10.0, 1.0, 3, 0.5, 0.5).two_block is None


@given(st.floats(0.01, 100), st.floats(0.0, 1.0), st.floats(0.0, 1.0))
def test_two_block_criterion_false_when_s1_is_one(a, frac, s2):
    b = a * frac
    if b > 0:
        assert subsample_window(a, b, 2, 1.0, s2).two_block is False


@given(st.floats(0, 100), st.floats(0, 1), st.floats(0, 1), st.floats(0, 1), st.floats(0, 1))
def test_converse_and_achievability_exclusive(a, frac, s1, s2, t):
    q = RegionQuery(a, a * frac, 2, s1, s2, t)
    assert not (converse_verdict(q).holds and achievability_verdict(q).holds)
    assert (offset_delta(q.a, q.b, s1, s2, t) < 0) == converse_verdict(q).holds


def test_certificate_counts_and_bits():
    L = CommunityLabeling.equal_blocks(8, 2)
    g1 = Graph(8, [[0, 1], [4, 5], [6, 7]])
    g2 = Graph(8, [[0, 1], [4, 5], [2, 3]])
    cert = certify_anonymity(g1, g2, L)
    assert cert.counts == (2, 2)
    assert cert.total_isolated == 4
    assert cert.bits[2] == 1.0 and cert.bits[0] == 0.0
    assert cert.automorphism_bound == 4
    assert cert.log2_automorphism_bound == pytest.approx(2.0)
    assert cert.max_bits == 1.0
