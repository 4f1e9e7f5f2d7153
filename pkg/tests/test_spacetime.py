import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from kgcollapse.spacetime import (
    CausalRelation,
    Event,
    IntervalClass,
    Rapidity,
    SpacelikeSegment,
    boost_event,
    boost_segment,
    causal_relation,
    classify_interval,
    future_boundary,
    interval,
    segment_endpoints,
    segments_overlap,
)

from oracles import sampled_relation

coord = st.floats(-50, 50, allow_nan=False)
rap = st.floats(-3, 3, allow_nan=False)


def seg(t, x, L, eta=0.0):
    return SpacelikeSegment(Event(t, x), L, Rapidity(eta))


# --- boosts -----------------------------------------------------------------


def test_origin_is_fixed():
    assert boost_event(Event(0.0, 0.0), 0.7) == Event(0.0, 0.0)


def test_unit_time_vector():
    chi = 0.42
    e = boost_event(Event(1.0, 0.0), chi)
    assert e.t == pytest.approx(math.cosh(chi), abs=1e-15)
    assert e.x == pytest.approx(math.sinh(chi), abs=1e-15)


def test_rapidity_objects_and_floats_agree():
    e = Event(1.5, -0.3)
    assert boost_event(e, Rapidity(0.2)) == boost_event(e, 0.2)
    assert (Rapidity(0.2) + Rapidity(0.3)).chi == pytest.approx(0.5)
    assert (-Rapidity(0.2)).chi == -0.2
    assert Rapidity(0.0).velocity == 0.0


def test_nonfinite_inputs_rejected():
    with pytest.raises(ValueError):
        Event(float("nan"), 0.0)
    with pytest.raises(ValueError):
        Rapidity(float("inf"))
    with pytest.raises(ValueError):
        SpacelikeSegment(Event(0, 0), 0.0)


@given(coord, coord, rap)
def test_inverse_boost(t, x, chi):
    e = boost_event(boost_event(Event(t, x), chi), -chi)
    scale = max(1.0, abs(t), abs(x)) * math.cosh(chi) ** 2
    assert abs(e.t - t) <= 1e-12 * scale
    assert abs(e.x - x) <= 1e-12 * scale


@given(coord, coord, rap)
def test_interval_from_origin_invariant(t, x, chi):
    e = boost_event(Event(t, x), chi)
    s0 = t * t - x * x
    assert abs((e.t**2 - e.x**2) - s0) <= 1e-12 * max(1.0, t * t + x * x) * math.cosh(chi) ** 2


@given(coord, coord, rap, rap)
def test_boost_composition(t, x, c1, c2):
    a = boost_event(boost_event(Event(t, x), c1), c2)
    b = boost_event(Event(t, x), c1 + c2)
    scale = max(1.0, abs(t), abs(x)) * math.cosh(abs(c1) + abs(c2))
    assert abs(a.t - b.t) <= 1e-12 * scale
    assert abs(a.x - b.x) <= 1e-12 * scale


# --- intervals --------------------------------------------------------------


@pytest.mark.parametrize(
    "b, cls",
    [((2, 1), IntervalClass.TIMELIKE), ((1, 2), IntervalClass.SPACELIKE), ((1, 1), IntervalClass.LIGHTLIKE)],
)
def test_classify_examples(b, cls):
    assert classify_interval(Event(0, 0), Event(*b)) is cls


def test_lightlike_tolerance_is_scale_aware():
    big = 1e6
    assert classify_interval(Event(0, 0), Event(big, big * (1 + 1e-12))) is IntervalClass.LIGHTLIKE
    assert classify_interval(Event(0, 0), Event(1.0, 1.0 + 1e-6)) is IntervalClass.SPACELIKE


def test_interval_class_boost_invariant():
    rng = np.random.default_rng(1)
    for _ in range(1000):
        a = Event(*rng.uniform(-10, 10, 2))
        b = Event(*rng.uniform(-10, 10, 2))
        chi = rng.uniform(-2, 2)
        s2 = interval(a, b)
        if abs(s2) < 1e-6 * (1 + abs(b.t - a.t) ** 2 + abs(b.x - a.x) ** 2):
            continue
        assert classify_interval(a, b) is classify_interval(boost_event(a, chi), boost_event(b, chi))


# --- segments ---------------------------------------------------------------


def test_endpoints_rest_frame():
    left, right = segment_endpoints(seg(0, 0, 1))
    assert (left, right) == (Event(0, -1), Event(0, 1))


def test_endpoints_moving():
    chi = 0.6
    left, right = segment_endpoints(seg(0, 0, 1, chi))
    assert left.t == pytest.approx(-math.sinh(chi)) and left.x == pytest.approx(-math.cosh(chi))
    assert right.t == pytest.approx(math.sinh(chi)) and right.x == pytest.approx(math.cosh(chi))


@given(coord, coord, st.floats(0.01, 10), rap)
def test_endpoints_are_spacelike(t, x, L, eta):
    a, b = segment_endpoints(seg(t, x, L, eta))
    assert a.x < b.x
    assert classify_interval(a, b) is IntervalClass.SPACELIKE


@given(coord, coord, st.floats(0.01, 10), rap, rap)
def test_boosted_segment_endpoints_are_boosted_endpoints(t, x, L, eta, chi):
    s = seg(t, x, L, eta)
    ends = [boost_event(e, chi) for e in segment_endpoints(s)]
    got = segment_endpoints(boost_segment(s, chi))
    scale = (max(1.0, abs(t), abs(x)) + L) * math.cosh(abs(eta) + abs(chi)) ** 2
    for g, e in zip(got, ends):
        assert abs(g.t - e.t) <= 1e-12 * scale
        assert abs(g.x - e.x) <= 1e-12 * scale


def test_future_boundary_is_convex():
    s = seg(1.0, 2.0, 1.5, 0.4)
    xs = np.linspace(-10, 14, 2001)
    f = np.array([future_boundary(s, x) for x in xs])
    assert np.all(np.diff(f, 2) >= -1e-12)


# --- causal relation ----------------------------------------------------------

A = seg(0, 0, 1)


def test_deep_future_precedes():
    assert causal_relation(A, seg(5, 0, 1)) is CausalRelation.PRECEDES
    assert causal_relation(seg(5, 0, 1), A) is CausalRelation.SUCCEEDS


def test_outside_cone_spacelike():
    assert causal_relation(A, seg(0.5, 3.5, 0.5)) is CausalRelation.SPACELIKE


def test_straddling_segment_partial():
    B = seg(1.5, 0, 3)
    assert causal_relation(A, B) is CausalRelation.PARTIAL
    name, margin = sampled_relation((0, 0, 1, 0), (1.5, 0, 3, 0), n=10_001)
    assert name == "Partial" and margin > 0.1


def test_touching_boundary_counts_as_spacelike():
    # B's left endpoint sits exactly on A's future boundary
    assert causal_relation(A, seg(1.0, 3.0, 1.0)) is CausalRelation.SPACELIKE


def _random_segment(rng):
    return (rng.uniform(-6, 6), rng.uniform(-6, 6), rng.uniform(0.1, 2.5), rng.uniform(-1.2, 1.2))


def test_agrees_with_point_sampling_oracle():
    rng = np.random.default_rng(2024)
    checked, seen = 0, set()
    while checked < 500:
        a, b = _random_segment(rng), _random_segment(rng)
        name, margin = sampled_relation(a, b, n=401)
        if margin < 0.05:  # too close to a decision boundary for the sampled oracle
            continue
        assert causal_relation(seg(*a), seg(*b)).value == name, (a, b)
        seen.add(name)
        checked += 1
    assert seen == {"Precedes", "Succeeds", "Spacelike", "Partial"}


def test_relation_is_boost_covariant():
    rng = np.random.default_rng(7)
    for _ in range(1000):
        a, b = seg(*_random_segment(rng)), seg(*_random_segment(rng))
        name, margin = sampled_relation(
            (a.center.t, a.center.x, a.half_length, a.rapidity.chi),
            (b.center.t, b.center.x, b.half_length, b.rapidity.chi), n=101)
        if margin < 1e-3:
            continue
        chi = rng.uniform(-1.5, 1.5)
        assert causal_relation(a, b) is causal_relation(boost_segment(a, chi), boost_segment(b, chi))


def test_relation_is_antisymmetric():
    rng = np.random.default_rng(3)
    for _ in range(300):
        a, b = seg(*_random_segment(rng)), seg(*_random_segment(rng))
        assert causal_relation(b, a) is causal_relation(a, b).reversed()


def test_precedes_is_transitive():
    rng = np.random.default_rng(11)
    found = 0
    for _ in range(20000):
        a = seg(0, rng.uniform(-1, 1), rng.uniform(0.2, 1.5), rng.uniform(-1, 1))
        b = seg(rng.uniform(1, 6), rng.uniform(-4, 4), rng.uniform(0.2, 1.5), rng.uniform(-1, 1))
        c = seg(rng.uniform(4, 12), rng.uniform(-6, 6), rng.uniform(0.2, 1.5), rng.uniform(-1, 1))
        if causal_relation(a, b) is CausalRelation.PRECEDES and causal_relation(b, c) is CausalRelation.PRECEDES:
            assert causal_relation(a, c) is CausalRelation.PRECEDES
            found += 1
    assert found > 200


def test_overlap_detection():
    assert segments_overlap(seg(0, 0, 1), seg(0, 1.5, 1))
    assert not segments_overlap(seg(0, 0, 1), seg(0, 3, 1))
    # crossing segments with different slopes
    assert segments_overlap(seg(0, 0, 1, 0.3), seg(0, 0, 1, -0.3))
    assert not segments_overlap(seg(0, 0, 1), seg(0.5, 0, 1))
