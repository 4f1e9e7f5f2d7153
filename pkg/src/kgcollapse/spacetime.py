"""1+1 dimensional Minkowski geometry for extended detector regions.

Units are natural (c = hbar = 1). Events are written ``(t, x)`` in the lab
frame. A detector region is a closed spacelike segment: the set of points
at fixed proper time in the rest frame of a device moving with rapidity
``eta``.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

__all__ = [
    "Event",
    "Rapidity",
    "SpacelikeSegment",
    "IntervalClass",
    "CausalRelation",
    "boost_event",
    "interval",
    "classify_interval",
    "segment_endpoints",
    "future_boundary",
    "causal_relation",
    "boost_segment",
    "segments_overlap",
    "LIGHTLIKE_RTOL",
    "CAUSAL_ATOL",
]

LIGHTLIKE_RTOL = 1e-9
# absolute slack (in length units) used when comparing a point to a cone boundary
CAUSAL_ATOL = 1e-9


@dataclass(frozen=True)
class Event:
    t: float
    x: float

    def __post_init__(self):
        if not (math.isfinite(self.t) and math.isfinite(self.x)):
            raise ValueError(f"event components must be finite, got ({self.t}, {self.x})")


@dataclass(frozen=True)
class Rapidity:
    """Boost parameter; the velocity is ``tanh(chi)``."""

    chi: float

    def __post_init__(self):
        if not math.isfinite(self.chi):
            raise ValueError("rapidity must be finite")

    @property
    def velocity(self) -> float:
        return math.tanh(self.chi)

    def __add__(self, other: "Rapidity") -> "Rapidity":
        return Rapidity(self.chi + _chi(other))

    def __neg__(self) -> "Rapidity":
        return Rapidity(-self.chi)


def _chi(r) -> float:
    return r.chi if isinstance(r, Rapidity) else float(r)


@dataclass(frozen=True)
class SpacelikeSegment:
    """Closed spacelike segment ``center +/- s * (sinh eta, cosh eta)``, ``|s| <= L``.

    ``half_length`` is the proper half width measured in the device rest
    frame and ``rapidity`` is the rapidity of that rest frame in the lab.
    """

    center: Event
    half_length: float
    rapidity: Rapidity = Rapidity(0.0)

    def __post_init__(self):
        if not (self.half_length > 0 and math.isfinite(self.half_length)):
            raise ValueError(f"half_length must be positive and finite, got {self.half_length}")
        if not isinstance(self.rapidity, Rapidity):
            object.__setattr__(self, "rapidity", Rapidity(float(self.rapidity)))

    @property
    def slope(self) -> float:
        """dt/dx along the segment, strictly inside (-1, 1)."""
        return math.tanh(self.rapidity.chi)

    def time_at(self, x: float) -> float:
        return self.center.t + self.slope * (x - self.center.x)


class IntervalClass(enum.Enum):
    TIMELIKE = "Timelike"
    SPACELIKE = "Spacelike"
    LIGHTLIKE = "Lightlike"


class CausalRelation(enum.Enum):
    PRECEDES = "Precedes"
    SUCCEEDS = "Succeeds"
    SPACELIKE = "Spacelike"
    PARTIAL = "Partial"

    def reversed(self) -> "CausalRelation":
        if self is CausalRelation.PRECEDES:
            return CausalRelation.SUCCEEDS
        if self is CausalRelation.SUCCEEDS:
            return CausalRelation.PRECEDES
        return self


def boost_event(e: Event, chi) -> Event:
    """Active boost: a particle at rest at the origin acquires velocity tanh(chi)."""
    c, s = math.cosh(_chi(chi)), math.sinh(_chi(chi))
    return Event(e.t * c + e.x * s, e.x * c + e.t * s)


def interval(a: Event, b: Event) -> float:
    """Squared interval (dt)^2 - (dx)^2; positive for timelike separation."""
    dt, dx = b.t - a.t, b.x - a.x
    return dt * dt - dx * dx


def classify_interval(a: Event, b: Event) -> IntervalClass:
    dt, dx = b.t - a.t, b.x - a.x
    s2 = dt * dt - dx * dx
    if abs(s2) <= LIGHTLIKE_RTOL * max(1.0, dt * dt + dx * dx):
        return IntervalClass.LIGHTLIKE
    return IntervalClass.TIMELIKE if s2 > 0 else IntervalClass.SPACELIKE


def segment_endpoints(s: SpacelikeSegment) -> tuple[Event, Event]:
    """Endpoints ordered by increasing x."""
    eta = s.rapidity.chi
    dt, dx = s.half_length * math.sinh(eta), s.half_length * math.cosh(eta)
    c = s.center
    return Event(c.t - dt, c.x - dx), Event(c.t + dt, c.x + dx)


def boost_segment(s: SpacelikeSegment, chi) -> SpacelikeSegment:
    """Boost the center and add ``chi`` to the rest-frame rapidity."""
    return SpacelikeSegment(boost_event(s.center, chi), s.half_length, s.rapidity + Rapidity(_chi(chi)))


def future_boundary(s: SpacelikeSegment, x: float) -> float:
    """Lower boundary of the causal future J+(s) at position ``x``.

    Piecewise linear and convex with slopes -1, tanh(eta), +1.
    """
    left, right = segment_endpoints(s)
    if x < left.x:
        return left.t + (left.x - x)
    if x > right.x:
        return right.t + (x - right.x)
    return s.time_at(x)


def _future_margins(a: SpacelikeSegment, b: SpacelikeSegment) -> tuple[float, float]:
    """(min, max) over ``b`` of t_b(x) - boundary_a(x).

    The difference is concave in x, so the minimum sits at an endpoint of
    ``b`` and the maximum at an endpoint or at a kink of the boundary.
    """
    b_left, b_right = segment_endpoints(b)
    a_left, a_right = segment_endpoints(a)
    ends = [b_left.x, b_right.x]
    at_ends = [b.time_at(x) - future_boundary(a, x) for x in ends]
    candidates = list(at_ends)
    for kink in (a_left.x, a_right.x):
        if b_left.x < kink < b_right.x:
            candidates.append(b.time_at(kink) - future_boundary(a, kink))
    return min(at_ends), max(candidates)


def _inside_future(a: SpacelikeSegment, b: SpacelikeSegment) -> tuple[bool, bool]:
    """(b contained in J+(a), b meets the interior of J+(a))."""
    lo, hi = _future_margins(a, b)
    return lo >= -CAUSAL_ATOL, hi > CAUSAL_ATOL


def causal_relation(a: SpacelikeSegment, b: SpacelikeSegment) -> CausalRelation:
    """Causal relation of region ``b`` relative to region ``a``.

    ``PRECEDES`` means ``a`` precedes ``b``: every point of ``b`` lies in the
    causal future of some point of ``a`` (and ``b`` is not merely touching
    the cone boundary). ``SUCCEEDS`` is the same statement with roles
    swapped, so ``causal_relation(a, b)`` and ``causal_relation(b, a)`` are
    always mutually reversed. ``SPACELIKE`` means no point of either region
    lies strictly inside the cone of the other; touching boundaries count as
    spacelike. Everything else is ``PARTIAL``.
    """
    b_in, b_meets = _inside_future(a, b)
    a_in, a_meets = _inside_future(b, a)
    precedes = b_in and b_meets
    succeeds = a_in and a_meets
    if precedes and succeeds:
        return CausalRelation.PARTIAL
    if precedes:
        return CausalRelation.PRECEDES
    if succeeds:
        return CausalRelation.SUCCEEDS
    if not b_meets and not a_meets:
        return CausalRelation.SPACELIKE
    return CausalRelation.PARTIAL


def segments_overlap(a: SpacelikeSegment, b: SpacelikeSegment, atol: float = CAUSAL_ATOL) -> bool:
    """True if the two closed segments share a spacetime point (within ``atol``)."""
    a0, a1 = segment_endpoints(a)
    b0, b1 = segment_endpoints(b)
    lo, hi = max(a0.x, b0.x), min(a1.x, b1.x)
    if lo > hi + atol:
        return False
    # difference of two linear functions on [lo, hi] changes sign or vanishes
    d_lo = a.time_at(lo) - b.time_at(lo)
    d_hi = a.time_at(hi) - b.time_at(hi)
    return min(d_lo, d_hi) <= atol and max(d_lo, d_hi) >= -atol
