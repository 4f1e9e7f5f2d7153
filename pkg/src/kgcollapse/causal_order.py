"""Precedence DAG over devices and its intrinsic layer decomposition."""
from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass, field
from itertools import combinations
from typing import Iterable, Sequence

from .spacetime import (
    CausalRelation,
    Event,
    SpacelikeSegment,
    boost_event,
    boost_segment,
    causal_relation,
    segments_overlap,
)

__all__ = [
    "DeviceKind",
    "Device",
    "PrecedenceDag",
    "LayerDecomposition",
    "Violation",
    "ViolationCategory",
    "ValidationReport",
    "ValidationError",
    "OverlapWarning",
    "build_precedence",
    "validate",
    "layer",
    "layer_devices",
    "boost_device",
]

CLOCK_RTOL = 1e-9


class DeviceKind(enum.Enum):
    POSITION = "PositionDetector"
    ENERGY_SIGN = "EnergySignDetector"
    PREPARER = "Preparer"


@dataclass(frozen=True)
class Device:
    """A measuring (or preparing) instrument occupying a spacelike region.

    ``proper_time`` is the clock reading of the device in its own rest
    frame; it must agree with the rest-frame time of the segment center.
    """

    id: str
    segment: SpacelikeSegment
    proper_time: float
    kind: DeviceKind = DeviceKind.POSITION

    def __post_init__(self):
        if not isinstance(self.kind, DeviceKind):
            object.__setattr__(self, "kind", DeviceKind(self.kind))
        if not math.isfinite(self.proper_time):
            raise ValueError("proper_time must be finite")

    @property
    def rapidity(self) -> float:
        return self.segment.rapidity.chi

    def rest_frame_center(self) -> Event:
        """Segment center in the device rest frame."""
        return boost_event(self.segment.center, -self.rapidity)

    def rest_frame_region(self) -> tuple[float, float]:
        c = self.rest_frame_center()
        return c.x - self.segment.half_length, c.x + self.segment.half_length


def boost_device(d: Device, chi: float) -> Device:
    """Same device seen after an active boost; proper quantities are unchanged."""
    return Device(d.id, boost_segment(d.segment, chi), d.proper_time, d.kind)


class ViolationCategory(enum.Enum):
    PARTIAL_OVERLAP = "PartialOverlap"
    NOT_IN_PREPARER_CONE = "NotInPreparerCone"
    DUPLICATE_ID = "DuplicateId"
    NO_PREPARER = "NoPreparer"
    CLOCK_MISMATCH = "ClockMismatch"


@dataclass(frozen=True)
class Violation:
    category: ViolationCategory
    device_ids: tuple[str, ...]
    message: str = ""

    def to_dict(self) -> dict:
        return {"category": self.category.value, "device_ids": list(self.device_ids), "message": self.message}


@dataclass(frozen=True)
class ValidationReport:
    violations: tuple[Violation, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self) -> bool:
        return self.ok

    def categories(self) -> set[ViolationCategory]:
        return {v.category for v in self.violations}

    def to_dict(self) -> dict:
        return {"ok": self.ok, "violations": [v.to_dict() for v in self.violations]}


class ValidationError(ValueError):
    def __init__(self, report: ValidationReport):
        self.report = report
        lines = [f"{v.category.value}: {', '.join(v.device_ids)} {v.message}".rstrip() for v in report.violations]
        super().__init__("invalid experiment:\n  " + "\n  ".join(lines))


class OverlapWarning(UserWarning):
    """Two devices of the same layer share spacetime points."""


@dataclass(frozen=True)
class PrecedenceDag:
    """Devices, the full pairwise relation table, and the Precedes edges."""

    devices: tuple[Device, ...]
    relations: dict = field(repr=False)  # (id_a, id_b) -> CausalRelation of b relative to a
    edges: frozenset = frozenset()

    @property
    def nodes(self) -> tuple[str, ...]:
        return tuple(d.id for d in self.devices)

    def device(self, device_id: str) -> Device:
        for d in self.devices:
            if d.id == device_id:
                return d
        raise KeyError(device_id)

    def relation(self, a: str, b: str) -> CausalRelation:
        return self.relations[(a, b)]

    def predecessors(self, device_id: str) -> set[str]:
        return {a for a, b in self.edges if b == device_id}


@dataclass(frozen=True)
class LayerDecomposition:
    preparer: str
    layers: tuple[tuple[str, ...], ...]
    overlaps: tuple[tuple[str, str], ...] = ()

    @property
    def layer_index(self) -> dict[str, int]:
        idx = {self.preparer: 0}
        for i, ids in enumerate(self.layers, start=1):
            for d in ids:
                idx[d] = i
        return idx

    def __len__(self) -> int:
        return len(self.layers)

    def as_lists(self) -> list[list[str]]:
        return [list(ids) for ids in self.layers]


def _duplicates(devices: Sequence[Device]) -> list[str]:
    seen, dup = set(), []
    for d in devices:
        if d.id in seen and d.id not in dup:
            dup.append(d.id)
        seen.add(d.id)
    return sorted(dup)


def build_precedence(devices: Iterable[Device]) -> PrecedenceDag:
    devices = tuple(sorted(devices, key=lambda d: d.id))
    dup = _duplicates(devices)
    if dup:
        raise ValidationError(
            ValidationReport(tuple(Violation(ViolationCategory.DUPLICATE_ID, (i,)) for i in dup))
        )
    relations = {}
    edges = set()
    for a, b in combinations(devices, 2):
        rel = causal_relation(a.segment, b.segment)
        relations[(a.id, b.id)] = rel
        relations[(b.id, a.id)] = rel.reversed()
        if rel is CausalRelation.PRECEDES:
            edges.add((a.id, b.id))
        elif rel is CausalRelation.SUCCEEDS:
            edges.add((b.id, a.id))
    return PrecedenceDag(devices, relations, frozenset(edges))


def validate(devices: Iterable[Device] | PrecedenceDag) -> ValidationReport:
    """Check an arrangement against the assumptions needed for layering."""
    if isinstance(devices, PrecedenceDag):
        dag = devices
        devices = list(dag.devices)
    else:
        devices = list(devices)
        dup = _duplicates(devices)
        if dup:
            return ValidationReport(tuple(Violation(ViolationCategory.DUPLICATE_ID, (i,)) for i in dup))
        dag = build_precedence(devices)
    out: list[Violation] = []

    preparers = [d for d in dag.devices if d.kind is DeviceKind.PREPARER]
    if len(preparers) != 1:
        out.append(Violation(
            ViolationCategory.NO_PREPARER,
            tuple(d.id for d in preparers),
            f"expected exactly one preparer, found {len(preparers)}",
        ))

    for d in dag.devices:
        t_rest = d.rest_frame_center().t
        if abs(d.proper_time - t_rest) > CLOCK_RTOL * max(1.0, abs(t_rest)):
            out.append(Violation(
                ViolationCategory.CLOCK_MISMATCH, (d.id,),
                f"proper_time {d.proper_time!r} != rest-frame time {t_rest!r}",
            ))

    if len(preparers) == 1:
        a0 = preparers[0].id
        for d in dag.devices:
            if d.id != a0 and dag.relation(a0, d.id) is not CausalRelation.PRECEDES:
                out.append(Violation(
                    ViolationCategory.NOT_IN_PREPARER_CONE, (d.id,),
                    f"relation to preparer is {dag.relation(a0, d.id).value}",
                ))

    for a, b in combinations(dag.devices, 2):
        if dag.relation(a.id, b.id) is CausalRelation.PARTIAL:
            out.append(Violation(ViolationCategory.PARTIAL_OVERLAP, (a.id, b.id)))
    return ValidationReport(tuple(out))


def layer(dag: PrecedenceDag) -> LayerDecomposition:
    """Longest-path layering: layer(d) = 1 + max layer of its predecessors.

    Raises ``ValidationError`` unless the arrangement validates cleanly.
    """
    report = validate(dag)
    if not report.ok:
        raise ValidationError(report)
    a0 = next(d.id for d in dag.devices if d.kind is DeviceKind.PREPARER)
    preds = {d.id: set() for d in dag.devices}
    for a, b in dag.edges:
        preds[b].add(a)

    depth: dict[str, int] = {a0: 0}
    # Kahn order; ties broken by id so the result never depends on input order
    remaining = {k: set(v) for k, v in preds.items() if k != a0}
    for v in remaining.values():
        v.discard(a0)
    ready = sorted(k for k, v in remaining.items() if not v)
    while ready:
        nxt = []
        for node in ready:
            depth[node] = 1 + max((depth[p] for p in preds[node]), default=0)
            del remaining[node]
        for k, v in remaining.items():
            v.difference_update(ready)
            if not v:
                nxt.append(k)
        ready = sorted(nxt)
    if remaining:  # pragma: no cover - geometry forbids cycles
        raise RuntimeError(f"precedence cycle among {sorted(remaining)}")

    k = max((v for n, v in depth.items() if n != a0), default=0)
    layers = tuple(
        tuple(sorted(n for n, v in depth.items() if v == i and n != a0)) for i in range(1, k + 1)
    )
    overlaps = []
    for ids in layers:
        for a, b in combinations(ids, 2):
            if segments_overlap(dag.device(a).segment, dag.device(b).segment):
                overlaps.append((a, b))
    if overlaps:
        warnings.warn(f"same-layer devices share spacetime points: {overlaps}", OverlapWarning, stacklevel=2)
    return LayerDecomposition(a0, layers, tuple(overlaps))


def layer_devices(devices: Iterable[Device]) -> LayerDecomposition:
    return layer(build_precedence(devices))
