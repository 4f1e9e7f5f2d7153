"""Layer-by-layer reduction: joint outcomes, Born probabilities and collapse.

Within a layer the factors are applied in ascending device-id order unless
an explicit order is given. Probabilities of a layer are ``||Op s||^2``
over all outcome tuples. Branch states are carried in the rest frame of
the last device applied and boosted only when the next device moves with a
different rapidity, so co-moving devices never trigger a boost.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from functools import lru_cache
from itertools import combinations
from typing import Iterator, Mapping, Sequence

import numpy as np

from .causal_order import Device, DeviceKind
from .kg_hilbert import KGState, MomentumGrid, boost_state, norm
from .relational_obs import (
    ProjectorMatrix,
    commutator_norm,
    complement,
    energy_sign_projector,
    nw_projector,
)

__all__ = [
    "Outcome",
    "OutcomeTuple",
    "ProbabilityTable",
    "LayerOperator",
    "LayerRecord",
    "OutcomeRecord",
    "OutcomeNode",
    "OutcomeTree",
    "NullOutcomeError",
    "BranchLimitError",
    "device_projector",
    "layer_operator",
    "layer_ambiguity",
    "enumerate_layer",
    "collapse",
    "run",
    "enumerate_tree",
    "sample_paths",
    "conditional_probability",
    "MAX_LAYER_SIZE",
    "MAX_BRANCHES",
    "PRUNE",
]

MAX_LAYER_SIZE = 16
MAX_BRANCHES = 4096
PRUNE = 1e-12


class NullOutcomeError(ValueError):
    """Collapse or conditioning on an outcome of (numerically) zero probability."""


class BranchLimitError(RuntimeError):
    pass


class Outcome(enum.Enum):
    DETECTED = "Detected"
    NOT_DETECTED = "NotDetected"
    PLUS = "Plus"
    MINUS = "Minus"

    @property
    def positive(self) -> bool:
        return self in (Outcome.DETECTED, Outcome.PLUS)


# sorted ((device_id, Outcome), ...); hashable and order-independent
OutcomeTuple = tuple


def outcome_tuple(mapping: Mapping[str, Outcome | str]) -> OutcomeTuple:
    return tuple(sorted((k, Outcome(v)) for k, v in mapping.items()))


def _outcomes_for(d: Device) -> tuple[Outcome, Outcome]:
    if d.kind is DeviceKind.ENERGY_SIGN:
        return Outcome.PLUS, Outcome.MINUS
    if d.kind is DeviceKind.POSITION:
        return Outcome.DETECTED, Outcome.NOT_DETECTED
    raise ValueError(f"device {d.id!r} of kind {d.kind.value} does not measure")


@lru_cache(maxsize=256)
def _cached_projector(grid: MomentumGrid, kind: DeviceKind, region, T: float, eta: float, label: str):
    if kind is DeviceKind.ENERGY_SIGN:
        return energy_sign_projector(grid, 1, label=label)
    return nw_projector(grid, region, T, eta, 1, label=label)


def device_projector(d: Device, grid: MomentumGrid) -> ProjectorMatrix:
    """Projector for the positive outcome of ``d`` (Detected or Plus).

    Position detectors use the rest-frame region of the segment at the
    device clock reading, on the positive-energy sector.
    """
    if d.kind is DeviceKind.PREPARER:
        raise ValueError("the preparer has no measurement projector")
    region = tuple(round(v, 15) for v in d.rest_frame_region())
    return _cached_projector(grid, d.kind, region, float(d.proper_time), float(d.rapidity), d.id)


def _ordered(layer: Sequence[Device], order: Sequence[str] | None) -> list[Device]:
    by_id = {d.id: d for d in layer}
    if order is None:
        return [by_id[k] for k in sorted(by_id)]
    if sorted(order) != sorted(by_id):
        raise ValueError(f"order {list(order)} does not match layer ids {sorted(by_id)}")
    return [by_id[k] for k in order]


@dataclass(frozen=True)
class LayerOperator:
    """Ordered product of local projectors or their complements.

    ``factors`` are listed in application order (first applied first).
    ``ambiguity`` is the largest pairwise commutator norm among them.
    """

    factors: tuple[tuple[str, ProjectorMatrix], ...]
    ambiguity: float = 0.0

    def apply(self, s: KGState) -> KGState:
        eta = 0.0
        for _, P in self.factors:
            if P.eta != eta:
                s = boost_state(s, eta - P.eta, renormalize=False, warn=False)
                eta = P.eta
            s = P.act_rest(s)
        if eta != 0.0:
            s = boost_state(s, eta, renormalize=False, warn=False)
        return s


def layer_ambiguity(layer: Sequence[Device], grid: MomentumGrid) -> float:
    """Max pairwise commutator norm of the layer's projectors."""
    ps = [device_projector(d, grid) for d in sorted(layer, key=lambda d: d.id)]
    return max((_pair_commutator(a, b) for a, b in combinations(ps, 2)), default=0.0)


_COMMUTATORS: dict = {}


def _pkey(P: ProjectorMatrix) -> tuple:
    return (P.grid, P.sector, P.region, P.T, P.eta, P.other)


def _pair_commutator(a: ProjectorMatrix, b: ProjectorMatrix) -> float:
    key = (_pkey(a), _pkey(b))
    if key not in _COMMUTATORS:
        _COMMUTATORS[key] = commutator_norm(a, b)
    return _COMMUTATORS[key]


def layer_operator(layer: Sequence[Device], outcome: Mapping[str, Outcome] | OutcomeTuple,
                   grid: MomentumGrid, order: Sequence[str] | None = None,
                   diagnostics: bool = True) -> LayerOperator:
    outcome = dict(outcome)
    devs = _ordered(layer, order)
    if set(outcome) != {d.id for d in devs}:
        raise ValueError(f"outcome keys {sorted(outcome)} do not match layer {sorted(d.id for d in devs)}")
    factors = []
    for d in devs:
        o = Outcome(outcome[d.id])
        if o not in _outcomes_for(d):
            raise ValueError(f"outcome {o.value} is not available for {d.id}")
        P = device_projector(d, grid)
        factors.append((d.id, P if o.positive else complement(P)))
    amb = layer_ambiguity(devs, grid) if diagnostics else float("nan")
    return LayerOperator(tuple(factors), amb)


@dataclass(frozen=True)
class ProbabilityTable:
    """Joint outcome probabilities of one layer.

    ``norm_defect`` is 1 minus the raw total before the table was
    normalized; it is nonzero only when boosts lose weight at the cutoff.
    """

    layer_index: int
    entries: tuple[tuple[OutcomeTuple, float], ...]
    norm_defect: float = 0.0
    ambiguity: float = float("nan")

    def __iter__(self):
        return iter(self.entries)

    def __len__(self) -> int:
        return len(self.entries)

    def total(self) -> float:
        return math.fsum(p for _, p in self.entries)

    def probability(self, outcome) -> float:
        key = outcome if isinstance(outcome, tuple) else outcome_tuple(outcome)
        for o, p in self.entries:
            if o == key:
                return p
        raise KeyError(outcome)

    def to_dict(self) -> dict:
        return {
            "layer": self.layer_index,
            "norm_defect": self.norm_defect,
            "ambiguity": self.ambiguity,
            "outcomes": [{"outcome": {k: v.value for k, v in o}, "probability": p} for o, p in self.entries],
        }


def _branch_states(s: KGState, eta0: float, devs: Sequence[Device],
                   grid: MomentumGrid) -> Iterator[tuple[tuple, KGState, float]]:
    """All 2^n (outcomes, unnormalized state, frame rapidity) triples.

    ``s`` is given in the rest frame of rapidity ``eta0``; each branch state
    is returned in the frame of the last factor applied. Prefixes are shared.
    """

    def rec(i, cur, eta, outs):
        if i == len(devs):
            yield outs, cur, eta
            return
        d = devs[i]
        P = device_projector(d, grid)
        if P.eta != eta:
            cur = boost_state(cur, eta - P.eta, renormalize=False, warn=False)
            eta = P.eta
        yes = P.act_rest(cur)
        no = cur - yes
        pos, neg = _outcomes_for(d)
        yield from rec(i + 1, yes, eta, outs + ((d.id, pos),))
        yield from rec(i + 1, no, eta, outs + ((d.id, neg),))

    yield from rec(0, s, eta0, ())


def _layer_branches(s: KGState, eta0: float, layer: Sequence[Device], layer_index: int,
                    order: Sequence[str] | None, diagnostics: bool):
    if len(layer) > MAX_LAYER_SIZE:
        raise BranchLimitError(f"layer of {len(layer)} devices exceeds {MAX_LAYER_SIZE}")
    grid = s.grid
    devs = _ordered(layer, order)
    raw = []
    for outs, st, eta in _branch_states(s, eta0, devs, grid):
        raw.append((tuple(sorted(outs)), norm(st) ** 2, st, eta))
    total = math.fsum(r[1] for r in raw)
    if not total > 0:
        raise NullOutcomeError("layer annihilates the state")
    raw.sort(key=lambda r: tuple((k, v.value) for k, v in r[0]))
    entries = tuple((r[0], min(max(r[1] / total, 0.0), 1.0)) for r in raw)
    amb = layer_ambiguity(devs, grid) if diagnostics else float("nan")
    table = ProbabilityTable(layer_index, entries, 1.0 - total / norm(s) ** 2, amb)
    states = {r[0]: (r[2], r[3]) for r in raw}
    return table, states


def enumerate_layer(state: KGState, layer: Sequence[Device], layer_index: int = 1,
                    order: Sequence[str] | None = None, diagnostics: bool = True) -> ProbabilityTable:
    return _layer_branches(state, 0.0, layer, layer_index, order, diagnostics)[0]


def collapse(state: KGState, layer: Sequence[Device], outcome, order: Sequence[str] | None = None) -> KGState:
    """Normalized projection of ``state`` on the layer outcome."""
    op = layer_operator(layer, outcome, state.grid, order, diagnostics=False)
    out = op.apply(state)
    n = norm(out)
    if n * n <= PRUNE * norm(state) ** 2:
        raise NullOutcomeError(f"outcome {dict(outcome)} has probability {n * n:.3e}")
    return out * (1.0 / n)


@dataclass
class OutcomeNode:
    layer_index: int
    outcome: OutcomeTuple
    probability: float  # conditional on the parent
    path_probability: float
    norm_after: float = 1.0
    children: list["OutcomeNode"] = field(default_factory=list)


@dataclass
class OutcomeTree:
    root: OutcomeNode
    layers: tuple[tuple[str, ...], ...]
    tables: list[tuple[tuple, ProbabilityTable]] = field(default_factory=list)

    def leaves(self) -> Iterator[tuple[tuple[OutcomeTuple, ...], float]]:
        def rec(node, path):
            if not node.children:
                yield path, node.path_probability
                return
            for c in node.children:
                yield from rec(c, path + (c.outcome,))

        yield from rec(self.root, ())

    def joint(self) -> dict:
        """Flat map from full outcome assignment to path probability."""
        out = {}
        for path, p in self.leaves():
            key = tuple(sorted(kv for o in path for kv in o))
            out[key] = out.get(key, 0.0) + p
        return out

    def to_dict(self) -> dict:
        def rec(n):
            return {
                "layer": n.layer_index,
                "outcome": {k: v.value for k, v in n.outcome},
                "probability": n.probability,
                "path_probability": n.path_probability,
                "norm_after": n.norm_after,
                "children": [rec(c) for c in n.children],
            }

        return {"layers": [list(x) for x in self.layers], "tree": rec(self.root)}


@dataclass(frozen=True)
class LayerRecord:
    layer_index: int
    outcome: OutcomeTuple
    probability: float
    norm_before: float
    norm_after: float


@dataclass(frozen=True)
class OutcomeRecord:
    """One sampled history, in layer order."""

    seed: int
    records: tuple[LayerRecord, ...]

    @property
    def probability(self) -> float:
        return math.prod(r.probability for r in self.records)

    def outcomes(self) -> dict[str, Outcome]:
        return {k: v for r in self.records for k, v in r.outcome}

    def to_dict(self) -> dict:
        return {
            "seed": self.seed,
            "path_probability": self.probability,
            "layers": [
                {"layer": r.layer_index, "outcome": {k: v.value for k, v in r.outcome},
                 "probability": r.probability, "norm_before": r.norm_before, "norm_after": r.norm_after}
                for r in self.records
            ],
        }


def _layers_of(experiment) -> list[list[Device]]:
    return [list(ids) for ids in experiment.layered_devices()]


class _Walker:
    """Memoized branch expansion shared by enumeration and sampling.

    Node states are kept as ``(state, eta)``: normalized amplitudes in the
    rest frame of rapidity ``eta`` (the frame of the last device applied).
    """

    def __init__(self, experiment, order: Mapping[int, Sequence[str]] | None, diagnostics: bool):
        self.layers = _layers_of(experiment)
        self.start = (experiment.state, 0.0)
        self.order = order or {}
        self.diagnostics = diagnostics
        self.memo: dict = {}

    def expand(self, prefix: tuple, node_state):
        if prefix not in self.memo:
            i = len(prefix)
            st, eta = node_state
            table, states = _layer_branches(st, eta, self.layers[i], i + 1, self.order.get(i + 1), self.diagnostics)
            children = {}
            for o, p in table.entries:
                if p > PRUNE:
                    child, child_eta = states[o]
                    nb = norm(child)
                    children[o] = (p, nb, (child * (1.0 / nb), child_eta))
            self.memo[prefix] = (table, children)
        return self.memo[prefix]


def enumerate_tree(experiment, order: Mapping[int, Sequence[str]] | None = None,
                   max_branches: int = MAX_BRANCHES, diagnostics: bool = True) -> OutcomeTree:
    """Full branching history with conditional and path probabilities.

    Branches below ``PRUNE`` are dropped; more than ``max_branches`` live
    branches raise :class:`BranchLimitError`.
    """
    w = _Walker(experiment, order, diagnostics)
    root = OutcomeNode(0, (), 1.0, 1.0)
    tree = OutcomeTree(root, tuple(tuple(d.id for d in sorted(l, key=lambda d: d.id)) for l in w.layers))
    frontier = [(root, (), w.start)]
    for depth in range(len(w.layers)):
        nxt = []
        for node, prefix, st in frontier:
            table, children = w.expand(prefix, st)
            tree.tables.append((prefix, table))
            for o, (p, _, child_state) in children.items():
                child = OutcomeNode(depth + 1, o, p, node.path_probability * p, norm(child_state[0]))
                node.children.append(child)
                nxt.append((child, prefix + (o,), child_state))
        if len(nxt) > max_branches:
            raise BranchLimitError(f"{len(nxt)} branches after layer {depth + 1} exceed {max_branches}")
        frontier = nxt
    return tree


def sample_paths(experiment, seed: int, n: int = 1, order: Mapping[int, Sequence[str]] | None = None,
                 diagnostics: bool = False) -> list[OutcomeRecord]:
    """Draw ``n`` histories; one uniform variate per layer from ``default_rng(seed)``."""
    if seed is None:
        raise ValueError("sampling requires an explicit seed")
    rng = np.random.default_rng(seed)
    w = _Walker(experiment, order, diagnostics)
    out = []
    for _ in range(n):
        prefix, st, recs = (), w.start, []
        for depth in range(len(w.layers)):
            table, children = w.expand(prefix, st)
            items = list(children.items())
            cum = np.cumsum([c[0] for _, c in items])
            k = min(int(np.searchsorted(cum, rng.random() * cum[-1], side="right")), len(items) - 1)
            o, (p, nb, st) = items[k]
            recs.append(LayerRecord(depth + 1, o, p, nb, norm(st[0])))
            prefix = prefix + (o,)
        out.append(OutcomeRecord(seed, tuple(recs)))
    return out


def run(experiment, mode: str = "enumerate", seed: int | None = None,
        order: Mapping[int, Sequence[str]] | None = None):
    """``mode='enumerate'`` returns an :class:`OutcomeTree`; ``'sample'`` one :class:`OutcomeRecord`."""
    if mode == "enumerate":
        return enumerate_tree(experiment, order)
    if mode == "sample":
        if seed is None:
            raise ValueError("sample mode requires a seed")
        return sample_paths(experiment, seed, 1, order)[0]
    raise ValueError(f"unknown mode {mode!r}")


def conditional_probability(experiment, given: Mapping[str, Outcome], target: Mapping[str, Outcome],
                            order: Mapping[int, Sequence[str]] | None = None, tree: OutcomeTree | None = None) -> float:
    """P(target | given) from the enumerated tree, marginalizing other devices."""
    tree = tree or enumerate_tree(experiment, order, diagnostics=False)
    given = {k: Outcome(v) for k, v in given.items()}
    target = {k: Outcome(v) for k, v in target.items()}
    p_given = p_both = 0.0
    for key, p in tree.joint().items():
        assign = dict(key)
        if all(assign.get(k) is v for k, v in given.items()):
            p_given += p
            if all(assign.get(k) is v for k, v in target.items()):
                p_both += p
    if p_given <= PRUNE:
        raise NullOutcomeError(f"conditioning event {given} has probability {p_given:.3e}")
    return p_both / p_given
