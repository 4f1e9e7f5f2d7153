"""Experiments, frame changes and the covariance checks built on them."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .causal_order import (
    Device,
    DeviceKind,
    LayerDecomposition,
    ValidationError,
    boost_device,
    build_precedence,
    layer,
    validate,
)
from .kg_hilbert import (
    KGState,
    MomentumGrid,
    boost_norm_drift,
    boost_state,
    evolve,
    gaussian_packet,
    position_amplitudes,
)
from .relational_obs import commutator_norm, nw_projector
from .reduction import OutcomeTree, enumerate_tree
from .spacetime import Event, Rapidity, SpacelikeSegment, segment_endpoints

__all__ = [
    "PacketSpec",
    "Experiment",
    "CovarianceReport",
    "make_experiment",
    "boost_experiment",
    "covariance_report",
    "commutator_scan",
    "density_on_slice",
    "scenario",
    "SCENARIOS",
    "REL_FLOOR",
]

# outcomes below this probability are compared in absolute terms only
REL_FLOOR = 1e-6


@dataclass(frozen=True)
class PacketSpec:
    """Gaussian preparation; lengths in Compton units, momenta in units of m."""

    x0: float = 0.0
    p0_over_m: float = 0.0
    sigma_p_over_m: float = 0.5
    epsilon: int = 1

    def to_dict(self) -> dict:
        return {"x0": self.x0, "p0_over_m": self.p0_over_m,
                "sigma_p_over_m": self.sigma_p_over_m, "epsilon": self.epsilon}


@dataclass(frozen=True, eq=False)
class Experiment:
    grid: MomentumGrid
    packet: PacketSpec
    preparer: Device
    detectors: tuple[Device, ...]
    state: KGState
    decomposition: LayerDecomposition
    frame_rapidity: float = 0.0
    diagnostics: dict = field(default_factory=dict)

    @property
    def devices(self) -> tuple[Device, ...]:
        return (self.preparer,) + self.detectors

    def device(self, device_id: str) -> Device:
        for d in self.devices:
            if d.id == device_id:
                return d
        raise KeyError(device_id)

    def layered_devices(self) -> list[list[Device]]:
        return [[self.device(i) for i in ids] for ids in self.decomposition.layers]


def _prepared_state(grid: MomentumGrid, packet: PacketSpec, preparer: Device) -> KGState:
    """Gaussian packet whose NW profile is centred on x0 at the preparation event.

    The preparation event is the point of the preparer segment above x0; the
    packet is the free Gaussian at that lab time, i.e. exp(+i eps omega t) times
    the clock-zero packet.
    """
    m = grid.mass
    x0 = packet.x0 / m
    left, right = segment_endpoints(preparer.segment)
    tol = 1e-9 * max(1.0, abs(x0))
    if not (left.x - tol <= x0 <= right.x + tol):
        raise ValueError(f"packet centre x0={packet.x0} is not on the preparer segment")
    t_prep = preparer.segment.time_at(x0)
    s = gaussian_packet(grid, x0, packet.p0_over_m * m, packet.sigma_p_over_m * m, packet.epsilon)
    return evolve(s, -t_prep) if t_prep != 0.0 else s


def make_experiment(grid: MomentumGrid, packet: PacketSpec, preparer: Device,
                    detectors: Sequence[Device]) -> Experiment:
    """Validate the arrangement, layer it and prepare the initial state."""
    if preparer.kind is not DeviceKind.PREPARER:
        raise ValueError("preparer must have kind Preparer")
    devices = [preparer, *detectors]
    report = validate(devices)
    if not report.ok:
        raise ValidationError(report)
    decomp = layer(build_precedence(devices))
    state = _prepared_state(grid, packet, preparer)
    return Experiment(grid, packet, preparer, tuple(sorted(detectors, key=lambda d: d.id)), state, decomp)


def boost_experiment(e: Experiment, chi: float) -> Experiment:
    """The same arrangement and state seen after an active boost by ``chi``."""
    chi = float(getattr(chi, "chi", chi))
    if chi == 0.0:
        return e
    preparer = boost_device(e.preparer, chi)
    detectors = tuple(boost_device(d, chi) for d in e.detectors)
    drift = boost_norm_drift(e.state, chi)
    state = boost_state(e.state, chi, warn=True)
    decomp = layer(build_precedence([preparer, *detectors]))
    diag = dict(e.diagnostics)
    diag["boost_norm_drift"] = diag.get("boost_norm_drift", 0.0) + drift
    return Experiment(e.grid, e.packet, preparer, detectors, state, decomp, e.frame_rapidity + chi, diag)


@dataclass(frozen=True)
class CovarianceReport:
    chi: float
    pairs: tuple[tuple[dict, float, float], ...]
    max_abs_deviation: float
    max_rel_deviation: float
    diagnostics: dict

    def to_dict(self) -> dict:
        return {
            "rapidity": self.chi,
            "max_abs_deviation": self.max_abs_deviation,
            "max_rel_deviation": self.max_rel_deviation,
            "rel_floor": REL_FLOOR,
            "pairs": [{"outcome": o, "lab": a, "boosted": b} for o, a, b in self.pairs],
            "diagnostics": self.diagnostics,
        }


def _leaf_map(tree: OutcomeTree) -> dict:
    return {tuple((k, v.value) for k, v in key): p for key, p in tree.joint().items()}


def covariance_report(e: Experiment, chi: float, order: Mapping[int, Sequence[str]] | None = None) -> CovarianceReport:
    """Enumerate in the lab and in the boosted frame and compare joint probabilities.

    Relative deviation is ``|a - b| / max(a, b)`` over outcomes whose larger
    probability is at least ``REL_FLOOR``.
    """
    chi = float(chi)
    eb = boost_experiment(e, chi)
    if eb.decomposition.layers != e.decomposition.layers:
        raise AssertionError("layer decomposition changed under a boost")
    lab = _leaf_map(enumerate_tree(e, order, diagnostics=False))
    boosted = _leaf_map(enumerate_tree(eb, order, diagnostics=False))
    keys = sorted(set(lab) | set(boosted))
    pairs, max_abs, max_rel = [], 0.0, 0.0
    for k in keys:
        a, b = lab.get(k, 0.0), boosted.get(k, 0.0)
        pairs.append((dict(k), a, b))
        max_abs = max(max_abs, abs(a - b))
        if max(a, b) >= REL_FLOOR:
            max_rel = max(max_rel, abs(a - b) / max(a, b))
    diag = {
        "grid": e.grid.to_dict(),
        "boost_norm_drift": eb.diagnostics.get("boost_norm_drift", 0.0),
        "outcome_sets_identical": set(lab) == set(boosted),
    }
    return CovarianceReport(chi, tuple(pairs), max_abs, max_rel, diag)


def commutator_scan(grid: MomentumGrid, width: float, T: float, separations: Sequence[float]) -> list[tuple[float, float]]:
    """(d / Compton, ||[P_left, P_right]||) for same-clock regions centred at -d/2 and +d/2."""
    out = []
    for d in separations:
        if d < 0:
            raise ValueError("separations must be non-negative")
        a = nw_projector(grid, (-d / 2 - width / 2, -d / 2 + width / 2), T)
        b = nw_projector(grid, (d / 2 - width / 2, d / 2 + width / 2), T)
        out.append((d * grid.mass, commutator_norm(a, b)))
    return out


def density_on_slice(state: KGState, chi: float, t: float) -> tuple[np.ndarray, np.ndarray]:
    """NW position density at time ``t`` of the frame reached by an active boost ``chi``.

    Returns ``(x, density)`` on the conjugate position grid.
    """
    s = boost_state(state, chi, renormalize=False) if chi else state
    x, pp, pm = position_amplitudes(evolve(s, t))
    return x, np.abs(pp) ** 2 + np.abs(pm) ** 2


# --- canned scenarios ------------------------------------------------------


def _dev(id, t, x, L, kind=DeviceKind.POSITION, eta=0.0) -> Device:
    seg = SpacelikeSegment(Event(t, x), L, Rapidity(eta))
    return Device(id, seg, t * math.cosh(eta) - x * math.sinh(eta), kind)


def _two_slit(m: float):
    lc = 1.0 / m
    slits = [_dev("slit_L", 5 * lc, -3.5 * lc, 1 * lc), _dev("slit_R", 5 * lc, 3.5 * lc, 1 * lc)]
    screen = [_dev(f"screen_{i}", 14 * lc, c * lc, 1 * lc) for i, c in enumerate((-5.0, 0.0, 5.0))]
    return slits + screen


def _nonlocal_pair(m: float):
    lc = 1.0 / m
    return [_dev("A", 5.0 * lc, -3.5 * lc, 1 * lc), _dev("B", 5.5 * lc, 3.5 * lc, 1 * lc)]


def _chain(m: float):
    lc = 1.0 / m
    return [_dev("B", 3 * lc, 0.0, 1.5 * lc), _dev("C", 8 * lc, 0.5 * lc, 1.5 * lc), _dev("D", 13 * lc, 0.0, 2 * lc)]


SCENARIOS = {"two_slit": _two_slit, "nonlocal_pair": _nonlocal_pair, "chain": _chain}


def scenario(name: str, grid: MomentumGrid | None = None, packet: PacketSpec | None = None) -> Experiment:
    """Canned arrangements: ``two_slit``, ``nonlocal_pair`` and ``chain``.

    The preparer sits at the origin with half width 0.5 Compton lengths.
    Regions are at least 2 Compton lengths wide and spacelike neighbours
    are at least 5 apart, keeping Compton-scale effects below grid error.
    """
    if name not in SCENARIOS:
        raise ValueError(f"unknown scenario {name!r}; choose from {sorted(SCENARIOS)}")
    grid = grid or MomentumGrid.default()
    packet = packet or PacketSpec()
    prep = _dev("A0", 0.0, 0.0, 0.5 / grid.mass, DeviceKind.PREPARER)
    return make_experiment(grid, packet, prep, SCENARIOS[name](grid.mass))
