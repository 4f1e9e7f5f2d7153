"""Random valid device arrangements shared by the ordering tests."""
from __future__ import annotations

import math

import numpy as np

from kgcollapse.causal_order import Device, DeviceKind, validate
from kgcollapse.spacetime import Event, Rapidity, SpacelikeSegment


def make_device(id, t, x, L, eta=0.0, kind=DeviceKind.POSITION) -> Device:
    seg = SpacelikeSegment(Event(t, x), L, Rapidity(eta))
    return Device(id, seg, t * math.cosh(eta) - x * math.sinh(eta), kind)


def preparer(L=0.5) -> Device:
    return make_device("A0", 0.0, 0.0, L, 0.0, DeviceKind.PREPARER)


def random_configuration(rng: np.random.Generator, n_max: int = 12) -> list[Device]:
    """Preparer plus up to ``n_max - 1`` detectors; every prefix validates cleanly."""
    devices = [preparer()]
    target = int(rng.integers(2, n_max + 1))
    attempts = 0
    while len(devices) < target and attempts < 400:
        attempts += 1
        t = rng.uniform(1.5, 25.0)
        x = rng.uniform(-0.8, 0.8) * t
        d = make_device(f"D{len(devices):02d}", t, x, rng.uniform(0.2, 2.0), rng.uniform(-0.8, 0.8))
        if validate(devices + [d]).ok:
            devices.append(d)
    return devices


def random_configurations(n: int, seed: int = 0) -> list[list[Device]]:
    rng = np.random.default_rng(seed)
    return [random_configuration(rng) for _ in range(n)]
