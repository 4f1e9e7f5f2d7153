"""Order a handful of devices by their light cones and group them into layers.

Run: python demos/01_causal_layers.py
"""
from kgcollapse.causal_order import Device, DeviceKind, boost_device, build_precedence, layer, validate
from kgcollapse.spacetime import Event, SpacelikeSegment, causal_relation


def device(id, t, x, half, kind=DeviceKind.POSITION):
    return Device(id, SpacelikeSegment(Event(t, x), half), proper_time=t, kind=kind)


devices = [
    device("A0", 0.0, 0.0, 0.5, DeviceKind.PREPARER),
    device("L", 4.0, -3.0, 1.0),
    device("R", 4.0, 3.0, 1.0),
    device("S", 10.0, 0.0, 2.0),
]

print("pairwise relations")
for i, a in enumerate(devices):
    for b in devices[i + 1:]:
        print(f"  {a.id:>2} vs {b.id:<2} {causal_relation(a.segment, b.segment).value}")

report = validate(devices)
print("valid configuration:", report.ok)

layers = layer(build_precedence(devices))
print("layers:", layers.as_lists())

# A boost reshuffles lab-frame times but never the layers.
for chi in (-1.0, 1.0):
    moved = [boost_device(d, chi) for d in devices]
    times = {d.id: round(d.segment.center.t, 3) for d in moved}
    print(f"rapidity {chi:+.1f}: centre times {times}, layers {layer(build_precedence(moved)).as_lists()}")
