"""Experiment files, machine-readable reports and the command line.

Experiment files are JSON. Every key is required and unknown keys are
rejected; lengths and times are given in Compton wavelengths and momenta in
units of the mass, as the key suffixes say. Reports are written with sorted
keys so identical inputs give identical bytes.

Exit codes: 0 success, 2 usage, 3 parse or schema error, 4 physics
validation failure, 5 numerical guard.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
import warnings
from pathlib import Path
from typing import Any, Sequence

import jsonschema

from .causal_order import Device, DeviceKind, ValidationError, ValidationReport, validate
from .experiments import Experiment, PacketSpec, commutator_scan, covariance_report, density_on_slice, make_experiment
from .kg_hilbert import CutoffWarning, GridMismatchError, MomentumGrid, NullStateError, boost_norm_drift
from .reduction import BranchLimitError, NullOutcomeError, device_projector, enumerate_tree, sample_paths
from .relational_obs import idempotence_defect
from .spacetime import Event, Rapidity, SpacelikeSegment, boost_event

__all__ = [
    "EXPERIMENT_SCHEMA",
    "PREPARER_ID",
    "ParseError",
    "PhysicsError",
    "parse",
    "parse_text",
    "experiment_to_dict",
    "run_report",
    "dumps",
    "main",
    "EXIT_OK",
    "EXIT_USAGE",
    "EXIT_PARSE",
    "EXIT_PHYSICS",
    "EXIT_NUMERIC",
]

EXIT_OK, EXIT_USAGE, EXIT_PARSE, EXIT_PHYSICS, EXIT_NUMERIC = 0, 2, 3, 4, 5

# the preparer carries no id in the file format
PREPARER_ID = "A0"

_NUM = {"type": "number"}


def _obj(props: dict) -> dict:
    return {"type": "object", "properties": props, "required": sorted(props), "additionalProperties": False}


EXPERIMENT_SCHEMA = _obj({
    "mass": {"type": "number", "exclusiveMinimum": 0},
    "grid": _obj({
        "N": {"type": "integer", "minimum": 2},
        "p_max_over_m": {"type": "number", "exclusiveMinimum": 0},
    }),
    "packet": _obj({
        "x0": _NUM,
        "p0_over_m": _NUM,
        "sigma_p_over_m": {"type": "number", "exclusiveMinimum": 0},
        "epsilon": {"enum": [1, -1]},
    }),
    "preparer": _obj({
        "center_t": _NUM,
        "center_x": _NUM,
        "half_length": {"type": "number", "exclusiveMinimum": 0},
        "rapidity": _NUM,
    }),
    "devices": {
        "type": "array",
        "items": _obj({
            "id": {"type": "string", "minLength": 1},
            "kind": {"enum": [k.value for k in DeviceKind]},
            "center_t": _NUM,
            "center_x": _NUM,
            "half_length": {"type": "number", "exclusiveMinimum": 0},
            "rapidity": _NUM,
            "proper_time": _NUM,
        }),
    },
})


class ParseError(ValueError):
    """I/O, syntax or schema failure; ``code`` is one of io, syntax, schema."""

    def __init__(self, code: str, message: str, line: int | None = None):
        self.code, self.line = code, line
        where = f" (line {line})" if line else ""
        super().__init__(f"{code} error{where}: {message}")


class PhysicsError(ValueError):
    """Arrangement is well formed but physically inconsistent."""


# --- line lookup -----------------------------------------------------------

_WS = " \t\r\n"


def _skip(text: str, i: int) -> int:
    while i < len(text) and text[i] in _WS:
        i += 1
    return i


def _value_offsets(text: str) -> dict[tuple, int]:
    """Character offset of every value in a syntactically valid JSON text."""
    dec = json.JSONDecoder()
    out: dict[tuple, int] = {}

    def walk(i: int, path: tuple) -> int:
        i = _skip(text, i)
        out[path] = i
        if text[i] == "{":
            i = _skip(text, i + 1)
            if text[i] == "}":
                return i + 1
            while True:
                key, i = json.decoder.scanstring(text, _skip(text, i) + 1)
                i = _skip(text, i) + 1  # colon
                i = _skip(text, walk(i, path + (key,)))
                if text[i] == "}":
                    return i + 1
                i += 1
        if text[i] == "[":
            i = _skip(text, i + 1)
            if text[i] == "]":
                return i + 1
            k = 0
            while True:
                i = _skip(text, walk(i, path + (k,)))
                k += 1
                if text[i] == "]":
                    return i + 1
                i += 1
        _, end = dec.raw_decode(text, i)
        return end

    walk(0, ())
    return out


def _line_of(text: str, path: Sequence) -> int | None:
    offsets = _value_offsets(text)
    path = tuple(path)
    while path not in offsets and path:
        path = path[:-1]
    return text.count("\n", 0, offsets[path]) + 1 if path in offsets else None


def _path_str(path: Sequence) -> str:
    s = "".join(f"[{p}]" if isinstance(p, int) else f".{p}" for p in path)
    return s.lstrip(".") or "<root>"


# --- parsing ---------------------------------------------------------------


def _no_duplicate_keys(pairs):
    seen = {}
    for k, v in pairs:
        if k in seen:
            raise ParseError("schema", f"duplicate key {k!r}")
        seen[k] = v
    return seen


def _load(text: str) -> dict:
    try:
        data = json.loads(text, object_pairs_hook=_no_duplicate_keys)
    except json.JSONDecodeError as exc:
        raise ParseError("syntax", exc.msg, exc.lineno) from None
    errors = sorted(jsonschema.Draft202012Validator(EXPERIMENT_SCHEMA).iter_errors(data),
                    key=lambda e: (list(map(str, e.absolute_path)), e.message))
    if errors:
        err = errors[0]
        raise ParseError("schema", f"{_path_str(err.absolute_path)}: {err.message}",
                         _line_of(text, err.absolute_path))
    return data


def _device(d: dict, m: float, kind: DeviceKind, id: str, proper_time: float | None = None) -> Device:
    lc = 1.0 / m
    seg = SpacelikeSegment(Event(d["center_t"] * lc, d["center_x"] * lc), d["half_length"] * lc, Rapidity(d["rapidity"]))
    if proper_time is None:
        proper_time = boost_event(seg.center, -seg.rapidity.chi).t
    else:
        proper_time = proper_time * lc
    return Device(id, seg, proper_time, kind)


def _build(data: dict) -> Experiment | ValidationReport:
    m = float(data["mass"])
    grid = MomentumGrid.default(mass=m, N=data["grid"]["N"], p_max_over_m=data["grid"]["p_max_over_m"])
    pk = data["packet"]
    packet = PacketSpec(pk["x0"], pk["p0_over_m"], pk["sigma_p_over_m"], pk["epsilon"])
    preparer = _device(data["preparer"], m, DeviceKind.PREPARER, PREPARER_ID)
    devices = [_device(d, m, DeviceKind(d["kind"]), d["id"], d["proper_time"]) for d in data["devices"]]
    report = validate([preparer, *devices])
    if not report.ok:
        return report
    try:
        return make_experiment(grid, packet, preparer, devices)
    except ValidationError as exc:  # pragma: no cover - validate() already ran
        return exc.report
    except ValueError as exc:
        raise PhysicsError(str(exc)) from None


def parse_text(text: str) -> Experiment | ValidationReport:
    """Parse an experiment file body; schema problems raise :class:`ParseError`."""
    return _build(_load(text))


def parse(path: str | Path) -> Experiment | ValidationReport:
    """Parse an experiment file into an :class:`Experiment` or a failed :class:`ValidationReport`."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ParseError("io", f"{path}: {exc.strerror or exc}") from None
    return parse_text(text)


def experiment_to_dict(e: Experiment) -> dict:
    """Inverse of :func:`parse` for a lab-frame experiment."""
    m = e.grid.mass

    def seg(d: Device) -> dict:
        s = d.segment
        return {"center_t": s.center.t * m, "center_x": s.center.x * m,
                "half_length": s.half_length * m, "rapidity": s.rapidity.chi}

    return {
        "mass": m,
        "grid": {"N": e.grid.N, "p_max_over_m": e.grid.p_max / m},
        "packet": e.packet.to_dict(),
        "preparer": seg(e.preparer),
        "devices": [{"id": d.id, "kind": d.kind.value, **seg(d), "proper_time": d.proper_time * m}
                    for d in e.detectors],
    }


# --- reports ---------------------------------------------------------------


def _version() -> str:
    from . import __version__

    return __version__


def dumps(obj: Any) -> str:
    """Canonical JSON: sorted keys, fixed indentation, trailing newline."""
    return json.dumps(obj, sort_keys=True, indent=2, allow_nan=True) + "\n"


def _diagnostics(e: Experiment) -> dict:
    from .reduction import layer_ambiguity

    idem = {d.id: idempotence_defect(device_projector(d, e.grid))
            for d in e.detectors if d.kind is DeviceKind.POSITION}
    comm = {str(i): layer_ambiguity(layer, e.grid) for i, layer in enumerate(e.layered_devices(), start=1)}
    drift = {d.id: boost_norm_drift(e.state, -d.rapidity) for d in e.detectors if d.rapidity != 0.0}
    return {"grid": e.grid.to_dict(), "idempotence_residuals": idem,
            "layer_commutator_norms": comm, "boost_norm_drift": drift}


def run_report(e: Experiment, inputs: dict, mode: str, seed: int | None) -> dict:
    """Report for ``run``; enumerate mode gives the tree and all layer tables."""
    body: dict = {
        "tool": {"name": "kgcollapse", "version": _version()},
        "inputs": inputs,
        "mode": mode,
        "seed": seed,
        "layers": [list(ids) for ids in e.decomposition.layers],
    }
    if mode == "enumerate":
        tree = enumerate_tree(e)
        body["tree"] = tree.to_dict()["tree"]
        body["probability_tables"] = [
            {"given": {k: v.value for o in prefix for k, v in o}, **t.to_dict()} for prefix, t in tree.tables
        ]
        body["leaf_total"] = math.fsum(p for _, p in tree.leaves())
    else:
        body["path"] = sample_paths(e, seed, 1)[0].to_dict()
    body["diagnostics"] = _diagnostics(e)
    return body


def _csv(header: Sequence[str], rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([repr(float(v)) for v in r])
    return buf.getvalue()


# --- command line ----------------------------------------------------------


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


def _separations(text: str) -> list[float]:
    try:
        vals = [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid separation list {text!r}") from None
    if not vals or any(not (v > 0 and math.isfinite(v)) for v in vals):
        raise argparse.ArgumentTypeError("separations must be positive finite numbers")
    return vals


def _u64(text: str) -> int:
    v = int(text)
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return v


def _positive(text: str) -> float:
    v = float(text)
    if not (v > 0 and math.isfinite(v)):
        raise argparse.ArgumentTypeError("must be a positive number")
    return v


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="kgcollapse", description="Covariant layer-by-layer reduction for a Klein-Gordon particle.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    sub.add_parser("validate", help="check an experiment file").add_argument("file")
    sub.add_parser("layers", help="list the layers of an experiment").add_argument("file")
    r = sub.add_parser("run", help="enumerate or sample outcome histories")
    r.add_argument("file")
    r.add_argument("--mode", choices=["enumerate", "sample"], required=True)
    r.add_argument("--seed", type=_u64)
    b = sub.add_parser("boost-compare", help="compare probabilities in the lab and a boosted frame")
    b.add_argument("file")
    b.add_argument("--rapidity", type=float, required=True)
    c = sub.add_parser("commutator-scan", help="commutator norm against region separation (CSV)")
    c.add_argument("--width", type=_positive, required=True)
    c.add_argument("--separations", type=_separations, required=True)
    d = sub.add_parser("density", help="position density on a time slice (CSV)")
    d.add_argument("file")
    d.add_argument("--rapidity", type=float, required=True)
    d.add_argument("--time", type=float, required=True)
    return p


def _load_experiment(path: str) -> tuple[Experiment | ValidationReport, dict]:
    result = parse(path)
    inputs = json.loads(Path(path).read_text(encoding="utf-8"))
    return result, inputs


def _dispatch(args, out) -> int:
    if args.command == "commutator-scan":
        grid = MomentumGrid.default()
        curve = commutator_scan(grid, args.width / grid.mass, 0.0, [s / grid.mass for s in args.separations])
        out.write(_csv(["d_over_compton", "commutator_norm"], curve))
        return EXIT_OK

    result, inputs = _load_experiment(args.file)
    if args.command == "validate":
        report = result if isinstance(result, ValidationReport) else ValidationReport()
        out.write(dumps(report.to_dict()))
        return EXIT_OK if report.ok else EXIT_PHYSICS
    if isinstance(result, ValidationReport):
        out.write(dumps(result.to_dict()))
        return EXIT_PHYSICS
    e = result
    if args.command == "layers":
        out.write(dumps({"preparer": e.decomposition.preparer,
                         "layers": [list(ids) for ids in e.decomposition.layers],
                         "overlaps": [list(p) for p in e.decomposition.overlaps]}))
    elif args.command == "run":
        if args.mode == "sample" and args.seed is None:
            raise _UsageError("--mode sample requires --seed")
        out.write(dumps(run_report(e, inputs, args.mode, args.seed)))
    elif args.command == "boost-compare":
        rep = covariance_report(e, args.rapidity).to_dict()
        rep["tool"] = {"name": "kgcollapse", "version": _version()}
        out.write(dumps(rep))
    elif args.command == "density":
        m = e.grid.mass
        x, dens = density_on_slice(e.state, args.rapidity, args.time / m)
        out.write(_csv(["x_over_compton", "density"], zip(x * m, dens / m)))
    return EXIT_OK


def main(argv: Sequence[str] | None = None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    try:
        args = build_parser().parse_args(argv)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", CutoffWarning)
            return _dispatch(args, out)
    except _UsageError as exc:
        err.write(f"usage error: {exc}\n")
        return EXIT_USAGE
    except ParseError as exc:
        err.write(f"{exc}\n")
        return EXIT_PARSE
    except (PhysicsError, ValidationError) as exc:
        err.write(f"physics error: {exc}\n")
        return EXIT_PHYSICS
    except (BranchLimitError, NullOutcomeError, NullStateError, GridMismatchError) as exc:
        err.write(f"numerical guard: {exc}\n")
        return EXIT_NUMERIC


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
