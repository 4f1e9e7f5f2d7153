"""Covariant state reduction for a Klein-Gordon particle.

Devices are ordered by the light-cone partial order of their spacetime
regions, grouped into layers of mutually spacelike devices, realized as
Newton-Wigner local projectors, and used to collapse a momentum-space
state layer by layer.
"""
from .spacetime import (
    CausalRelation,
    Event,
    IntervalClass,
    Rapidity,
    SpacelikeSegment,
    boost_event,
    causal_relation,
    classify_interval,
    segment_endpoints,
)
from .causal_order import (
    Device,
    DeviceKind,
    LayerDecomposition,
    PrecedenceDag,
    ValidationError,
    ValidationReport,
    build_precedence,
    layer,
    validate,
)
from .kg_hilbert import (
    KGState,
    MomentumGrid,
    boost_state,
    gaussian_packet,
    inner,
    norm,
    normalize,
)
from .relational_obs import (
    ProjectorMatrix,
    apply,
    commutator_norm,
    complement,
    energy_sign_projector,
    expectation_X,
    nw_projector,
)
from .reduction import (
    Outcome,
    ProbabilityTable,
    collapse,
    conditional_probability,
    enumerate_layer,
    layer_operator,
    run,
)
from .experiments import (
    Experiment,
    PacketSpec,
    boost_experiment,
    commutator_scan,
    covariance_report,
    density_on_slice,
    scenario,
)

__version__ = "0.1.0"

__all__ = [
    "CausalRelation",
    "Event",
    "IntervalClass",
    "Rapidity",
    "SpacelikeSegment",
    "boost_event",
    "causal_relation",
    "classify_interval",
    "segment_endpoints",
    "Device",
    "DeviceKind",
    "LayerDecomposition",
    "PrecedenceDag",
    "ValidationError",
    "ValidationReport",
    "build_precedence",
    "layer",
    "validate",
    "KGState",
    "MomentumGrid",
    "boost_state",
    "gaussian_packet",
    "inner",
    "norm",
    "normalize",
    "ProjectorMatrix",
    "apply",
    "commutator_norm",
    "complement",
    "energy_sign_projector",
    "expectation_X",
    "nw_projector",
    "Outcome",
    "ProbabilityTable",
    "collapse",
    "conditional_probability",
    "enumerate_layer",
    "layer_operator",
    "run",
    "Experiment",
    "PacketSpec",
    "boost_experiment",
    "commutator_scan",
    "covariance_report",
    "density_on_slice",
    "scenario",
]
