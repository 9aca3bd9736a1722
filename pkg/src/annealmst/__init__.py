"""Simulated annealing for minimum spanning trees.

Multiplicative-cooling annealer over edge subsets, the closed-form
parameter calculus that makes it an expected-polynomial (1+eps)
approximation scheme, exact oracles for small instances, structural
analyzers for heavy-edge dynamics, seeded instance generators, and a
batch CLI.
"""

from .engine import (
    AcceptanceCounts,
    EventLog,
    HeavyInclusion,
    RunRecord,
    SaConfig,
    TelemetryEvent,
    acceptance_probability,
    freeze_step,
    run,
    schedule_temperature,
)
from .errors import (
    AnnealError,
    CapExceeded,
    ConstraintViolation,
    DisconnectedInput,
    DisconnectedState,
    DomainError,
    InfeasibleSpec,
    InstanceFormatError,
    NotASpanningTree,
    NotSeparated,
    TelemetryMissing,
)
from .generators import FAMILIES, GenSpec, check_separated, generate, separation_levels
from .graph import (
    INFEASIBLE,
    Edge,
    EdgeSubset,
    Graph,
    all_ones,
    build_graph,
    component_count_below,
    fitness,
    flip,
    subset_from_bits,
)
from .instance_io import (
    instance_hash,
    parse_instance_text,
    read_instance,
    serialize_instance,
    write_instance,
)
from .oracle import (
    ApproxReport,
    SortedWeights,
    enumerate_spanning_trees,
    kruskal_mst,
    rankwise_check,
    sorted_weights,
    spanning_tree_count,
)
from .params import (
    ScheduleParams,
    WegenerSchedule,
    derive_schedule,
    ell_from_eps,
    freeze_out_a,
    kappa_bound,
    lambert_w0,
    optimal_gamma,
    t_base,
    t_end_bound,
    t_end_exact,
    wegener_schedule,
)
from .reports import TrialReport, TrialRow, report_to_csv, report_to_json, run_trials
from .structure import (
    AuditReport,
    DriftTrace,
    EdgeClass,
    EdgeClassKind,
    classify_heavy_edges,
    count_essential,
    drift_bound_factor,
    drift_trace,
    heavy_edge_audit,
    pooled_drift_decrease,
    replay_states,
)

__version__ = "0.1.0"

__all__ = [
    "AcceptanceCounts",
    "AnnealError",
    "ApproxReport",
    "AuditReport",
    "CapExceeded",
    "ConstraintViolation",
    "DisconnectedInput",
    "DisconnectedState",
    "DomainError",
    "DriftTrace",
    "Edge",
    "EdgeClass",
    "EdgeClassKind",
    "EdgeSubset",
    "EventLog",
    "FAMILIES",
    "GenSpec",
    "Graph",
    "HeavyInclusion",
    "INFEASIBLE",
    "InfeasibleSpec",
    "InstanceFormatError",
    "NotASpanningTree",
    "NotSeparated",
    "RunRecord",
    "SaConfig",
    "ScheduleParams",
    "SortedWeights",
    "TelemetryEvent",
    "TelemetryMissing",
    "TrialReport",
    "TrialRow",
    "WegenerSchedule",
    "acceptance_probability",
    "all_ones",
    "build_graph",
    "check_separated",
    "classify_heavy_edges",
    "component_count_below",
    "count_essential",
    "derive_schedule",
    "drift_bound_factor",
    "drift_trace",
    "ell_from_eps",
    "enumerate_spanning_trees",
    "fitness",
    "flip",
    "freeze_out_a",
    "freeze_step",
    "generate",
    "heavy_edge_audit",
    "instance_hash",
    "kappa_bound",
    "kruskal_mst",
    "lambert_w0",
    "optimal_gamma",
    "parse_instance_text",
    "pooled_drift_decrease",
    "rankwise_check",
    "read_instance",
    "replay_states",
    "report_to_csv",
    "report_to_json",
    "run",
    "run_trials",
    "schedule_temperature",
    "separation_levels",
    "serialize_instance",
    "sorted_weights",
    "spanning_tree_count",
    "subset_from_bits",
    "t_base",
    "t_end_bound",
    "t_end_exact",
    "wegener_schedule",
    "write_instance",
]
