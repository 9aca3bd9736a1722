"""Runtime checks mirroring the analysis machinery: the essential-edge
trichotomy, per-epoch decay traces of non-essential heavy edges, and the
freeze-out audit of inclusion events.

All analyzers are pure functions over immutable inputs; the traces and
audits replay telemetry rather than instrumenting the engine.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Sequence

from .engine import RunRecord, freeze_step, schedule_temperature
from .errors import DisconnectedState, DomainError, TelemetryMissing
from .graph import DisjointSet, EdgeSubset, Graph, _canonical_labels, subset_from_bits
from .params import ScheduleParams


class EdgeClassKind(Enum):
    ON_CYCLE = "on_cycle"
    REMOVABLE_VIA_CHEAP_EDGE = "removable_via_cheap_edge"
    ESSENTIAL = "essential"


@dataclass(frozen=True)
class EdgeClass:
    """Classification of one selected heavy edge; witness is the index of
    the cheap reconnecting edge when the kind calls for one."""

    kind: EdgeClassKind
    witness: int | None = None


def _labels_without(g: Graph, bits: Sequence[int], skip: int) -> tuple[int, tuple[int, ...]]:
    dsu = DisjointSet(g.n)
    for j, e in enumerate(g.edges):
        if j != skip and bits[j]:
            dsu.union(e.u, e.v)
    return dsu.count, _canonical_labels(g.n, dsu)


def classify_heavy_edges(
    g: Graph, x: EdgeSubset, w: float, kappa: float
) -> dict[int, EdgeClass]:
    """Classify every selected edge of weight >= w.

    An edge is on a cycle, removable via a cheap (<= w/(1+kappa))
    non-selected edge that would reconnect its bridge cut, or essential.
    Recomputed from scratch per query; O(m^2) worst case.
    """
    if x.component_count != 1:
        raise DisconnectedState("classification needs a connected solution")
    if w <= 0.0:
        raise DomainError(f"probe threshold must be positive, got {w!r}")
    if 1.0 + kappa <= 0.0:
        raise DomainError(f"1+kappa must be positive, got kappa={kappa!r}")
    cheap = w / (1.0 + kappa)
    out: dict[int, EdgeClass] = {}
    for i, e in enumerate(g.edges):
        if not x.bits[i] or e.w < w:
            continue
        count, labels = _labels_without(g, x.bits, i)
        if count == 1:
            out[i] = EdgeClass(EdgeClassKind.ON_CYCLE)
            continue
        witness = None
        for j, f in enumerate(g.edges):
            if x.bits[j] or f.w > cheap:
                continue
            if labels[f.u] != labels[f.v]:
                witness = j
                break
        if witness is not None:
            out[i] = EdgeClass(EdgeClassKind.REMOVABLE_VIA_CHEAP_EDGE, witness)
        else:
            out[i] = EdgeClass(EdgeClassKind.ESSENTIAL)
    return out


def count_essential(g: Graph, x: EdgeSubset, w: float, kappa: float) -> int:
    """Number of essential selected edges of weight >= w.

    Bounded by component_count_below(g, w/(1+kappa)) - 1 on every
    connected state; the bound is asserted by tests, not here.
    """
    classes = classify_heavy_edges(g, x, w, kappa)
    return sum(1 for c in classes.values() if c.kind is EdgeClassKind.ESSENTIAL)


@dataclass(frozen=True)
class EpochSample:
    epoch: int
    step: int
    x_t: int
    temperature: float


@dataclass(frozen=True)
class DriftTrace:
    """x_t = non-essential selected heavy edges, sampled every 2m steps
    starting at the probe weight's freeze-out step.

    mid_inclusions counts accepted inclusions of weight > w/(1+kappa) at
    or after the trace start; traces with a nonzero count are outside the
    conditioning of the decay argument and estimators censor them.
    """

    w: float
    kappa: float
    t_w: int
    epoch_len: int
    samples: tuple[EpochSample, ...]
    mid_inclusions: int


def _replay(g: Graph, record: RunRecord, sample_steps: Sequence[int]):
    """States entering each sample step (events with step < sample applied)."""
    if record.events is None:
        raise TelemetryMissing("full telemetry is needed for replay")
    if record.config.init_bits is None:
        bits = [1] * g.m
    else:
        bits = [1 if b else 0 for b in record.config.init_bits]
    ev = record.events
    k = 0
    n_ev = len(ev)
    for target in sample_steps:
        while k < n_ev and ev.step[k] < target:
            bits[ev.edge[k]] = 1 if ev.direction[k] else 0
            k += 1
        yield target, subset_from_bits(g, bits)


def replay_states(
    g: Graph, record: RunRecord, sample_steps: Iterable[int]
) -> list[tuple[int, EdgeSubset]]:
    """Snapshots of the trajectory at the given (ascending) step indices."""
    steps = sorted(int(t) for t in sample_steps)
    return list(_replay(g, record, steps))


def drift_trace(
    g: Graph,
    record: RunRecord,
    w: float,
    kappa: float,
    a: float | None = None,
    max_epochs: int | None = None,
) -> DriftTrace:
    """Reconstruct x_t at every 2m-step epoch boundary from t_w onward."""
    if record.events is None:
        raise TelemetryMissing("drift traces need telemetry_level=full")
    cfg = record.config
    if a is None:
        a = cfg.freeze_factor
    if a is None:
        raise DomainError("freeze factor a is needed to place t_w")
    t_w = freeze_step(cfg.t0, cfg.ell, w, a)
    epoch_len = 2 * g.m
    boundaries = list(range(t_w, record.steps_executed + 1, epoch_len))
    if max_epochs is not None:
        boundaries = boundaries[: max_epochs + 1]
    samples = []
    for epoch, (step, state) in enumerate(_replay(g, record, boundaries)):
        heavy = sum(
            1 for i, e in enumerate(g.edges) if state.bits[i] and e.w >= w
        )
        x_t = heavy - count_essential(g, state, w, kappa)
        samples.append(
            EpochSample(
                epoch=epoch,
                step=step,
                x_t=x_t,
                temperature=schedule_temperature(cfg.t0, cfg.ell, step),
            )
        )
    cheap = w / (1.0 + kappa)
    ev = record.events
    mid = 0
    for k in range(len(ev)):
        if ev.direction[k] and ev.step[k] >= t_w and ev.delta_f[k] > cheap:
            mid += 1
    return DriftTrace(
        w=w,
        kappa=kappa,
        t_w=t_w,
        epoch_len=epoch_len,
        samples=tuple(samples),
        mid_inclusions=mid,
    )


def drift_bound_factor(gamma: float, n: int) -> float:
    """Per-epoch decrease factor from the decay argument: (1-e^-3)/(2*gamma*n)."""
    if gamma <= 1.0 or n < 2:
        raise DomainError("need gamma > 1 and n >= 2")
    return (1.0 - math.exp(-3.0)) / (2.0 * gamma * n)


def pooled_drift_decrease(traces: Iterable[DriftTrace]) -> tuple[float, float]:
    """Sum the one-epoch decreases and exposures over all trace pairs.

    Returns (sum of x_t - x_{t+1}, sum of x_t) over consecutive samples
    with x_t > 0. Contaminated traces (mid_inclusions > 0) are censored,
    matching the conditioning of the decay argument rather than failing
    it. The pooled ratio estimates the per-unit mean decrease for
    comparison against 0.5 * drift_bound_factor.
    """
    dec = 0.0
    exposure = 0.0
    for trace in traces:
        if trace.mid_inclusions > 0:
            continue
        for s0, s1 in zip(trace.samples, trace.samples[1:]):
            if s0.x_t > 0:
                dec += s0.x_t - s1.x_t
                exposure += s0.x_t
    return dec, exposure


@dataclass(frozen=True)
class AuditEvent:
    step: int
    edge: int
    weight: float
    temperature: float
    t_w: int


@dataclass(frozen=True)
class AuditReport:
    """Inclusion events vs each weight's freeze-out step.

    checked counts the inclusion events examined; at telemetry level
    summary only the loop-flagged candidates are visible, at level full
    every inclusion is.
    """

    checked: int
    violations: int
    flagged: tuple[AuditEvent, ...]


def heavy_edge_audit(record: RunRecord, params: ScheduleParams) -> AuditReport:
    """Flag inclusion events at or past their weight's freeze-out step."""
    cfg = record.config
    a = params.a
    t_w_cache: dict[float, int] = {}

    def t_w_for(w: float) -> int:
        got = t_w_cache.get(w)
        if got is None:
            got = freeze_step(cfg.t0, cfg.ell, w, a)
            t_w_cache[w] = got
        return got

    flagged = []
    if record.events is not None:
        ev = record.events
        checked = 0
        for k in range(len(ev)):
            if not ev.direction[k]:
                continue
            checked += 1
            w = float(ev.delta_f[k])
            t_w = t_w_for(w)
            if ev.step[k] >= t_w:
                flagged.append(
                    AuditEvent(
                        step=int(ev.step[k]),
                        edge=int(ev.edge[k]),
                        weight=w,
                        temperature=float(ev.temperature[k]),
                        t_w=t_w,
                    )
                )
    elif cfg.telemetry_level == "summary":
        checked = len(record.heavy_inclusions)
        for h in record.heavy_inclusions:
            t_w = t_w_for(h.weight)
            if h.step >= t_w:
                flagged.append(
                    AuditEvent(
                        step=h.step,
                        edge=h.edge,
                        weight=h.weight,
                        temperature=h.temperature,
                        t_w=t_w,
                    )
                )
    else:
        raise TelemetryMissing("audit needs telemetry level summary or full")
    return AuditReport(checked=checked, violations=len(flagged), flagged=tuple(flagged))
