"""The annealing loop: one uniform bit flip proposed per step, Metropolis
acceptance against a multiplicatively cooled temperature, state kept
connected by construction.

Two interchangeable executors exist: a jit kernel
(:mod:`annealmst._fastloop`) and a pure-Python reference loop in this
module. They consume the identical random stream and are pinned to
bit-identical trajectories by tests; the reference path is the one that
supports observers and debug assertions.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Callable, Iterable, Iterator, Sequence, Union

import numpy as np

from .errors import DisconnectedState, DomainError, IndexOutOfRange
from .graph import (
    INFEASIBLE,
    DisjointSet,
    EdgeSubset,
    Fitness,
    Graph,
    Infeasible,
    fitness,
    subset_from_bits,
)
from .rng import Xoshiro256PP, seed_material

try:
    from . import _fastloop

    HAVE_FAST_PATH = True
except ImportError:  # pragma: no cover - exercised only without numba
    _fastloop = None
    HAVE_FAST_PATH = False

TELEMETRY_LEVELS = ("none", "summary", "full")


def schedule_temperature(t0: float, ell: float, t: int) -> float:
    """Closed-form temperature t0 * (1 - 1/ell)^t.

    Evaluated as a single power, never by repeated multiplication, so
    step 10^8 is as accurate as step 1.
    """
    if t < 0:
        raise DomainError(f"step index must be >= 0, got {t}")
    if ell <= 1.0:
        raise DomainError(f"ell must exceed 1, got {ell!r}")
    return t0 * (1.0 - 1.0 / ell) ** float(t)


def acceptance_probability(delta_f: Union[float, Infeasible], temp: float) -> float:
    """Metropolis rule: 1 for non-worsening moves, e^(-delta/T) otherwise.

    Infeasible proposals have probability exactly 0; no large-number
    stand-in is involved anywhere. temp == 0 means the schedule has
    underflowed to fully frozen: worsening moves are impossible there,
    improving ones still certain.
    """
    if temp < 0.0:
        raise DomainError(f"temperature must be >= 0, got {temp!r}")
    if isinstance(delta_f, Infeasible) or delta_f == float("inf"):
        return 0.0
    if delta_f <= 0.0:
        return 1.0
    if temp == 0.0:
        return 0.0
    return math.exp(-delta_f / temp)


def freeze_step(t0: float, ell: float, w: float, a: float) -> int:
    """First integer step at which weight w counts as heavy: w >= a*T(t).

    Binary search over the monotone closed-form schedule, using the same
    predicate the loop's heavy detector uses, so the two can never
    disagree on boundary rounding.
    """
    if w <= 0.0 or a <= 0.0:
        raise DomainError("need positive w and a")

    def heavy_at(t: int) -> bool:
        return w >= a * schedule_temperature(t0, ell, t)

    if heavy_at(0):
        return 0
    lo, hi = 0, 1
    while not heavy_at(hi):
        lo, hi = hi, hi * 2
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if heavy_at(mid):
            hi = mid
        else:
            lo = mid
    return hi


@dataclass(frozen=True)
class SaConfig:
    """One trajectory's full configuration.

    freeze_factor is the audit threshold a for heavy-inclusion telemetry
    (None disables it); init_bits overrides the all-ones initial state
    for experiments. Both default to the standard behavior.
    """

    t0: float
    ell: float
    max_steps: int
    seed: int
    telemetry_level: str = "summary"
    freeze_factor: float | None = None
    init_bits: tuple[int, ...] | None = None

    def __post_init__(self):
        if not self.t0 > 0.0:
            raise DomainError(f"t0 must be positive, got {self.t0!r}")
        if not self.ell > 2.0:
            raise DomainError(f"ell must exceed 2, got {self.ell!r}")
        if self.max_steps < 0:
            raise DomainError(f"max_steps must be >= 0, got {self.max_steps}")
        if self.telemetry_level not in TELEMETRY_LEVELS:
            raise DomainError(f"unknown telemetry level {self.telemetry_level!r}")
        if self.freeze_factor is not None and not self.freeze_factor > 0.0:
            raise DomainError("freeze_factor must be positive when set")


def temperature(cfg: SaConfig, t: int) -> float:
    """Temperature at step t under cfg's schedule."""
    return schedule_temperature(cfg.t0, cfg.ell, t)


@dataclass(frozen=True)
class AcceptanceCounts:
    improving: int
    equal: int
    worsening_accepted: int
    worsening_rejected: int
    infeasible_rejected: int

    def total(self) -> int:
        return (
            self.improving
            + self.equal
            + self.worsening_accepted
            + self.worsening_rejected
            + self.infeasible_rejected
        )


@dataclass(frozen=True)
class TelemetryEvent:
    """One accepted move. direction is "in" for inclusion, "out" for removal."""

    step: int
    edge: int
    direction: str
    delta_f: float
    temperature: float


@dataclass(frozen=True)
class HeavyInclusion:
    """An accepted inclusion with weight >= freeze_factor * temperature."""

    step: int
    edge: int
    weight: float
    temperature: float


class EventLog:
    """Columnar store of the accepted-move stream (telemetry_level=full)."""

    __slots__ = ("step", "edge", "direction", "delta_f", "temperature")

    def __init__(self, step, edge, direction, delta_f, temperature):
        self.step = np.asarray(step, dtype=np.int64)
        self.edge = np.asarray(edge, dtype=np.int64)
        self.direction = np.asarray(direction, dtype=np.int8)
        self.delta_f = np.asarray(delta_f, dtype=np.float64)
        self.temperature = np.asarray(temperature, dtype=np.float64)

    def __len__(self) -> int:
        return int(self.step.shape[0])

    def event(self, i: int) -> TelemetryEvent:
        return TelemetryEvent(
            step=int(self.step[i]),
            edge=int(self.edge[i]),
            direction="in" if self.direction[i] else "out",
            delta_f=float(self.delta_f[i]),
            temperature=float(self.temperature[i]),
        )

    def __iter__(self) -> Iterator[TelemetryEvent]:
        return (self.event(i) for i in range(len(self)))

    def equal(self, other: "EventLog") -> bool:
        return (
            np.array_equal(self.step, other.step)
            and np.array_equal(self.edge, other.edge)
            and np.array_equal(self.direction, other.direction)
            and np.array_equal(self.delta_f, other.delta_f)
            and np.array_equal(self.temperature, other.temperature)
        )


@dataclass(frozen=True)
class RunRecord:
    config: SaConfig
    final_state: EdgeSubset
    final_fitness: Fitness
    steps_executed: int
    acceptance_counts: AcceptanceCounts
    heavy_inclusions: tuple[HeavyInclusion, ...]
    events: EventLog | None
    wall_time: float


Observer = Callable[[TelemetryEvent], object]


def _initial_bits(g: Graph, cfg: SaConfig) -> list[int]:
    if cfg.init_bits is None:
        return [1] * g.m
    if len(cfg.init_bits) != g.m:
        raise IndexOutOfRange(
            f"init_bits length {len(cfg.init_bits)} != m={g.m}"
        )
    bits = [1 if b else 0 for b in cfg.init_bits]
    if subset_from_bits(g, bits).component_count != 1:
        raise DisconnectedState("init_bits must select a connected subgraph")
    return bits


def _removal_keeps_connected(g: Graph, bits: Sequence[int], i: int) -> bool:
    dsu = DisjointSet(g.n)
    for j, e in enumerate(g.edges):
        if j != i and bits[j]:
            dsu.union(e.u, e.v)
            if dsu.count == 1:
                return True
    return dsu.count == 1


def _run_reference(
    g: Graph,
    cfg: SaConfig,
    observers: Sequence[Observer],
    debug: bool,
) -> tuple[list[int], int, list[int], list, dict]:
    m = g.m
    rng = Xoshiro256PP(cfg.seed)
    bits = _initial_bits(g, cfg)
    beta = 1.0 - 1.0 / cfg.ell
    counters = [0, 0, 0, 0, 0]
    heavy: list[HeavyInclusion] = []
    freeze_a = cfg.freeze_factor if cfg.telemetry_level != "none" else None
    if freeze_a is None:
        freeze_a = 0.0
    record_events = cfg.telemetry_level == "full"
    ev_lists: dict = {"step": [], "edge": [], "dir": [], "delta": [], "temp": []}
    want_events = record_events or bool(observers)
    steps_executed = cfg.max_steps
    for t in range(cfg.max_steps):
        i = rng.randrange(m)
        event = None
        accepted = False
        if bits[i]:
            if _removal_keeps_connected(g, bits, i):
                bits[i] = 0
                counters[0] += 1
                accepted = True
                if want_events:
                    event = TelemetryEvent(
                        t, i, "out", -g.edges[i].w, cfg.t0 * beta ** float(t)
                    )
            else:
                counters[4] += 1
        else:
            temp = cfg.t0 * beta ** float(t)
            w = g.edges[i].w
            u = rng.random()
            # temp underflows to exactly 0 on long schedules; the kernel's
            # w/0 gives inf and exp(-inf) = 0, so mirror that reject here
            p_accept = math.exp(-w / temp) if temp > 0.0 else 0.0
            if u < p_accept:
                bits[i] = 1
                counters[2] += 1
                accepted = True
                if freeze_a > 0.0 and w >= freeze_a * temp:
                    heavy.append(HeavyInclusion(t, i, w, temp))
                if want_events:
                    event = TelemetryEvent(t, i, "in", w, temp)
            else:
                counters[3] += 1
        if debug and accepted:
            # the state must stay connected after every accepted move
            assert subset_from_bits(g, bits).component_count == 1
        if event is not None:
            if record_events:
                ev_lists["step"].append(event.step)
                ev_lists["edge"].append(event.edge)
                ev_lists["dir"].append(1 if event.direction == "in" else 0)
                ev_lists["delta"].append(event.delta_f)
                ev_lists["temp"].append(event.temperature)
            stop = False
            for obs in observers:
                if obs(event):
                    stop = True
            if stop:
                steps_executed = t + 1
                break
    return bits, steps_executed, counters, heavy, ev_lists


def _run_fast(g: Graph, cfg: SaConfig) -> tuple[list[int], int, list[int], list, dict]:
    eu, ev, ew = g.edge_arrays
    bits = np.array(_initial_bits(g, cfg), dtype=np.uint8)
    s = np.array(seed_material(cfg.seed), dtype=np.uint64)
    counters = np.zeros(5, dtype=np.int64)
    parent = np.empty(g.n, dtype=np.int64)
    freeze_a = cfg.freeze_factor if cfg.telemetry_level != "none" else None
    if freeze_a is None:
        freeze_a = 0.0
    record_events = cfg.telemetry_level == "full"
    ev_cap = 4096 if record_events else 1
    hv_cap = 1024 if freeze_a > 0.0 else 1
    ev_step = np.zeros(ev_cap, dtype=np.int64)
    ev_edge = np.zeros(ev_cap, dtype=np.int64)
    ev_dir = np.zeros(ev_cap, dtype=np.int8)
    ev_delta = np.zeros(ev_cap, dtype=np.float64)
    ev_temp = np.zeros(ev_cap, dtype=np.float64)
    hv_step = np.zeros(hv_cap, dtype=np.int64)
    hv_edge = np.zeros(hv_cap, dtype=np.int64)
    hv_weight = np.zeros(hv_cap, dtype=np.float64)
    hv_temp = np.zeros(hv_cap, dtype=np.float64)
    fills = np.zeros(2, dtype=np.int64)
    start = 0
    while True:
        reached = _fastloop.run_kernel(
            eu, ev, ew, g.n, bits, s, cfg.t0, cfg.ell, start, cfg.max_steps,
            freeze_a, record_events, counters, parent,
            ev_step, ev_edge, ev_dir, ev_delta, ev_temp,
            hv_step, hv_edge, hv_weight, hv_temp, fills,
        )
        if reached >= cfg.max_steps:
            break
        start = reached
        if record_events and fills[0] >= ev_step.shape[0]:
            grow = lambda arr: np.concatenate([arr, np.zeros_like(arr)])
            ev_step, ev_edge, ev_dir, ev_delta, ev_temp = (
                grow(ev_step), grow(ev_edge), grow(ev_dir), grow(ev_delta), grow(ev_temp),
            )
        if freeze_a > 0.0 and fills[1] >= hv_step.shape[0]:
            grow = lambda arr: np.concatenate([arr, np.zeros_like(arr)])
            hv_step, hv_edge, hv_weight, hv_temp = (
                grow(hv_step), grow(hv_edge), grow(hv_weight), grow(hv_temp),
            )
    n_ev, n_hv = int(fills[0]), int(fills[1])
    heavy = [
        HeavyInclusion(int(hv_step[k]), int(hv_edge[k]), float(hv_weight[k]), float(hv_temp[k]))
        for k in range(n_hv)
    ]
    ev_lists = {
        "step": ev_step[:n_ev],
        "edge": ev_edge[:n_ev],
        "dir": ev_dir[:n_ev],
        "delta": ev_delta[:n_ev],
        "temp": ev_temp[:n_ev],
    }
    return [int(b) for b in bits], cfg.max_steps, [int(c) for c in counters], heavy, ev_lists


def run(
    g: Graph,
    cfg: SaConfig,
    observers: Iterable[Observer] = (),
    debug: bool = False,
    use_fast: bool | None = None,
) -> RunRecord:
    """Execute one trajectory and return its record.

    Runs exactly cfg.max_steps iterations unless an observer returns a
    truthy value, which stops the run after the current step. Observers
    receive every accepted move and force the reference path; by default
    the jit kernel is used when available. Identical (g, cfg) give a
    bit-identical record apart from wall_time.
    """
    observers = tuple(observers)
    if use_fast is None:
        use_fast = HAVE_FAST_PATH and not observers and not debug
    if use_fast and (observers or debug):
        raise DomainError("observers and debug need the reference path")
    if use_fast and not HAVE_FAST_PATH:
        raise DomainError("jit path requested but numba is unavailable")
    t_start = time.perf_counter()
    if use_fast:
        bits, steps, counters, heavy, ev_lists = _run_fast(g, cfg)
    else:
        bits, steps, counters, heavy, ev_lists = _run_reference(g, cfg, observers, debug)
    wall = time.perf_counter() - t_start
    events = None
    if cfg.telemetry_level == "full":
        events = EventLog(
            ev_lists["step"], ev_lists["edge"], ev_lists["dir"],
            ev_lists["delta"], ev_lists["temp"],
        )
    final_state = subset_from_bits(g, bits)
    return RunRecord(
        config=cfg,
        final_state=final_state,
        final_fitness=fitness(g, final_state),
        steps_executed=steps,
        acceptance_counts=AcceptanceCounts(*counters),
        heavy_inclusions=tuple(heavy),
        events=events,
        wall_time=wall,
    )
