"""Batch experiments: R independent trajectories with derived per-trial
seeds, aggregate statistics with a binomial confidence interval, and
CSV/JSON serialization with a stable schema.

Trials may run on a thread pool (the jit kernel releases the GIL);
report assembly orders rows by trial index, so thread count never
changes output bytes.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Iterable

from .engine import RunRecord, SaConfig, run
from .errors import DomainError
from .graph import Graph, fitness
from .instance_io import instance_hash
from .oracle import kruskal_mst
from .params import ScheduleParams
from .rng import mix_seed
from .structure import heavy_edge_audit

CSV_HEADER = "trial,seed,steps,final_weight,opt_weight,ratio,success,heavy_violations,wall_ms"


def wilson_interval(successes: int, n: int, z: float = 1.96) -> tuple[float, float]:
    """Wilson score interval for a binomial proportion."""
    if n <= 0:
        raise DomainError("need at least one trial")
    p = successes / n
    denom = 1.0 + z * z / n
    center = (p + z * z / (2.0 * n)) / denom
    half = z * math.sqrt(p * (1.0 - p) / n + z * z / (4.0 * n * n)) / denom
    return max(0.0, center - half), min(1.0, center + half)


@dataclass(frozen=True)
class TrialRow:
    trial: int
    seed: int
    steps: int
    final_weight: float
    opt_weight: float
    ratio: float
    success: bool
    heavy_violations: int
    wall_ms: int


@dataclass(frozen=True)
class TrialReport:
    """Everything one batch produced, plus the gate it is judged against.

    The statistical gate uses a 3-sigma binomial slack below 1-delta
    because R is finite; the footer of the CSV spells the numbers out.
    """

    instance_hash: str
    params: ScheduleParams
    trials: int
    base_seed: int
    target_ratio: float
    success_mode: str
    rows: tuple[TrialRow, ...]

    @property
    def successes(self) -> int:
        return sum(1 for r in self.rows if r.success)

    @property
    def success_rate(self) -> float:
        return self.successes / self.trials

    @property
    def mean_ratio(self) -> float:
        return sum(r.ratio for r in self.rows) / self.trials

    @property
    def max_ratio(self) -> float:
        return max(r.ratio for r in self.rows)

    @property
    def wilson95(self) -> tuple[float, float]:
        return wilson_interval(self.successes, self.trials)

    @property
    def slack(self) -> float:
        d = self.params.delta
        return 3.0 * math.sqrt(d * (1.0 - d) / self.trials)

    @property
    def threshold(self) -> float:
        return 1.0 - self.params.delta - self.slack

    @property
    def passed(self) -> bool:
        return self.success_rate >= self.threshold


def run_trials(
    g: Graph,
    params: ScheduleParams,
    trials: int,
    base_seed: int,
    success_mode: str = "ratio",
    target_ratio: float | None = None,
    telemetry_level: str = "summary",
    threads: int = 1,
    timing: bool = True,
    use_fast: bool | None = None,
    keep_records: bool = False,
):
    """Run R trajectories; trial k uses seed mix_seed(base_seed + k).

    success_mode "ratio" flags trials with final/opt <= target_ratio
    (default 1+eps); "optimal" flags exact optima (ratio within 1e-9).
    heavy_violations comes from the freeze-out audit, so it needs
    telemetry level summary or full; at "none" the column is 0.
    Returns the report, or (report, records) with keep_records.
    """
    if trials < 1:
        raise DomainError(f"need at least one trial, got {trials}")
    if success_mode not in ("ratio", "optimal"):
        raise DomainError(f"unknown success mode {success_mode!r}")
    if target_ratio is None:
        target_ratio = 1.0 if success_mode == "optimal" else 1.0 + params.eps
    _, opt_weight = kruskal_mst(g)

    def one_trial(k: int) -> tuple[RunRecord, TrialRow]:
        cfg = SaConfig(
            t0=params.t0,
            ell=params.ell,
            max_steps=params.max_steps,
            seed=mix_seed(base_seed + k),
            telemetry_level=telemetry_level,
            freeze_factor=params.a,
        )
        record = run(g, cfg, use_fast=use_fast)
        final_weight = float(record.final_fitness)
        ratio = final_weight / opt_weight
        if success_mode == "optimal":
            success = ratio <= 1.0 + 1e-9
        else:
            success = ratio <= target_ratio + 1e-12
        if telemetry_level == "none":
            violations = 0
        else:
            violations = heavy_edge_audit(record, params).violations
        row = TrialRow(
            trial=k,
            seed=cfg.seed,
            steps=record.steps_executed,
            final_weight=final_weight,
            opt_weight=opt_weight,
            ratio=ratio,
            success=success,
            heavy_violations=violations,
            wall_ms=int(round(record.wall_time * 1000.0)) if timing else 0,
        )
        return record, row

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(one_trial, range(trials)))
    else:
        results = [one_trial(k) for k in range(trials)]

    report = TrialReport(
        instance_hash=instance_hash(g),
        params=params,
        trials=trials,
        base_seed=base_seed,
        target_ratio=target_ratio,
        success_mode=success_mode,
        rows=tuple(row for _, row in results),
    )
    if keep_records:
        return report, [rec for rec, _ in results]
    return report


def report_to_csv(report: TrialReport) -> str:
    """Stable schema: fixed header, one row per trial, `#` footer lines."""
    lines = [CSV_HEADER]
    for r in report.rows:
        lines.append(
            f"{r.trial},{r.seed},{r.steps},{r.final_weight!r},{r.opt_weight!r},"
            f"{r.ratio!r},{int(r.success)},{r.heavy_violations},{r.wall_ms}"
        )
    lo, hi = report.wilson95
    lines.append(
        f"# instance={report.instance_hash} trials={report.trials} "
        f"base_seed={report.base_seed} mode={report.success_mode} "
        f"target_ratio={report.target_ratio:.9g}"
    )
    lines.append(
        f"# success_rate={report.success_rate:.6f} wilson95=[{lo:.6f},{hi:.6f}] "
        f"mean_ratio={report.mean_ratio:.9g} max_ratio={report.max_ratio:.9g}"
    )
    verdict = "PASS" if report.passed else "FAIL"
    lines.append(
        f"# gate: success_rate >= 1-delta-slack = {report.threshold:.6f} "
        f"(slack=3*sqrt(delta*(1-delta)/R)={report.slack:.6f}) -> {verdict}"
    )
    if report.params.out_of_regime:
        lines.append("# warning: schedule out of regime (freeze-out factor bounds)")
    return "\n".join(lines) + "\n"


def report_to_json(report: TrialReport) -> dict:
    lo, hi = report.wilson95
    return {
        "instance": report.instance_hash,
        "params": report.params.to_dict(),
        "trials": report.trials,
        "base_seed": report.base_seed,
        "success_mode": report.success_mode,
        "target_ratio": report.target_ratio,
        "rows": [
            {
                "trial": r.trial,
                "seed": r.seed,
                "steps": r.steps,
                "final_weight": r.final_weight,
                "opt_weight": r.opt_weight,
                "ratio": r.ratio,
                "success": r.success,
                "heavy_violations": r.heavy_violations,
                "wall_ms": r.wall_ms,
            }
            for r in report.rows
        ],
        "success_rate": report.success_rate,
        "wilson95": [lo, hi],
        "mean_ratio": report.mean_ratio,
        "max_ratio": report.max_ratio,
        "threshold": report.threshold,
        "slack": report.slack,
        "passed": report.passed,
    }
