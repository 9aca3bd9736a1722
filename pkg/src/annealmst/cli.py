"""Command-line harness.

Subcommands: params, gen, oracle, run, sweep, separated, verify. Exit
codes follow the 0/1/2 contract: 0 when the command's statistical gate
passes (or there is none), 1 when a gate fails, 2 for usage and input
errors. All randomness flows from --seed through the documented
per-trial split rule, so equal invocations give equal bytes (modulo the
wall_ms column unless --no-timing).
"""

from __future__ import annotations

import argparse
import json
import sys
from typing import Sequence

from .engine import EventLog, RunRecord, SaConfig
from .errors import AnnealError, NotSeparated
from .generators import FAMILIES, GenSpec, check_separated, generate
from .graph import Graph, fitness
from .instance_io import (
    InstanceFormatError,
    instance_hash,
    read_instance,
    serialize_instance,
)
from .oracle import kruskal_mst, sorted_weights
from .params import ScheduleParams, derive_schedule
from .reports import TrialReport, report_to_csv, report_to_json, run_trials
from .structure import drift_trace, heavy_edge_audit

STEP_BUDGET_GUARDRAIL = 10_000_000_000


def _common_flags() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--seed", type=int, default=0, help="base seed (default 0)")
    p.add_argument("--json", action="store_true", help="emit JSON instead of text/CSV")
    p.add_argument("--output", metavar="PATH", help="write output here instead of stdout")
    p.add_argument("--threads", type=int, default=1, help="concurrent trials (default 1)")
    p.add_argument(
        "--force", action="store_true",
        help="run even past the elementary-step budget guardrail",
    )
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _common_flags()
    top = argparse.ArgumentParser(
        prog="annealmst",
        description="Simulated annealing on minimum spanning trees: "
        "schedules, batch trials, oracles, and audits.",
    )
    sub = top.add_subparsers(dest="command", required=True)

    p = sub.add_parser("params", parents=[common], help="print derived schedule quantities")
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--delta", type=float, required=True)
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--w-min", type=float, default=1.0)
    p.add_argument("--w-max", type=float, default=100.0)
    p.add_argument("--t0", type=float, default=None, help="default: w_max")
    p.add_argument("--ell", type=float, default=None, help="override the derived ell")
    p.add_argument("--a", type=float, default=None, help="override the freeze-out factor")
    p.set_defaults(func=cmd_params)

    p = sub.add_parser("gen", parents=[common], help="generate an instance file")
    p.add_argument("--family", choices=FAMILIES, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--m", type=int, default=None)
    p.add_argument("--eps", type=float, default=None, help="separation factor (separated family)")
    p.add_argument("--weight-range", type=float, nargs=2, default=(1.0, 100.0),
                   metavar=("LO", "HI"))
    p.add_argument("--levels", type=float, nargs="+", default=None,
                   help="explicit weight levels for the separated family")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("oracle", parents=[common], help="exact MST of an instance")
    p.add_argument("instance")
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("run", parents=[common], help="batch of annealing trials")
    _add_run_flags(p)
    p.add_argument("--telemetry", metavar="PATH",
                   help="also write the full accepted-move stream here")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("sweep", parents=[common],
                       help="batches across a list of ell or eps values")
    _add_run_flags(p, eps_required=False)
    p.add_argument("--ell-list", type=_float_list, default=None,
                   help="comma-separated ell values")
    p.add_argument("--eps-list", type=_float_list, default=None,
                   help="comma-separated eps values")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("separated", parents=[common],
                       help="batch judged on exact optimality (separated instances)")
    _add_run_flags(p)
    p.set_defaults(func=cmd_separated)

    p = sub.add_parser("verify", parents=[common],
                       help="replay a telemetry file: freeze-out audit and drift trace")
    p.add_argument("instance")
    p.add_argument("telemetry")
    p.add_argument("--w", type=float, default=None,
                   help="probe weight threshold (default: median distinct weight)")
    p.add_argument("--max-epochs", type=int, default=200,
                   help="drift-trace epochs per trial (default 200)")
    p.set_defaults(func=cmd_verify)
    return top


def _add_run_flags(p: argparse.ArgumentParser, eps_required: bool = True) -> None:
    p.add_argument("instance")
    p.add_argument("--eps", type=float, required=eps_required)
    p.add_argument("--delta", type=float, required=True)
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--ell", type=float, default=None, help="override the derived ell")
    p.add_argument("--a", type=float, default=None, help="override the freeze-out factor")
    p.add_argument("--t0", type=float, default=None, help="override t0 (default: w_max)")
    p.add_argument("--target-ratio", type=float, default=None,
                   help="success threshold (default 1+eps)")
    p.add_argument("--no-timing", action="store_true",
                   help="write wall_ms as 0 for byte-stable output")


def _float_list(text: str) -> list[float]:
    return [float(x) for x in text.split(",") if x]


def _emit(text: str, output: str | None) -> None:
    if output:
        with open(output, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _derive_for_instance(g: Graph, args) -> ScheduleParams:
    return derive_schedule(
        m=g.m,
        n=g.n,
        delta=args.delta,
        eps=args.eps,
        w_min=g.w_min,
        w_max=g.w_max,
        t0=args.t0,
        ell=args.ell,
        a=args.a,
    )


def _check_budget(params: ScheduleParams, trials: int, force: bool) -> None:
    budget = trials * params.max_steps
    if budget > STEP_BUDGET_GUARDRAIL and not force:
        raise AnnealError(
            f"{trials} trials x {params.max_steps} steps = {budget:.3g} elementary "
            f"steps exceeds the {STEP_BUDGET_GUARDRAIL:.0e} guardrail; "
            "pass --force to run anyway"
        )


def cmd_params(args) -> int:
    params = derive_schedule(
        m=args.m, n=args.n, delta=args.delta, eps=args.eps,
        w_min=args.w_min, w_max=args.w_max, t0=args.t0, ell=args.ell, a=args.a,
    )
    d = params.to_dict()
    if args.json:
        _emit(json.dumps(d, indent=2) + "\n", args.output)
    else:
        width = max(len(k) for k in d)
        lines = [f"{k.ljust(width)}  {v!r}" for k, v in d.items()]
        _emit("\n".join(lines) + "\n", args.output)
    return 0


def cmd_gen(args) -> int:
    spec = GenSpec(
        family=args.family,
        n=args.n,
        m=args.m,
        eps=args.eps,
        weight_range=tuple(args.weight_range),
        weight_levels=tuple(args.levels) if args.levels else None,
        seed=args.seed,
    )
    g = generate(spec)
    comments = [
        f"family={spec.family} n={spec.n} m={g.m} seed={spec.seed}",
        f"eps={spec.eps} weight_range={spec.weight_range[0]!r},{spec.weight_range[1]!r}"
        + (f" levels={','.join(repr(w) for w in spec.weight_levels)}"
           if spec.weight_levels else ""),
        f"hash={instance_hash(g)}",
    ]
    _emit(serialize_instance(g, comments), args.output)
    return 0


def cmd_oracle(args) -> int:
    g = read_instance(args.instance)
    tree, weight = kruskal_mst(g)
    ranks = sorted_weights(g, tree).values
    edges = [i for i, b in enumerate(tree.bits) if b]
    if args.json:
        _emit(json.dumps({
            "instance": instance_hash(g),
            "n": g.n,
            "m": g.m,
            "mst_weight": weight,
            "sorted_weights": list(ranks),
            "tree_edges": edges,
        }, indent=2) + "\n", args.output)
    else:
        lines = [
            f"instance={instance_hash(g)} n={g.n} m={g.m}",
            f"mst_weight={weight!r}",
            "sorted_weights=" + ",".join(repr(w) for w in ranks),
            "tree_edges=" + ",".join(str(i) for i in edges),
        ]
        _emit("\n".join(lines) + "\n", args.output)
    return 0


def _run_batch(args, success_mode: str) -> tuple[TrialReport, Graph, list[RunRecord] | None]:
    g = read_instance(args.instance)
    params = _derive_for_instance(g, args)
    _check_budget(params, args.trials, args.force)
    keep = getattr(args, "telemetry", None) is not None
    result = run_trials(
        g,
        params,
        trials=args.trials,
        base_seed=args.seed,
        success_mode=success_mode,
        target_ratio=args.target_ratio,
        telemetry_level="full" if keep else "summary",
        threads=args.threads,
        timing=not args.no_timing,
        keep_records=keep,
    )
    if keep:
        report, records = result
    else:
        report, records = result, None
    return report, g, records


def cmd_run(args) -> int:
    report, g, records = _run_batch(args, "ratio")
    if args.json:
        _emit(json.dumps(report_to_json(report), indent=2) + "\n", args.output)
    else:
        _emit(report_to_csv(report), args.output)
    if records is not None:
        _write_telemetry(args.telemetry, g, report, records)
    return 0 if report.passed else 1


def cmd_separated(args) -> int:
    g = read_instance(args.instance)
    if not check_separated(g, args.eps):
        raise NotSeparated(
            f"instance weights are not (1+eps)-separated for eps={args.eps!r}"
        )
    report, _, _ = _run_batch(args, "optimal")
    if args.json:
        _emit(json.dumps(report_to_json(report), indent=2) + "\n", args.output)
    else:
        _emit(report_to_csv(report), args.output)
    return 0 if report.passed else 1


SWEEP_HEADER = ("param,value,one_plus_kappa,trial,seed,steps,final_weight,"
                "opt_weight,ratio,success,heavy_violations,wall_ms")


def cmd_sweep(args) -> int:
    if (args.ell_list is None) == (args.eps_list is None):
        raise AnnealError("pass exactly one of --ell-list or --eps-list")
    values = args.ell_list if args.ell_list is not None else args.eps_list
    if len(values) < 2:
        raise AnnealError("a sweep needs at least two points")
    param_name = "ell" if args.ell_list is not None else "eps"
    if param_name == "ell" and args.eps is None:
        raise AnnealError("--ell-list sweeps still need --eps for the ratio target")
    g = read_instance(args.instance)

    reports = []
    for value in values:
        if param_name == "ell":
            params = derive_schedule(
                m=g.m, n=g.n, delta=args.delta, eps=args.eps,
                w_min=g.w_min, w_max=g.w_max, t0=args.t0, ell=value, a=args.a,
            )
        else:
            params = derive_schedule(
                m=g.m, n=g.n, delta=args.delta, eps=value,
                w_min=g.w_min, w_max=g.w_max, t0=args.t0, ell=args.ell, a=args.a,
            )
        _check_budget(params, args.trials, args.force)
        report = run_trials(
            g, params,
            trials=args.trials,
            base_seed=args.seed,
            success_mode="ratio",
            target_ratio=args.target_ratio,
            threads=args.threads,
            timing=not args.no_timing,
        )
        reports.append((value, report))

    lines = [SWEEP_HEADER]
    for value, report in reports:
        for r in report.rows:
            lines.append(
                f"{param_name},{value!r},{report.params.one_plus_kappa!r},"
                f"{r.trial},{r.seed},{r.steps},{r.final_weight!r},{r.opt_weight!r},"
                f"{r.ratio!r},{int(r.success)},{r.heavy_violations},{r.wall_ms}"
            )
    for value, report in reports:
        verdict = "PASS" if report.passed else "FAIL"
        lines.append(
            f"# {param_name}={value!r} success_rate={report.success_rate:.6f} "
            f"max_ratio={report.max_ratio:.9g} "
            f"one_plus_kappa={report.params.one_plus_kappa!r} -> {verdict}"
        )
    _emit("\n".join(lines) + "\n", args.output)
    return 0 if all(report.passed for _, report in reports) else 1


TELEMETRY_HEADER = "trial,step,edge,direction,delta_f,temperature"


def _write_telemetry(path: str, g: Graph, report: TrialReport,
                     records: list[RunRecord]) -> None:
    params = report.params
    lines = [
        "# schema=telemetry-v1",
        f"# instance={report.instance_hash} n={g.n} m={g.m}",
        f"# m={params.m} n={params.n} delta={params.delta!r} eps={params.eps!r}",
        f"# t0={params.t0!r} ell={params.ell!r} a={params.a!r} "
        f"max_steps={params.max_steps}",
        f"# base_seed={report.base_seed} trials={report.trials}",
        "# seeds=" + ",".join(str(r.seed) for r in report.rows),
        TELEMETRY_HEADER,
    ]
    for k, record in enumerate(records):
        ev = record.events
        for j in range(len(ev)):
            direction = "in" if ev.direction[j] else "out"
            lines.append(
                f"{k},{ev.step[j]},{ev.edge[j]},{direction},"
                f"{float(ev.delta_f[j])!r},{float(ev.temperature[j])!r}"
            )
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def _read_telemetry(path: str) -> tuple[dict, dict[int, EventLog], list[int]]:
    meta: dict = {}
    rows: dict[int, dict[str, list]] = {}
    with open(path, "r", encoding="utf-8") as fh:
        for raw in fh:
            line = raw.strip()
            if not line:
                continue
            if line.startswith("#"):
                for token in line[1:].split():
                    if "=" in token:
                        key, val = token.split("=", 1)
                        meta[key] = val
                continue
            if line == TELEMETRY_HEADER:
                continue
            trial_s, step_s, edge_s, direction, delta_s, temp_s = line.split(",")
            k = int(trial_s)
            cols = rows.setdefault(
                k, {"step": [], "edge": [], "dir": [], "delta": [], "temp": []}
            )
            cols["step"].append(int(step_s))
            cols["edge"].append(int(edge_s))
            cols["dir"].append(1 if direction == "in" else 0)
            cols["delta"].append(float(delta_s))
            cols["temp"].append(float(temp_s))
    seeds = [int(s) for s in meta.get("seeds", "").split(",") if s]
    logs = {
        k: EventLog(c["step"], c["edge"], c["dir"], c["delta"], c["temp"])
        for k, c in rows.items()
    }
    return meta, logs, seeds


def cmd_verify(args) -> int:
    g = read_instance(args.instance)
    meta, logs, seeds = _read_telemetry(args.telemetry)
    if instance_hash(g) != meta.get("instance"):
        raise AnnealError(
            "telemetry was recorded against a different instance "
            f"({meta.get('instance')} != {instance_hash(g)})"
        )
    params = derive_schedule(
        m=int(meta["m"]), n=int(meta["n"]),
        delta=float(meta["delta"]), eps=float(meta["eps"]),
        w_min=g.w_min, w_max=g.w_max,
        t0=float(meta["t0"]), ell=float(meta["ell"]), a=float(meta["a"]),
    )
    max_steps = int(meta["max_steps"])
    trials = int(meta["trials"])
    probe = args.w
    if probe is None:
        distinct = sorted(set(e.w for e in g.edges))
        probe = distinct[len(distinct) // 2]

    audit_lines = ["trial,checked,violations"]
    drift_lines = ["trial,epoch,step,x_t,temperature"]
    flagged_notes = []
    for k in range(trials):
        ev = logs.get(k)
        if ev is None:
            ev = EventLog([], [], [], [], [])
        cfg = SaConfig(
            t0=params.t0, ell=params.ell, max_steps=max_steps,
            seed=seeds[k] if k < len(seeds) else 0,
            telemetry_level="full", freeze_factor=params.a,
        )
        record = RunRecord(
            config=cfg,
            final_state=None,  # not needed for replay analyses
            final_fitness=0.0,
            steps_executed=max_steps,
            acceptance_counts=None,
            heavy_inclusions=(),
            events=ev,
            wall_time=0.0,
        )
        audit = heavy_edge_audit(record, params)
        audit_lines.append(f"{k},{audit.checked},{audit.violations}")
        for e in audit.flagged:
            flagged_notes.append(
                f"# violation trial={k} step={e.step} edge={e.edge} "
                f"weight={e.weight!r} t_w={e.t_w}"
            )
        trace = drift_trace(
            g, record, w=probe, kappa=params.kappa, max_epochs=args.max_epochs
        )
        for s in trace.samples:
            drift_lines.append(
                f"{k},{s.epoch},{s.step},{s.x_t},{s.temperature!r}"
            )
    audit_lines += flagged_notes
    audit_lines.append(
        f"# probe_w={probe!r} kappa={params.kappa!r} trials={trials}"
    )
    audit_text = "\n".join(audit_lines) + "\n"
    drift_text = "\n".join(drift_lines) + "\n"
    if args.output:
        with open(args.output + ".audit.csv", "w", encoding="utf-8", newline="\n") as fh:
            fh.write(audit_text)
        with open(args.output + ".drift.csv", "w", encoding="utf-8", newline="\n") as fh:
            fh.write(drift_text)
    else:
        sys.stdout.write(audit_text + "\n" + drift_text)
    return 0


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (AnnealError, InstanceFormatError, OverflowError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
