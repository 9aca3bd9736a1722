"""Acceptance gate: ten checks, each printing one verdict line.

The statistical criteria run scaled-down batches with explicit binomial
slack; the exactness criteria pin tolerances. Lines go to the real
stdout so they survive pytest's capture in a teed log.
"""

import math
import random
import time

import pytest

from annealmst.cli import main as cli_main
from annealmst.engine import SaConfig, run, schedule_temperature
from annealmst.generators import GenSpec, check_separated, generate
from annealmst.graph import component_count_below, fitness
from annealmst.oracle import enumerate_spanning_trees, kruskal_mst, sorted_weights
from annealmst.params import derive_schedule, kappa_bound, lambert_w0, optimal_gamma
from annealmst.reports import run_trials
from annealmst.structure import count_essential, replay_states


@pytest.fixture
def verdict(capsys):
    """One PASS/FAIL line per criterion, written past pytest's capture."""

    def _verdict(n: int, ok: bool, detail: str) -> None:
        line = f"[criterion {n:2d}] {'PASS' if ok else 'FAIL'}  {detail}"
        with capsys.disabled():
            print(line, flush=True)
        assert ok, line

    return _verdict


def _suite_graphs():
    """The n <= 6 instance corpus shared by criteria 1 and 2."""
    rnd = random.Random(2024)
    graphs = []
    for k in range(100):
        n = 3 + k % 4
        full = n * (n - 1) // 2
        m = rnd.randint(n - 1, full)
        family = "separated" if k % 10 == 9 else "uniform"
        graphs.append(generate(GenSpec(
            family=family, n=n, m=m,
            eps=1.0 if family == "separated" else None,
            seed=5000 + k,
        )))
    return graphs


def test_criterion_01_oracle_equivalence(verdict):
    t0 = time.time()
    checked = 0
    ok = True
    for g in _suite_graphs():
        tree_w = kruskal_mst(g)[1]
        brute_w = min(float(fitness(g, t)) for t in enumerate_spanning_trees(g))
        if tree_w != brute_w:
            ok = False
            break
        checked += 1
    elapsed = time.time() - t0
    ok = ok and checked == 100 and elapsed < 10.0
    verdict(1, ok, f"kruskal == brute force on {checked}/100 graphs, "
                    f"exact weights, {elapsed:.1f}s < 10s")


def test_criterion_02_rankwise_dominance(verdict):
    violations = 0
    trees_checked = 0
    for g in _suite_graphs()[:40]:
        mst, _ = kruskal_mst(g)
        best = sorted_weights(g, mst).values
        for t in enumerate_spanning_trees(g):
            vals = sorted_weights(g, t).values
            trees_checked += 1
            if any(v < b for v, b in zip(vals, best)):
                violations += 1
    verdict(2, violations == 0,
             f"sorted weights of {trees_checked} spanning trees dominate "
             f"their MST pointwise, {violations} violations")


def test_criterion_03_schedule_exactness(verdict):
    worst = 0.0
    ok = True
    for ell in (10.0, 1e3, 1e6):
        t0 = 50.0
        beta = 1.0 - 1.0 / ell
        iterated = t0
        for t in range(1, 1_000_001):
            iterated *= beta
            closed = schedule_temperature(t0, ell, t)
            if closed < 1e-290:
                # deep underflow: both forms must be negligible together
                ok = ok and iterated < 1e-290
                break
            rel = abs(closed - iterated) / closed
            worst = max(worst, rel)
            ok = ok and rel <= 1e-9
        if not ok:
            break
    verdict(3, ok, f"closed form vs iterated product over 1e6 steps, "
                    f"ell in {{10, 1e3, 1e6}}, worst rel err {worst:.2e} <= 1e-9")


def test_criterion_04_lambert_w(verdict):
    worst_resid = 0.0
    ok = True
    for i in range(181):
        x = 10.0 ** (-6 + 18 * i / 180)
        w = lambert_w0(x)
        resid = abs(w * math.exp(w) - x) / max(1.0, x)
        worst_resid = max(worst_resid, resid)
        ok = ok and resid <= 1e-10
    bracket_ok = True
    for i in range(121):
        b = math.e * 10.0 ** (11 * i / 120)
        w = lambert_w0(b)
        lb = math.log(b)
        llb = math.log(lb)
        lower = lb - llb + llb / (2.0 * lb)
        upper = lb - llb + (math.e / (math.e - 1.0)) * llb / lb
        bracket_ok = bracket_ok and (lower - 1e-12 <= w <= upper + 1e-12)
    verdict(4, ok and bracket_ok,
             f"back-substitution residual {worst_resid:.2e} <= 1e-10, "
             f"two-sided log bracket holds on 121 points b >= e")


def test_criterion_05_gamma_star_minimality(verdict):
    rnd = random.Random(5)
    ok = True
    for _ in range(50):
        b = 10.0 ** rnd.uniform(-2.0, 6.0)
        ell = 10.0 ** rnd.uniform(2.0, 9.0)
        tb = (ell - 1.0) / b
        g_star = optimal_gamma(ell, tb)
        at_star = kappa_bound(2.0, g_star, ell, tb)
        up = kappa_bound(2.0, g_star * (1.0 + 1e-3), ell, tb)
        down = kappa_bound(2.0, g_star * (1.0 - 1e-3), ell, tb)
        ok = ok and at_star <= up and at_star <= down
        if not ok:
            break
    verdict(5, ok, "kappa bound at gamma* <= value at gamma*(1 +/- 1e-3), "
                    "50 random (ell, T_base) pairs, b in [1e-2, 1e6]")


def test_criterion_06_uniform_end_to_end(verdict):
    g = generate(GenSpec(family="uniform", n=8, m=16, seed=7))
    params = derive_schedule(m=16, n=8, delta=0.1, eps=1.0,
                             w_min=g.w_min, w_max=g.w_max)
    report = run_trials(g, params, trials=200, base_seed=0,
                        telemetry_level="none", timing=False)
    need = 0.9 - 3.0 * math.sqrt(0.09 / 200.0)
    ok = report.success_rate >= need
    verdict(6, ok, f"ratio <= 2 in {report.success_rate:.3f} of 200 trials "
                    f">= {need:.3f} (n=8 m=16, {params.max_steps} steps)")


def test_criterion_07_separated_exact_optimality(verdict):
    g = generate(GenSpec(family="separated", n=8, m=16, eps=1.0, seed=11,
                         weight_range=(1.0, 200.0)))
    assert check_separated(g, 1.0)
    params = derive_schedule(m=16, n=8, delta=0.1, eps=1.0,
                             w_min=g.w_min, w_max=g.w_max)
    report = run_trials(g, params, trials=200, base_seed=0,
                        success_mode="optimal", telemetry_level="none",
                        timing=False)
    need = 0.9 - 3.0 * math.sqrt(0.09 / 200.0)
    ok = report.success_rate >= need
    verdict(7, ok, f"exact MST (vs kruskal) in {report.success_rate:.3f} "
                    f"of 200 trials >= {need:.3f} (powers-of-2 weights)")


def test_criterion_08_freeze_out_audit(verdict):
    g = generate(GenSpec(family="uniform", n=6, m=10, seed=7))
    params = derive_schedule(m=10, n=6, delta=0.1, eps=1.0,
                             w_min=g.w_min, w_max=g.w_max)
    report = run_trials(g, params, trials=1000, base_seed=0, timing=False)
    frac = sum(1 for r in report.rows if r.heavy_violations > 0) / 1000.0
    allowed = 0.1 / 2.0 + 3.0 * math.sqrt(0.1 / 2000.0)
    ok = frac <= allowed
    verdict(8, ok, f"post-freeze-out heavy inclusions in {frac:.4f} of 1000 "
                    f"trials <= {allowed:.4f}")


def test_criterion_09_essential_bound_on_sampled_states(verdict):
    g = generate(GenSpec(family="uniform", n=8, m=16, seed=7))
    params = derive_schedule(m=16, n=8, delta=0.1, eps=1.0,
                             w_min=g.w_min, w_max=g.w_max)
    weights = sorted(e.w for e in g.edges)
    probes = [weights[int(q * (len(weights) - 1))]
              for q in (0.1, 0.3, 0.5, 0.7, 0.9)]
    kappa = params.kappa
    checked = 0
    violations = 0
    for k in range(6):
        cfg = SaConfig(t0=params.t0, ell=params.ell, max_steps=params.max_steps,
                       seed=1000 + k, telemetry_level="full",
                       freeze_factor=params.a)
        record = run(g, cfg)
        steps = [round(i * params.max_steps / 24) for i in range(25)]
        for _, state in replay_states(g, record, steps):
            for w in probes:
                bound = component_count_below(g, w / (1.0 + kappa)) - 1
                if count_essential(g, state, w, kappa) > bound:
                    violations += 1
                checked += 1
    verdict(9, violations == 0,
             f"count_essential <= cheap components - 1 on {checked} sampled "
             f"states x probes, {violations} violations")


def test_criterion_10_pipeline_determinism(tmp_path, verdict):
    outputs = []
    for round_dir in ("one", "two"):
        d = tmp_path / round_dir
        d.mkdir()
        inst = d / "inst.mst"
        assert cli_main(["gen", "--family", "uniform", "--n", "6", "--m", "10",
                         "--seed", "3", "--output", str(inst)]) == 0
        run_csv = d / "run.csv"
        tel = d / "tel.txt"
        assert cli_main(["run", str(inst), "--eps", "1.0", "--delta", "0.1",
                         "--trials", "2", "--ell", "2000", "--no-timing",
                         "--output", str(run_csv), "--telemetry", str(tel)]) == 0
        assert cli_main(["verify", str(inst), str(tel),
                         "--output", str(d / "v")]) == 0
        outputs.append(tuple(
            p.read_bytes()
            for p in (inst, run_csv, tel, d / "v.audit.csv", d / "v.drift.csv")
        ))
    ok = outputs[0] == outputs[1]
    verdict(10, ok, "gen -> run -> verify repeated with one seed: "
                     "instance, run CSV, telemetry, audit, drift byte-identical")
