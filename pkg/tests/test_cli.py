"""End-to-end CLI behavior: output schemas, determinism, exit codes."""

import json
import subprocess
import sys

import pytest

from annealmst.cli import SWEEP_HEADER, TELEMETRY_HEADER, main
from annealmst.instance_io import instance_hash, read_instance
from annealmst.oracle import kruskal_mst
from annealmst.params import derive_schedule
from annealmst.reports import CSV_HEADER


@pytest.fixture(scope="module")
def inst(tmp_path_factory):
    path = tmp_path_factory.mktemp("cli") / "inst.mst"
    rc = main(["gen", "--family", "uniform", "--n", "6", "--m", "10",
               "--seed", "7", "--output", str(path)])
    assert rc == 0
    return str(path)


@pytest.fixture(scope="module")
def sep_inst(tmp_path_factory):
    path = tmp_path_factory.mktemp("cli") / "sep.mst"
    rc = main(["gen", "--family", "separated", "--n", "6", "--m", "10",
               "--seed", "2", "--eps", "1.0", "--weight-range", "1", "200",
               "--output", str(path)])
    assert rc == 0
    return str(path)


# ----------------------------------------------------------------- params


def test_params_text_table(capsys):
    rc = main(["params", "--m", "16", "--n", "8", "--delta", "0.1",
               "--eps", "1.0"])
    assert rc == 0
    out = capsys.readouterr().out
    table = {}
    for line in out.splitlines():
        key, _, value = line.partition("  ")
        table[key.strip()] = value.strip()
    expect = derive_schedule(m=16, n=8, delta=0.1, eps=1.0,
                             w_min=1.0, w_max=100.0)
    assert float(table["ell"]) == expect.ell
    assert float(table["a"]) == expect.a
    assert float(table["gamma"]) == expect.gamma
    assert int(table["m"]) == 16


def test_params_json(capsys):
    rc = main(["params", "--m", "16", "--n", "8", "--delta", "0.1",
               "--eps", "1.0", "--json"])
    assert rc == 0
    got = json.loads(capsys.readouterr().out)
    expect = derive_schedule(m=16, n=8, delta=0.1, eps=1.0,
                             w_min=1.0, w_max=100.0).to_dict()
    assert got == expect


def test_params_domain_error_exits_2(capsys):
    rc = main(["params", "--m", "16", "--n", "8", "--delta", "1.5",
               "--eps", "1.0"])
    assert rc == 2
    assert capsys.readouterr().err.startswith("error:")


# -------------------------------------------------------------------- gen


def test_gen_deterministic_and_parseable(tmp_path):
    a, b, c = (tmp_path / x for x in ("a.mst", "b.mst", "c.mst"))
    args = ["gen", "--family", "uniform", "--n", "7", "--m", "12", "--seed", "5"]
    assert main(args + ["--output", str(a)]) == 0
    assert main(args + ["--output", str(b)]) == 0
    assert main(["gen", "--family", "uniform", "--n", "7", "--m", "12",
                 "--seed", "6", "--output", str(c)]) == 0
    assert a.read_bytes() == b.read_bytes()
    assert a.read_bytes() != c.read_bytes()
    g = read_instance(str(a))
    assert g.n == 7 and g.m == 12
    assert f"hash={instance_hash(g)}" in a.read_text()


def test_gen_infeasible_exits_2(capsys):
    rc = main(["gen", "--family", "separated", "--n", "6", "--eps", "1.0",
               "--levels", "1.0", "1.5"])
    assert rc == 2
    assert "separation" in capsys.readouterr().err


# ----------------------------------------------------------------- oracle


def test_oracle_text(inst, capsys):
    rc = main(["oracle", inst])
    assert rc == 0
    out = capsys.readouterr().out.splitlines()
    g = read_instance(inst)
    tree, weight = kruskal_mst(g)
    assert out[0] == f"instance={instance_hash(g)} n=6 m=10"
    assert out[1] == f"mst_weight={weight!r}"
    edges = ",".join(str(i) for i, b in enumerate(tree.bits) if b)
    assert out[3] == f"tree_edges={edges}"


def test_oracle_json(inst, capsys):
    rc = main(["oracle", inst, "--json"])
    assert rc == 0
    got = json.loads(capsys.readouterr().out)
    g = read_instance(inst)
    _, weight = kruskal_mst(g)
    assert got["mst_weight"] == weight
    assert got["n"] == 6 and got["m"] == 10
    assert len(got["sorted_weights"]) == 5
    assert got["sorted_weights"] == sorted(got["sorted_weights"], reverse=True)


def test_oracle_missing_file_exits_2(capsys):
    rc = main(["oracle", "/nonexistent/path.mst"])
    assert rc == 2
    assert capsys.readouterr().err.startswith("error:")


# -------------------------------------------------------------------- run


def test_run_csv_and_exit_0(inst, tmp_path):
    out = tmp_path / "out.csv"
    rc = main(["run", inst, "--eps", "1.0", "--delta", "0.1", "--trials", "3",
               "--no-timing", "--output", str(out)])
    assert rc == 0
    lines = out.read_text().splitlines()
    assert lines[0] == CSV_HEADER
    rows = [l for l in lines[1:] if not l.startswith("#")]
    assert len(rows) == 3
    assert lines[-1].endswith("PASS")
    # wall_ms column is zeroed under --no-timing
    assert all(r.rsplit(",", 1)[1] == "0" for r in rows)


def test_run_is_byte_reproducible(inst, tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    args = ["run", inst, "--eps", "1.0", "--delta", "0.1", "--trials", "2",
            "--no-timing"]
    assert main(args + ["--output", str(a)]) == 0
    assert main(args + ["--output", str(b), "--threads", "2"]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_run_json(inst, capsys):
    rc = main(["run", inst, "--eps", "1.0", "--delta", "0.1", "--trials", "2",
               "--no-timing", "--json"])
    assert rc == 0
    got = json.loads(capsys.readouterr().out)
    assert got["trials"] == 2
    assert got["passed"] is True
    assert len(got["rows"]) == 2


def test_run_gate_failure_exits_1(inst, tmp_path):
    out = tmp_path / "fail.csv"
    rc = main(["run", inst, "--eps", "1.0", "--delta", "0.1", "--trials", "2",
               "--target-ratio", "0.5", "--no-timing", "--output", str(out)])
    assert rc == 1
    assert out.read_text().splitlines()[-1].endswith("FAIL")


def test_run_budget_guardrail(inst, capsys):
    rc = main(["run", inst, "--eps", "1.0", "--delta", "0.1",
               "--trials", "30000"])
    assert rc == 2
    err = capsys.readouterr().err
    assert "guardrail" in err and "--force" in err


# ------------------------------------------------------------------ sweep


def test_sweep_ell_list(inst, tmp_path):
    out = tmp_path / "sweep.csv"
    rc = main(["sweep", inst, "--eps", "1.0", "--delta", "0.1", "--trials", "4",
               "--ell-list", "300,500", "--no-timing", "--output", str(out)])
    assert rc == 0
    lines = out.read_text().splitlines()
    assert lines[0] == SWEEP_HEADER
    rows = [l for l in lines[1:] if not l.startswith("#")]
    assert len(rows) == 8  # 2 points x 4 trials
    assert {r.split(",")[0] for r in rows} == {"ell"}
    assert {r.split(",")[1] for r in rows} == {"300.0", "500.0"}
    footers = [l for l in lines if l.startswith("#")]
    assert len(footers) == 2
    assert all(f.endswith("PASS") for f in footers)


def test_sweep_usage_errors(inst, capsys):
    base = ["sweep", inst, "--delta", "0.1", "--trials", "2"]
    assert main(base + ["--eps", "1.0"]) == 2  # no list at all
    assert main(base + ["--eps", "1.0", "--ell-list", "300,500",
                        "--eps-list", "0.5,1.0"]) == 2  # both lists
    assert main(base + ["--eps", "1.0", "--ell-list", "300"]) == 2  # one point
    assert main(base + ["--ell-list", "300,500"]) == 2  # missing --eps
    capsys.readouterr()


def test_sweep_eps_list(inst, tmp_path):
    out = tmp_path / "eps_sweep.csv"
    rc = main(["sweep", inst, "--delta", "0.1", "--trials", "2",
               "--eps-list", "1.0,2.0", "--ell", "400", "--no-timing",
               "--output", str(out)])
    assert rc in (0, 1)
    lines = out.read_text().splitlines()
    assert {l.split(",")[0] for l in lines[1:] if not l.startswith("#")} == {"eps"}


# -------------------------------------------------------------- separated


def test_separated_command(sep_inst, tmp_path):
    out = tmp_path / "sep.csv"
    rc = main(["separated", sep_inst, "--eps", "1.0", "--delta", "0.1",
               "--trials", "3", "--no-timing", "--output", str(out)])
    assert rc == 0
    text = out.read_text()
    assert "mode=optimal" in text
    assert text.splitlines()[-1].endswith("PASS")


def test_separated_rejects_unseparated_instance(inst, capsys):
    rc = main(["separated", inst, "--eps", "1.0", "--delta", "0.1",
               "--trials", "2"])
    assert rc == 2
    assert "separated" in capsys.readouterr().err


# ----------------------------------------------------------------- verify


@pytest.fixture(scope="module")
def telemetry_run(inst, tmp_path_factory):
    d = tmp_path_factory.mktemp("tel")
    tel = d / "tel.txt"
    out = d / "run.csv"
    rc = main(["run", inst, "--eps", "1.0", "--delta", "0.1", "--trials", "2",
               "--ell", "2000", "--no-timing", "--output", str(out),
               "--telemetry", str(tel)])
    assert rc == 0
    return str(tel), d


def test_telemetry_file_format(telemetry_run, inst):
    tel, _ = telemetry_run
    lines = open(tel).read().splitlines()
    assert lines[0] == "# schema=telemetry-v1"
    g = read_instance(inst)
    assert lines[1] == f"# instance={instance_hash(g)} n=6 m=10"
    assert TELEMETRY_HEADER in lines
    body = [l for l in lines if not l.startswith("#") and l != TELEMETRY_HEADER]
    assert body, "accepted moves should be recorded"
    trial, step, edge, direction, delta_f, temp = body[0].split(",")
    assert trial == "0" and direction in ("in", "out")
    float(delta_f), float(temp)


def test_verify_round_trip(telemetry_run, inst):
    tel, d = telemetry_run
    prefix = d / "pre"
    rc = main(["verify", inst, tel, "--output", str(prefix)])
    assert rc == 0
    audit = (d / "pre.audit.csv").read_text().splitlines()
    assert audit[0] == "trial,checked,violations"
    data = [l for l in audit if not l.startswith("#") and l != audit[0]]
    assert len(data) == 2
    for row in data:
        trial, checked, violations = row.split(",")
        assert int(checked) > 0
        assert violations == "0"
    assert audit[-1].startswith("# probe_w=")
    drift = (d / "pre.drift.csv").read_text().splitlines()
    assert drift[0] == "trial,epoch,step,x_t,temperature"
    assert len(drift) > 1


def test_verify_stdout_without_output(telemetry_run, inst, capsys):
    tel, _ = telemetry_run
    rc = main(["verify", inst, tel, "--w", "30.0", "--max-epochs", "3"])
    assert rc == 0
    out = capsys.readouterr().out
    assert "trial,checked,violations" in out
    assert "trial,epoch,step,x_t,temperature" in out


def test_verify_wrong_instance_exits_2(telemetry_run, tmp_path, capsys):
    tel, _ = telemetry_run
    other = tmp_path / "other.mst"
    assert main(["gen", "--family", "uniform", "--n", "6", "--m", "10",
                 "--seed", "8", "--output", str(other)]) == 0
    rc = main(["verify", str(other), tel])
    assert rc == 2
    assert "different instance" in capsys.readouterr().err


# ------------------------------------------------------------------ usage


def test_unknown_command_exits_2():
    with pytest.raises(SystemExit) as ei:
        main(["frobnicate"])
    assert ei.value.code == 2


def test_module_entry_point(inst):
    proc = subprocess.run(
        [sys.executable, "-m", "annealmst.cli", "oracle", inst],
        capture_output=True, text=True,
    )
    assert proc.returncode == 0
    assert proc.stdout.startswith("instance=")
