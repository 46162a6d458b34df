import json
import subprocess
import sys

import pytest

from hypoheat.cli import EXIT_FAIL, EXIT_PASS, EXIT_USAGE, RunConfig, UsageError, main, run_config
from hypoheat.report import emit_report
from hypoheat.suite import run_suite


def run(argv, capsys):
    code = main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def last_json(out):
    return json.loads(out.strip().splitlines()[-1])


def test_verify_commutation_passes(capsys):
    code, out, _ = run(["verify", "commutation", "--model", "grho:1", "--eps", "1"], capsys)
    assert code == EXIT_PASS
    rec = last_json(out)
    assert rec["checks"][0]["details"]["residuals"] == [[], [], []]


def test_verify_bw(capsys):
    code, out, _ = run(["verify", "bw", "--eps", "1/4", "--count", "5"], capsys)
    assert code == EXIT_PASS


def test_check_poincare_record(capsys, tmp_path):
    out_file = tmp_path / "r.json"
    code, out, _ = run(["check", "poincare", "--model", "heisenberg", "--f", "x", "--t", "1", "--eps", "1",
                        "--paths", "100000", "--steps", "50", "--out", str(out_file)], capsys)
    assert code == EXIT_PASS
    details = last_json(out)["checks"][0]["details"]
    assert details["lhs"] == 1
    assert {"lhs", "rhs", "se", "margin", "pass"} <= set(details)
    assert json.loads(out_file.read_bytes()) == last_json(out)


@pytest.mark.parametrize("argv", [
    [],
    ["frobnicate"],
    ["check", "gradient", "--f", "sin"],
    ["check", "decay", "--model", "heisenberg", "--paths", "100"],
    ["estimate", "ptf", "--model", "torus"],
    ["estimate", "ptf", "--eps", "-1", "--paths", "100"],
    ["estimate", "dptf", "--paths", "10", "--batches", "40"],
])
def test_usage_errors(argv, capsys):
    code, _, err = run(argv, capsys)
    assert code == EXIT_USAGE


def test_empty_and_malformed_configs(tmp_path, capsys):
    empty = tmp_path / "empty.cfg"
    empty.write_text("")
    assert run(["run", str(empty)], capsys)[0] == EXIT_USAGE
    bad = tmp_path / "bad.cfg"
    bad.write_text("command = check poincare\nbogus = 1\n")
    assert run(["run", str(bad)], capsys)[0] == EXIT_USAGE
    bad.write_text("{not json")
    assert run(["run", str(bad)], capsys)[0] == EXIT_USAGE
    assert run(["run", str(tmp_path / "missing.cfg")], capsys)[0] == EXIT_USAGE


def test_key_value_and_json_configs_agree(tmp_path, capsys):
    kv = tmp_path / "a.cfg"
    kv.write_text("# ibp on SU(2)\ncommand = check ibp\nmodel = su2\nf = xz\ngamma = 0, 1\npaths = 4000\nsteps = 100\n")
    js = tmp_path / "b.json"
    js.write_text(json.dumps({"command": "check ibp", "model": "su2", "f": "xz", "gamma": [0, 1],
                              "paths": 4000, "steps": 100}))
    a = run(["run", str(kv)], capsys)
    b = run(["run", str(js)], capsys)
    assert a[0] == b[0] == EXIT_PASS
    assert last_json(a[1]) == last_json(b[1])


def test_run_config_serialization_reproduces():
    cfg = RunConfig("estimate dptf", model="su2", eps="1/2", paths=2000, steps=50, f="xz", seed=3)
    again = RunConfig.from_mapping(json.loads(cfg.to_json()))
    assert again == cfg
    assert emit_report(run_config(cfg)) == emit_report(run_config(again))
    with pytest.raises(UsageError):
        RunConfig.from_mapping({})


def test_env_seed_overrides(monkeypatch, capsys):
    args = ["estimate", "ptf", "--f", "x2+y2", "--paths", "2000", "--steps", "20"]
    monkeypatch.setenv("HYPOHEAT_SEED", "11")
    a = last_json(run(args + ["--seed", "1"], capsys)[1])
    b = last_json(run(args + ["--seed", "2"], capsys)[1])
    assert a == b and a["config"]["seed"] == 11
    monkeypatch.setenv("HYPOHEAT_SEED", "abc")
    assert run(args, capsys)[0] == EXIT_USAGE


def test_trace_csv(tmp_path, capsys):
    out = tmp_path / "trace.csv"
    code, text, _ = run(["trace", "--model", "su2", "--steps", "10", "--out", str(out)], capsys)
    assert code == EXIT_PASS
    lines = out.read_text().strip().splitlines()
    assert lines[0].split(",")[:5] == ["time", "q0", "q1", "q2", "q3"]
    assert len(lines) == 12


def test_tensors_dump(capsys):
    code, out, _ = run(["tensors", "--model", "su2", "--eps", "3/2"], capsys)
    t = last_json(out)["checks"][0]["details"]["tensors"]
    assert code == EXIT_PASS and t["epsilon"] == "3/2"
    assert t["t_x"][2][1] == "-1/3"


def test_failing_check_exit_code(tmp_path, capsys):
    code, out, _ = run(["selftest", "--quick", "--fault", "torsion", "--format", "csv"], capsys)
    assert code == EXIT_FAIL
    assert "2:bochner_weitzenboeck,FAIL" in out


def test_seed_change_keeps_pass_status():
    a = run_suite(seed=1, profile="quick")
    b = run_suite(seed=2, profile="quick")
    assert a.passed and b.passed
    assert emit_report(a) != emit_report(b)


def test_console_entry_point():
    proc = subprocess.run([sys.executable, "-m", "hypoheat.cli", "verify", "commutation", "--model", "sl2"],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert "overall: PASS" in proc.stdout
