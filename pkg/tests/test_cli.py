import csv
import json
import math
import subprocess
import sys

import jsonschema
import numpy as np
import pytest

from conefix.cli import main

QPI = math.pi / 4.0

TRACE_RECORD_SCHEMA = {
    "type": "object",
    "properties": {
        "n": {"type": "integer", "minimum": 0},
        "step_norm": {"type": "number"},
        "self_norm": {"type": "number"},
        "point": {"type": "array", "items": {"type": "number"}},
        "point_norm": {"type": "number"},
    },
    "required": ["n", "step_norm", "self_norm"],
    "additionalProperties": False,
}

CERTIFICATE_SCHEMA = {
    "type": "object",
    "properties": {
        "pass": {"type": "boolean"},
        "samples": {"type": "integer"},
        "violations": {"type": "array"},
        "worst_slack": {"type": "number"},
    },
    "required": ["pass", "samples", "violations"],
    "additionalProperties": False,
}

AXIOM_REPORT_SCHEMA = {
    "type": "object",
    "properties": {
        "pass": {"type": "boolean"},
        "samples": {"type": "integer"},
        "violations": {"type": "array"},
    },
    "required": ["pass", "samples", "violations"],
    "additionalProperties": False,
}


def run_cli(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr().out
    return code, out


def test_solve_entry_converges(capsys):
    code, out = run_cli(
        capsys, "solve", "--entry", "interval-cos-half", "--x0", "0.7", "--tol", "1e-10"
    )
    assert code == 0
    doc = json.loads(out)
    assert doc["status"] == "converged"
    assert abs(doc["x_star"][0]) <= 1e-10
    assert "rate" in doc and "apriori_bound" in doc


def test_solve_from_fixed_point_iteration_zero(capsys):
    code, out = run_cli(
        capsys, "solve", "--entry", "interval-cos-half", "--x0", "0", "--tol", "1e-10"
    )
    assert code == 0
    assert json.loads(out)["iterations"] == 0


def test_solve_insufficient_iterations_exits_2(capsys):
    code, out = run_cli(
        capsys,
        "solve", "--entry", "l1-tan-quarter", "--x0", "max",
        "--max-iters", "3", "--tol", "1e-12",
    )
    assert code == 2
    assert json.loads(out)["status"] == "max_iters_exceeded"


def test_verify_contraction_passes(capsys):
    code, out = run_cli(
        capsys, "verify", "--entry", "l1-tan-quarter", "--what", "contraction",
        "-n", "10000",
    )
    assert code == 0
    doc = json.loads(out)
    jsonschema.validate(doc, CERTIFICATE_SCHEMA)
    assert doc["pass"] and doc["samples"] == 10000 and doc["violations"] == []


def test_verify_axioms_passes(capsys):
    code, out = run_cli(
        capsys, "verify", "--entry", "interval-half-sin", "--what", "axioms",
        "-n", "10000",
    )
    assert code == 0
    doc = json.loads(out)
    jsonschema.validate(doc, AXIOM_REPORT_SCHEMA)
    assert doc["pass"]


def test_verify_min_metric_finds_pcm1(capsys):
    code, out = run_cli(
        capsys, "verify", "--inline", "min-metric", "--what", "axioms", "-n", "1000"
    )
    assert code == 3
    doc = json.loads(out)
    jsonschema.validate(doc, AXIOM_REPORT_SCHEMA)
    tags = {v["axiom"] for v in doc["violations"]}
    assert "PCM1" in tags


def test_verify_contraction_failure_exits_3(capsys):
    code, out = run_cli(
        capsys,
        "verify", "--inline", "r2max/identity/identity", "--what", "contraction",
        "--family", "kannan", "--alpha", "0.4", "--beta", "0.4", "-n", "1000",
    )
    assert code == 3
    doc = json.loads(out)
    assert not doc["pass"] and doc["worst_slack"] < 0
    witnesses = [(v["x"][0], v["y"][0]) for v in doc["violations"]]
    assert (QPI, QPI) in witnesses


def test_fit_kannan_sym_bracket(capsys):
    code, out = run_cli(capsys, "fit", "--entry", "l1-tan-quarter", "--family", "kannan-sym")
    assert code == 0
    doc = json.loads(out)
    assert 1 / 3 - 1 / 256 <= doc["alpha"] <= 1 / 3 + 1 / 256
    assert doc["alpha"] == doc["beta"]


def test_fit_max_bracket(capsys):
    code, out = run_cli(capsys, "fit", "--entry", "interval-cos-half", "--family", "max")
    assert code == 0
    assert json.loads(out)["alpha"] <= 2 / 3 + 1 / 256


def test_fit_identity_infeasible(capsys):
    code, out = run_cli(
        capsys, "fit", "--inline", "r2max/identity/identity", "--family", "kannan"
    )
    assert code == 4
    assert json.loads(out)["infeasible"] is True


def test_fit_implicit_rejected(capsys):
    code, _ = run_cli(capsys, "fit", "--entry", "l1-tan-quarter", "--family", "implicit")
    assert code == 1


def test_config_errors_exit_1(capsys):
    assert run_cli(capsys, "solve", "--entry", "no-such-entry")[0] == 1
    assert run_cli(capsys, "solve")[0] == 1  # neither --entry nor --inline
    assert run_cli(
        capsys, "solve", "--entry", "interval-cos-half", "--inline", "r2max"
    )[0] == 1
    assert run_cli(capsys, "solve", "--inline", "warp-space")[0] == 1
    assert run_cli(
        capsys, "solve", "--entry", "interval-cos-half", "--x0", "nope"
    )[0] == 1


def test_x0_forms(capsys):
    code, out = run_cli(capsys, "solve", "--entry", "l1-tan-quarter", "--x0", "zero")
    assert code == 0 and json.loads(out)["iterations"] == 0
    code, out = run_cli(
        capsys, "solve", "--inline", "l1max:2/tanthird/scale:0.25",
        "--x0", "0.5,0.25",
    )
    assert code == 0
    code, _ = run_cli(
        capsys, "solve", "--inline", "l1max:2/tanthird/scale:0.25", "--x0", "0.1,0.2,0.3"
    )
    assert code == 1  # wrong arity


def test_output_is_byte_identical_across_runs(capsys):
    args = ("verify", "--entry", "l1-tan-quarter", "--what", "contraction",
            "-n", "2000", "--seed", "9")
    code1, out1 = run_cli(capsys, *args)
    code2, out2 = run_cli(capsys, *args)
    assert (code1, out1) == (code2, out2)

    args = ("solve", "--entry", "interval-half-sin", "--x0", "rand", "--seed", "4")
    assert run_cli(capsys, *args) == run_cli(capsys, *args)


def test_trace_file_json_lines(tmp_path, capsys):
    out_file = tmp_path / "trace.jsonl"
    code, _ = run_cli(
        capsys, "solve", "--entry", "interval-half-sin", "--x0", "0.7",
        "--out", str(out_file),
    )
    assert code == 0
    lines = out_file.read_text().strip().splitlines()
    assert lines
    for i, line in enumerate(lines):
        rec = json.loads(line)
        jsonschema.validate(rec, TRACE_RECORD_SCHEMA)
        assert rec["n"] == i
        assert "point" in rec  # dimension 1 keeps coordinates


def test_trace_file_csv(tmp_path, capsys):
    out_file = tmp_path / "trace.csv"
    code, _ = run_cli(
        capsys, "solve", "--entry", "l1-tan-quarter", "--x0", "max",
        "--out", str(out_file), "--format", "csv",
    )
    assert code == 0
    with open(out_file) as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["n", "step_norm", "self_norm"] + [f"p{i}" for i in range(8)]
    assert len(rows) > 2
    float(rows[1][1])  # numeric payload


def test_config_file_defaults_and_flag_precedence(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("entry = interval-cos-half\nx0 = 0.7\ntol = 1e-4  # loose\n")
    code, out = run_cli(capsys, "solve", "--config", str(cfg))
    assert code == 0
    loose_iters = json.loads(out)["iterations"]

    code, out = run_cli(
        capsys, "solve", "--config", str(cfg), "--tol", "1e-12"
    )
    assert code == 0
    tight_iters = json.loads(out)["iterations"]
    assert tight_iters > loose_iters  # flag overrides the config value

    bad = tmp_path / "bad.cfg"
    bad.write_text("unknown-key = 1\n")
    assert run_cli(capsys, "solve", "--config", str(bad))[0] == 1


def test_seed_env_variable_is_default(capsys, monkeypatch):
    args = ("solve", "--entry", "interval-half-sin", "--x0", "rand")
    monkeypatch.setenv("CONEFIX_SEED", "123")
    _, out_env = run_cli(capsys, *args)
    monkeypatch.delenv("CONEFIX_SEED")
    _, out_flag = run_cli(capsys, *args, "--seed", "123")
    assert out_env == out_flag
    monkeypatch.setenv("CONEFIX_SEED", "not-a-number")
    assert run_cli(capsys, *args)[0] == 1


def test_console_entry_point_smoke():
    proc = subprocess.run(
        [sys.executable, "-m", "conefix", "solve", "--entry", "interval-cos-half",
         "--x0", "0.5"],
        capture_output=True, text=True,
    )
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["status"] == "converged"
