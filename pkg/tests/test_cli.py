import csv
import io
import json

import numpy as np
import pytest

from chaos_bounds import cli


@pytest.fixture
def tensor_file(tmp_path):
    path = tmp_path / "tensor.json"
    payload = {
        "d": 1, "n": 2, "m": 1,
        "space": {"kind": "lq", "q": 2.0, "weights": [1.0]},
        "values": [3.0, 4.0],
    }
    path.write_text(json.dumps(payload))
    return str(path)


@pytest.fixture
def masked_file(tmp_path):
    path = tmp_path / "masked.json"
    payload = {
        "d": 2, "n": 2, "m": 1,
        "space": {"kind": "lq", "q": 2.0, "weights": [1.0]},
        "values": [0.0, 1.0, 1.0, 0.0],
    }
    path.write_text(json.dumps(payload))
    return str(path)


def run_capture(args, capsys):
    code = cli.run(args)
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_unknown_command_exits_64(capsys):
    code, _out, err = run_capture(["frobnicate"], capsys)
    assert code == 64
    assert "usage" in err


def test_no_args_prints_usage(capsys):
    code, out, _ = run_capture([], capsys)
    assert code == 64
    assert "usage" in out


def test_missing_file_exits_2(capsys):
    code, _, err = run_capture(["bound", "--tensor", "/nonexistent.json"], capsys)
    assert code == 2
    assert "not found" in err


def test_bad_pair_exits_2(tensor_file, capsys):
    code, _, err = run_capture(
        ["norm", "--tensor", tensor_file, "--pair", "{1}|{1}"], capsys)
    assert code == 2
    assert "validation" in err


def test_norm_command(tensor_file, capsys):
    code, out, _ = run_capture(
        ["norm", "--tensor", tensor_file, "--pair", "|{1}",
         "--restarts", "2", "--no-meta"], capsys)
    assert code == 0
    body = json.loads(out)
    assert body["value"] == pytest.approx(5.0, rel=1e-9)
    assert "meta" not in body


def test_bound_json_deterministic(tensor_file, capsys):
    args = ["bound", "--tensor", tensor_file, "--p", "4", "--side", "both",
            "--seed", "9", "--restarts", "2", "--eval-samples", "1024", "--no-meta"]
    code1, out1, _ = run_capture(args, capsys)
    code2, out2, _ = run_capture(args, capsys)
    assert code1 == code2 == 0
    assert out1 == out2
    body = json.loads(out1)
    assert {rep["side"] for rep in body["reports"]} == {"lower", "upper"}


def test_bound_csv_columns(tensor_file, capsys):
    code, out, _ = run_capture(
        ["bound", "--tensor", tensor_file, "--p", "4", "--side", "lower",
         "--restarts", "2", "--eval-samples", "1024", "--format", "csv", "--no-meta"],
        capsys)
    assert code == 0
    rows = list(csv.reader(io.StringIO(out)))
    assert rows[0] == ["p", "side", "partition", "power", "value", "stderr"]
    assert len(rows) == 3  # header + two d=1 terms


def test_tail_command(tensor_file, capsys):
    code, out, _ = run_capture(
        ["tail", "--tensor", tensor_file, "--t", "2.0", "4.0",
         "--restarts", "2", "--eval-samples", "1024", "--no-meta"], capsys)
    assert code == 0
    body = json.loads(out)
    assert len(body["tails"]) == 2


def test_empirical_csv(tensor_file, capsys):
    code, out, _ = run_capture(
        ["empirical", "--tensor", tensor_file, "--p", "2", "4",
         "--samples", "20000", "--seed", "3", "--format", "csv", "--no-meta"], capsys)
    assert code == 0
    rows = list(csv.reader(io.StringIO(out)))
    assert rows[0] == ["p", "value", "ci_low", "ci_high", "samples", "seed"]
    assert len(rows) == 3
    assert float(rows[1][1]) == pytest.approx(5.0, rel=0.05)


def test_check_decoupling_command(masked_file, capsys):
    code, out, _ = run_capture(
        ["check", "--tensor", masked_file, "--what", "decoupling", "--p", "2",
         "--samples", "100000", "--seed", "7", "--no-meta"], capsys)
    assert code == 0
    body = json.loads(out)
    assert body["result"]["ratio"] == pytest.approx(np.sqrt(2.0), rel=0.05)


def test_check_requires_known_what(tensor_file, capsys):
    code, _, err = run_capture(
        ["check", "--tensor", tensor_file, "--what", "nonsense"], capsys)
    assert code == 2
    assert "what" in err


def test_exp_bound_command(tmp_path, capsys):
    path = tmp_path / "one.json"
    path.write_text(json.dumps({
        "d": 1, "n": 1, "m": 1,
        "space": {"kind": "lq", "q": 2.0, "weights": [1.0]},
        "values": [1.0],
    }))
    code, out, _ = run_capture(
        ["exp-bound", "--tensor", str(path), "--p", "4", "--restarts", "2",
         "--no-meta"], capsys)
    assert code == 0
    assert json.loads(out)["reports"][0]["structural_sum"] == pytest.approx(7.0, rel=1e-9)


def test_poly_command(tmp_path, capsys):
    path = tmp_path / "poly.json"
    path.write_text(json.dumps({
        "n": 1, "D": 2, "m": 1,
        "terms": [{"exps": [2], "coeff": [1.0]}],
        "space": {"kind": "lq", "q": 2.0, "weights": [1.0]},
    }))
    code, out, _ = run_capture(
        ["poly", "--poly", str(path), "--what", "gradients", "--no-meta"], capsys)
    assert code == 0
    assert json.loads(out)["result"]["tensors"]["2"]["values"] == [2.0]


def test_out_flag_writes_file(tensor_file, tmp_path, capsys):
    target = tmp_path / "result.json"
    code, out, _ = run_capture(
        ["empirical", "--tensor", tensor_file, "--p", "2", "--samples", "5000",
         "--out", str(target), "--no-meta"], capsys)
    assert code == 0
    assert out == ""
    assert json.loads(target.read_text())["moments"]


def test_report_csv_unsupported(tensor_file, capsys):
    code, _, err = run_capture(
        ["report", "--tensor", tensor_file, "--format", "csv",
         "--samples", "2000", "--restarts", "2", "--eval-samples", "256"], capsys)
    assert code == 2
    assert "csv" in err


def test_numeric_failure_exits_3(tmp_path, capsys):
    path = tmp_path / "overflow.json"
    path.write_text(json.dumps({
        "d": 1, "n": 4, "m": 1,
        "space": {"kind": "lq", "q": 2.0, "weights": [1.0]},
        "values": [1e308] * 4,
    }))
    code, _, err = run_capture(
        ["norm", "--tensor", str(path), "--pair", "{1}|", "--restarts", "2"], capsys)
    assert code == 3
    assert "numeric" in err
