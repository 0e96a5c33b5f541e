"""
End-to-end tests through the command-line entry point.
"""

import json
import sys
import os
from pathlib import Path

import pandas as pd
import pytest

sys.path.append(os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

from src.cli import main, parse_n_range, parse_params
from src.data_loader import FIXTURES_DIR, load_instance, serialize_instance
from src.exceptions import UsageError
from src.identities import verdict_from_report_dict
from src.sweep import TIMING_COLUMNS
from tests.cases import TEST_CASES, run_test


@pytest.mark.parametrize("case", TEST_CASES, ids=[c["id"] for c in TEST_CASES])
def test_verify_cases(case, tmp_path):
    result = run_test(case, tmp_path, verbose=False)
    assert result["exit_code"] == case["expected"]["exit_code"]
    assert result["document"].get("verdict") == case["expected"]["verdict"]


def write_json(path: Path, document) -> Path:
    path.write_text(json.dumps(document), encoding="utf-8")
    return path


# =============================================================================
# gen
# =============================================================================

def test_gen_is_deterministic(tmp_path):
    first, second = tmp_path / "a.json", tmp_path / "b.json"
    argv = ["gen", "--kind", "line", "--n", "3", "--dist", "rational-line", "--seed", "7"]
    assert main(argv + ["--out", str(first)]) == 0
    assert main(argv + ["--out", str(second)]) == 0
    assert first.read_bytes() == second.read_bytes()

    instance = load_instance(first)
    assert len(instance.positions) == 3
    assert instance.positions == sorted(set(instance.positions))


def test_gen_round_trips_byte_identical(tmp_path):
    for dist, extra in [
        ("uniform", ["--param", "min_gap=0.01"]),
        ("clustered", []),
        ("regular", []),
        ("pythagorean", ["--param", "bound=20"]),
    ]:
        path = tmp_path / f"{dist}.json"
        assert main(["gen", "--n", "6", "--dist", dist, "--seed", "3", "--out", str(path), *extra]) == 0
        assert serialize_instance(load_instance(path)) == path.read_text(encoding="utf-8")


def test_gen_regular_polygon(tmp_path):
    path = tmp_path / "square.json"
    assert main(["gen", "--n", "4", "--dist", "regular", "--out", str(path)]) == 0
    document = json.loads(path.read_text(encoding="utf-8"))
    assert document["half_angles"] == [
        {"pi_num": 0, "pi_den": 1},
        {"pi_num": 1, "pi_den": 4},
        {"pi_num": 1, "pi_den": 2},
        {"pi_num": 3, "pi_den": 4},
    ]
    assert main(["verify", "--in", str(path), "--report", str(tmp_path / "r.json")]) == 0


@pytest.mark.parametrize("argv", [
    ["gen", "--kind", "line", "--n", "4", "--dist", "pythagorean"],
    ["gen", "--n", "1", "--dist", "uniform"],
    ["gen", "--n", "4", "--dist", "uniform", "--param", "min_gap"],
    ["gen", "--n", "4", "--dist", "no-such-dist"],
])
def test_gen_usage_errors(argv):
    assert main(argv) == 3


def test_clustered_instance_is_flagged(tmp_path):
    path = tmp_path / "clustered.json"
    report = tmp_path / "report.json"
    assert main(["gen", "--n", "8", "--dist", "clustered", "--param", "gap=1e-6", "--seed", "1", "--out", str(path)]) == 0
    assert main(["verify", "--in", str(path), "--precision", "64", "--report", str(report)]) in (0, 1)
    document = json.loads(report.read_text(encoding="utf-8"))
    assert document["warnings"]


# =============================================================================
# verify
# =============================================================================

def test_verify_report_is_self_consistent(tmp_path):
    report = tmp_path / "report.json"
    exit_code = main([
        "verify", "--in", str(FIXTURES_DIR / "square.json"),
        "--precision", "64", "--escalate", "--report", str(report),
    ])
    document = json.loads(report.read_text(encoding="utf-8"))
    assert exit_code == 0
    assert document["request"]["schedule"][0] == 64
    assert document["instance"]["count"] == 4
    assert len(document["instance"]["digest"]) == 64
    assert document["convention"] == "odd-minus-even"
    assert verdict_from_report_dict(document) == document["verdict"]


def test_verify_writes_to_stdout(capsys):
    exit_code = main(["verify", "--in", str(FIXTURES_DIR / "triangle_control.json"), "--escalate"])
    document = json.loads(capsys.readouterr().out)
    assert exit_code == 1
    assert document["path"] == "odd-control"


def test_verify_parse_errors(tmp_path):
    bad_json = tmp_path / "bad.json"
    bad_json.write_text('{"kind": "circle", "half_angles": [1, 2', encoding="utf-8")
    bad_field = write_json(tmp_path / "field.json", {"kind": "circle", "half_angles": ["0", 0.5]})
    report = tmp_path / "report.json"

    assert main(["verify", "--in", str(bad_json), "--report", str(report)]) == 3
    assert json.loads(report.read_text(encoding="utf-8"))["location"].startswith("bad.json:")

    assert main(["verify", "--in", str(bad_field), "--report", str(report)]) == 3
    assert json.loads(report.read_text(encoding="utf-8"))["location"] == "half_angles[1]"


@pytest.mark.parametrize("document, location", [
    ({"kind": "circle", "half_angles": ["0.5"]}, "half_angles"),
    ({"kind": "circle", "m_parameters": ["2"]}, "m_parameters"),
    ({"kind": "line", "positions": ["1"]}, "positions"),
])
def test_verify_rejects_single_point_instances(tmp_path, document, location):
    single = write_json(tmp_path / "single.json", document)
    report = tmp_path / "report.json"
    assert main(["verify", "--in", str(single), "--report", str(report)]) == 3
    assert json.loads(report.read_text(encoding="utf-8"))["location"] == location


def test_verify_rejects_bad_precision():
    square = str(FIXTURES_DIR / "square.json")
    assert main(["verify", "--in", square, "--precision", "8"]) == 3
    assert main(["verify", "--in", square, "--backend", "float"]) == 3


def test_unknown_command_is_usage_error():
    assert main(["frobnicate"]) == 3
    assert main([]) == 3


# =============================================================================
# sweep
# =============================================================================

def test_sweep_is_deterministic(tmp_path):
    first, second = tmp_path / "a.csv", tmp_path / "b.csv"
    argv = ["sweep", "--n", "4:8:2", "--trials", "2", "--dist", "uniform", "--seed", "5", "--escalate"]
    assert main(argv + ["--out", str(first)]) == 0
    assert main(argv + ["--out", str(second)]) == 0

    a = pd.read_csv(first, dtype=str).drop(columns=TIMING_COLUMNS)
    b = pd.read_csv(second, dtype=str).drop(columns=TIMING_COLUMNS)
    pd.testing.assert_frame_equal(a, b)
    assert list(a["n"]) == ["4", "4", "6", "6", "8", "8"]
    assert set(a["verdict"]) == {"identity-consistent"}


def test_sweep_odd_counts_are_violated(tmp_path):
    out = tmp_path / "odd.csv"
    assert main(["sweep", "--n", "3,5", "--trials", "1", "--dist", "regular", "--escalate", "--out", str(out)]) == 0
    df = pd.read_csv(out)
    assert list(df["verdict"]) == ["violated", "violated"]


def test_sweep_lines_exact(tmp_path, capsys):
    assert main(["sweep", "--n", "2:6", "--trials", "3", "--dist", "rational-line", "--backend", "exact"]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert len(lines) == 1 + 5 * 3
    assert all("identity-consistent" in line for line in lines[1:])


def test_sweep_usage_errors():
    assert main(["sweep", "--n", "1:4"]) == 3
    assert main(["sweep", "--n", "4", "--trials", "0"]) == 3


def test_parse_helpers():
    assert parse_n_range("4:12:2") == [4, 6, 8, 10, 12]
    assert parse_n_range("4,6,8") == [4, 6, 8]
    assert parse_n_range("8") == [8]
    assert parse_params(["min_gap=0.01", "bound=20"]) == {"min_gap": "0.01", "bound": "20"}
    with pytest.raises(UsageError):
        parse_n_range("a:b")
    with pytest.raises(UsageError):
        parse_params(["=3"])


# =============================================================================
# check-joseph
# =============================================================================

@pytest.mark.parametrize("r, exit_code, verdict", [
    (0, 0, "exact-zero"),
    (1, 0, "exact-zero"),
    (2, 0, "exact-one"),
    (5, 0, "computed"),
])
def test_check_joseph(tmp_path, capsys, r, exit_code, verdict):
    nodes = write_json(tmp_path / "nodes.json", {"nodes": [1, "2", {"num": "3", "den": "1"}]})
    assert main(["check-joseph", "--in", str(nodes), "--r", str(r)]) == exit_code
    result = json.loads(capsys.readouterr().out)
    assert result["verdict"] == verdict
    assert result["n"] == 3


def test_check_joseph_gaussian_nodes(tmp_path, capsys):
    nodes = write_json(tmp_path / "nodes.json", {"nodes": [
        {"re": "1", "im": "0"},
        {"re": "0", "im": "1"},
        {"re": "-3/5", "im": "4/5"},
    ]})
    assert main(["check-joseph", "--in", str(nodes), "--r", "2"]) == 0
    assert json.loads(capsys.readouterr().out)["verdict"] == "exact-one"


def test_check_joseph_errors(tmp_path):
    duplicate = write_json(tmp_path / "dup.json", {"nodes": [1, "1/1"]})
    malformed = write_json(tmp_path / "bad.json", {"points": [1, 2]})
    assert main(["check-joseph", "--in", str(duplicate), "--r", "0"]) == 2
    assert main(["check-joseph", "--in", str(malformed), "--r", "0"]) == 3
    assert main(["check-joseph", "--in", str(duplicate), "--r", "-1"]) == 3


# =============================================================================
# validate
# =============================================================================

def test_validate_fixtures(tmp_path, capsys):
    report = tmp_path / "validation.json"
    assert main(["validate", "--report", str(report)]) == 0
    captured = capsys.readouterr()
    summary = json.loads(captured.out)
    assert summary["mismatches"] == 0
    assert "Validation Report" in captured.err
    assert summary["total"] == summary["matches"] > 0
    document = json.loads(report.read_text(encoding="utf-8"))
    assert all(result["match"] for result in document["results"])
