import csv
import io
import json
import subprocess
import sys

import pytest

from quarter_green.cli import HEADER, main, to_json

SU3_SPEC = {"kernel": {"p_1_0": "1/3", "p_0_-1": "1/3", "p_-1_1": "1/3"}}


@pytest.fixture
def spec(tmp_path):
    path = tmp_path / "su3.json"
    path.write_text(json.dumps(SU3_SPEC))
    return str(path)


def run(capsys, *args):
    code = main(list(args))
    out, err = capsys.readouterr()
    return code, out, err


def csv_rows(text):
    lines = text.splitlines()
    assert lines[0] == HEADER
    assert lines[1].startswith("# config: ")
    body = [line for line in lines if not line.startswith("#")]
    return list(csv.DictReader(io.StringIO("\n".join(body))))


def test_validate_ok(capsys, spec):
    code, out, _ = run(capsys, "validate", "--spec", spec)
    assert code == 0
    assert all(r["severity"] == "warning" for r in csv_rows(out))
    assert '"valid": true' in out


def test_validate_flags_bad_kernel(capsys, tmp_path):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps({"kernel": {"p_1_0": 0.5, "p_0_-1": 0.6}}))
    code, out, _ = run(capsys, "validate", "--spec", str(path))
    assert code == 1
    assert any(r["severity"] == "violation" for r in csv_rows(out))


def test_uniformize_json(capsys, spec):
    code, out, _ = run(capsys, "uniformize", "--spec", spec, "--format", "json")
    assert code == 0
    data = json.loads(out)["uniformization"]
    assert data["omega_x"] == pytest.approx(-3)
    assert data["branch_points"]["y4"] == "inf"
    assert data["K"] == pytest.approx([0.5, -(3**0.5) / 2])


def test_green_csv(capsys, spec):
    code, out, _ = run(capsys, "green", "--spec", spec, "--targets", "1,1;3,2", "--threads", "2")
    assert code == 0
    rows = csv_rows(out)
    assert [(r["i"], r["j"]) for r in rows] == [("1", "1"), ("3", "2")]
    assert float(rows[0]["value"]) == pytest.approx(1.0479691190621598, rel=1e-9)
    assert rows[0]["method"] == "contour"


def test_green_theta_outside_window_is_an_error(capsys, spec):
    code, out, err = run(capsys, "green", "--spec", spec, "--targets", "2,2", "--theta", "1.0")
    assert code == 1 and out == ""
    assert json.loads(err)["error"] == "ValueError"


def test_oracle_writes_file(capsys, spec, tmp_path):
    target = tmp_path / "oracle.csv"
    code, out, _ = run(capsys, "oracle", "--spec", spec, "--N", "40", "--max-index", "3", "--out", str(target))
    assert code == 0 and out == ""
    rows = csv_rows(target.read_text())
    kinds = {r["kind"] for r in rows}
    assert kinds == {"green", "absorption_horizontal", "absorption_vertical", "absorption_corner"}
    assert sum(r["kind"] == "green" for r in rows) == 9


def test_asymptotic_and_martin(capsys, spec):
    code, out, _ = run(capsys, "asymptotic", "--spec", spec, "--directions", "1", "--radii", "40")
    assert code == 0
    row = csv_rows(out)[0]
    assert abs(float(row["ratio"]) - 1) < 0.05
    code, out, _ = run(capsys, "martin", "--spec", spec, "--directions", "0 inf", "--radii", "30")
    assert code == 0
    rows = csv_rows(out)
    assert [r["direction"] for r in rows] == ["0", "inf"]
    assert float(rows[0]["prediction"]) == pytest.approx(15.0)


def test_sweep_grid_and_samples(capsys):
    code, out, _ = run(capsys, "sweep", "--alpha", "1 1 1", "--beta", "0 0 1", "--p11", "0 0 1", "--p10", "0.1 0.3 2")
    assert code == 0
    rows = csv_rows(out)
    assert len(rows) == 2 and all(r["feasible"] == "true" for r in rows)
    code, out, _ = run(capsys, "sweep", "--samples", "3", "--seed", "5", "--format", "json")
    assert len(json.loads(out)["rows"]) == 3


def test_missing_spec_reports_error(capsys):
    code, _, err = run(capsys, "green")
    assert code == 1
    assert "--spec" in json.loads(err)["message"]


def test_to_json_precision_and_infinity():
    assert to_json({"a": 0.1, "b": float("inf"), "c": 1 + 2j}) == '{"a": 0.10000000000000001, "b": "inf", "c": [1, 2]}'


def test_console_entry_point(spec):
    proc = subprocess.run([sys.executable, "-m", "quarter_green.cli", "validate", "--spec", spec],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0
    assert proc.stdout.startswith(HEADER)
