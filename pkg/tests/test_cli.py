import csv
import io
import json
import subprocess
import sys

import pytest

from fisherlab import dqm, lecam, projection
from fisherlab.cli import main
from fisherlab.lecam import SimConfig
from fisherlab.models import ModelParams
from fisherlab.report import InfoTable, from_json, to_csv, to_json


def run(argv, capsys):
    code = main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_dqm_json(capsys):
    code, out, _ = run(["dqm", "--model", "ks", "--theta", "0"], capsys)
    assert code == 0
    payload = json.loads(out)
    assert payload["report"] == "DqmReport"
    assert payload["pass"] == [True, True, True]
    assert payload["score_l2"] == pytest.approx(1.0, abs=1e-8)


def test_dqm_csv_layout(capsys):
    code, out, _ = run(["dqm", "--format", "csv"], capsys)
    assert code == 0
    rows = list(csv.reader(io.StringIO(out)))
    assert rows[0] == ["t", "singular_mass", "remainder_l2"]
    assert [r[0] for r in rows[1:5]] == ["0.40000000000000002", "0.20000000000000001",
                                          "0.10000000000000001", "0.050000000000000003"]
    assert [r[0] for r in rows[5:]] == ["slope", "r_squared", "score_l2", "pass"]
    assert rows[-1] == ["pass", "true", "true"]


def test_project_control_csv(capsys):
    code, out, _ = run(["project", "--model", "control", "--format", "csv"], capsys)
    assert code == 0
    header, row = list(csv.reader(io.StringIO(out)))
    rec = dict(zip(header, row))
    assert float(rec["info_P"]) == pytest.approx(1.25, abs=1e-8)
    assert float(rec["info_Q"]) == pytest.approx(1.0, abs=1e-8)
    assert float(rec["defect"]) == pytest.approx(0.25, abs=1e-8)
    assert rec["preserved"] == "false"


def test_info_table(capsys):
    code, out, _ = run(["info", "--theta", "-2,0,1,3"], capsys)
    assert code == 0
    table = from_json(out)
    assert isinstance(table, InfoTable)
    assert table.theta == (-2.0, 0.0, 1.0, 3.0)
    assert all(abs(v - 1) < 1e-8 for v in table.info_P + table.info_Q)


def test_simulate_field_names(capsys):
    code, out, _ = run(["simulate", "--n", "20", "--replicates", "10"], capsys)
    assert code == 0
    payload = json.loads(out)
    for key in ("a_n_frequency", "mismatch_rate", "sqrtn_errors", "gapL_scaled",
                "gapR_scaled", "replicate_count"):
        assert key in payload
    assert len(payload["sqrtn_errors"]) == 10


@pytest.mark.parametrize("argv", [
    ["simulate", "--n", "0"],
    ["simulate", "--replicates", "0"],
    ["dqm", "--bogus"],
    ["dqm", "--t-grid", "0.2,0.1"],
    ["info", "--model", "ks_variant", "--alpha", "1.5"],
    ["info", "--model", "ks", "--alpha", "0.3"],
    ["gaps", "--model", "control"],
    ["tvrate", "--n-grid", "40,20,10"],
    ["frobnicate"],
])
def test_usage_errors_exit_2(argv, capsys):
    with pytest.raises(SystemExit) as info:
        main(argv)
    assert info.value.code == 2
    capsys.readouterr()


def test_verification_failure_exit_1(capsys):
    code, out, err = run(["dqm", "--threshold", "3.5"], capsys)
    assert code == 1
    assert json.loads(out)["pass"] == [False, True, False]
    assert "verification failed" in err


def test_unwritable_output_exit_1(tmp_path, capsys):
    code, _, err = run(["project", "--output", str(tmp_path / "missing" / "x.json")], capsys)
    assert code == 1
    assert "cannot write" in err


def test_reruns_are_byte_identical(tmp_path, capsys):
    paths = []
    for i, workers in enumerate((1, 1, 2)):
        p = tmp_path / f"run{i}.csv"
        argv = ["simulate", "--n", "25", "--replicates", "40", "--seed", "9",
                "--workers", str(workers), "--format", "csv", "--output", str(p)]
        assert main(argv) == 0
        paths.append(p)
    blobs = [p.read_bytes() for p in paths]
    assert blobs[0] == blobs[1] == blobs[2]


def test_config_file_and_override(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# sample size and count\nn = 20\nreplicates = 5\nseed=3\n")
    _, out, _ = run(["simulate", "--config", str(cfg)], capsys)
    assert len(json.loads(out)["sqrtn_errors"]) == 5
    _, out, _ = run(["simulate", "--config", str(cfg), "--replicates", "7"], capsys)
    assert len(json.loads(out)["sqrtn_errors"]) == 7


def test_bad_config_is_usage_error(tmp_path, capsys):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("just words\n")
    with pytest.raises(SystemExit) as info:
        main(["info", "--config", str(cfg)])
    assert info.value.code == 2
    capsys.readouterr()


def _reports():
    ks = ModelParams.ks()
    sim = lecam.simulate(SimConfig(ks, 0.0, 15, 30, seed=1))
    return [
        dqm.dqm_verify(0.0, params=ks),
        dqm.dqm_verify(0.0, params=ModelParams.control()),
        projection.pythagoras_check(0.0, ModelParams.control()),
        projection.ProjectionSummary("ks", projection.pythagoras_check(0.0, ks), 1.0, 1.0),
        InfoTable("ks", (0.0, 1.0), (1.0, 1.0), (1.0, 1.0)),
        sim,
        lecam.gap_limit_check(SimConfig(ks, 0.0, 40, 120, seed=0)),
        lecam.tv_decay_fit(0.0, [5, 10, 20], 200, seed=0),
    ]


@pytest.mark.parametrize("report", _reports(), ids=lambda r: type(r).__name__)
def test_json_round_trip(report):
    text = to_json(report)
    assert from_json(text) == report
    assert to_json(from_json(text)) == text
    assert to_csv(report).endswith("\n")


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "fisherlab", "project", "--model", "ks"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["info"]["preserved"] is True
