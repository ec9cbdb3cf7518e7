"""Tests for the command-line interface, exit codes and CSV output."""

import csv
import json

import pytest

from excursion.cli import main as cli_main
from excursion.model import ClassificationError


def test_models_human_table(capsys):
    assert cli_main(["models"]) == 0
    out = capsys.readouterr().out
    lines = out.splitlines()
    assert len(lines) == 9
    head = lines[0].split()
    assert head == ["id", "regime", "reference", "description"]
    assert any(line.split()[0] == "ou" in line for line in lines[1:])
    assert any("bessel" in line for line in lines[1:])


def test_models_csv(capsys):
    assert cli_main(["models", "--format", "csv"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "id,regime,reference,description"
    assert len(lines) == 9


def test_validate_reports_regime(capsys):
    assert cli_main(["validate", "--model", "ou"]) == 0
    out = capsys.readouterr().out
    assert "model ou:span=1: OK" in out
    assert "regime: StationaryLike" in out


def test_validate_needs_a_model(capsys):
    assert cli_main(["validate"]) == 1
    assert "no model given" in capsys.readouterr().err


def test_asym_human_output(capsys):
    rc = cli_main(["asym", "--model", "power:alpha=1,beta=2,a=1", "--u", "2,3"])
    assert rc == 0
    out = capsys.readouterr().out
    assert "regime: StationaryLike" in out
    assert "K = 1.772453851" in out
    assert "rho = 1" in out
    assert "P(2) ~" in out and "P(3) ~" in out


def test_asym_csv_output(capsys):
    rc = cli_main(["asym", "--model", "two_point", "--format", "csv"])
    assert rc == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "model_id,component,regime,K,K_lo,K_hi,rho,log_power,dominance_u"
    # the model id contains a comma, so the cell must be quoted
    assert lines[1].startswith('"two_point:')
    cells = next(csv.reader([lines[1]]))
    assert cells[0] == "two_point:a=2,beta=0.75"
    assert cells[2] == "Talagrand"
    assert cells[3] == "2"
    assert cells[6] == "0"


def test_asym_policy_flags(capsys):
    rc = cli_main(
        [
            "asym", "--model", "power:alpha=1.5,beta=1.5,a=1",
            "--S", "4", "--delta", "0.04", "--n", "10000", "--seed", "11",
        ]
    )
    assert rc == 0
    out = capsys.readouterr().out
    assert "regime: Transition" in out
    assert "band [" in out


def test_constants_closed_form_row(capsys):
    assert cli_main(["constants", "--alpha", "2"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "T,delta,n,estimate,std_err"
    assert lines[1] == "inf,0,0,0.5641895835,0"


def test_constants_without_closed_form_needs_table(capsys):
    assert cli_main(["constants", "--alpha", "1.5"]) == 1
    assert "no closed form" in capsys.readouterr().err


def test_constants_estimator_table_is_deterministic(capsys):
    argv = [
        "constants", "--alpha", "2", "--T", "4,8",
        "--delta", "0.05", "--n", "10000", "--seed", "3",
    ]
    assert cli_main(argv) == 0
    first = capsys.readouterr().out
    assert cli_main(argv) == 0
    second = capsys.readouterr().out
    assert first == second
    lines = first.splitlines()
    assert len(lines) == 3
    for line in lines[1:]:
        cells = line.split(",")
        assert float(cells[3]) > 0
        assert float(cells[4]) > 0


def test_mc_requires_seed(capsys):
    rc = cli_main(["mc", "--model", "ou", "--u", "2", "--n", "1000"])
    assert rc == 1
    assert "--seed is required" in capsys.readouterr().err


def test_mc_low_levels_leave_asym_cells_empty(capsys):
    rc = cli_main(
        ["mc", "--model", "ou", "--u", "0.5,2", "--n", "1000", "--seed", "1", "--grid", "513"]
    )
    assert rc == 0
    lines = capsys.readouterr().out.splitlines()
    assert len(lines) == 3
    low = lines[1].split(",")
    assert low[1] == "0.5"
    assert low[2] == low[3] == low[4] == ""
    assert low[8] == ""
    high = lines[2].split(",")
    assert float(high[2]) > 0
    assert float(high[8]) > 0


def test_mc_rejects_unordered_levels(capsys):
    rc = cli_main(["mc", "--model", "ou", "--u", "3,2", "--n", "1000", "--seed", "1"])
    assert rc == 1
    assert "strictly increasing" in capsys.readouterr().err


def test_unknown_flag_exits_one(capsys):
    with pytest.raises(SystemExit) as exc:
        cli_main(["mc", "--model", "ou", "--u", "2", "--seed", "1", "--bogus"])
    assert exc.value.code == 1


def test_mesh_refusal_exit_code(capsys):
    rc = cli_main(
        ["mc", "--model", "ou", "--u", "3", "--n", "1000", "--seed", "1", "--grid", "11"]
    )
    assert rc == 3
    assert capsys.readouterr().err.startswith("mesh rule:")


def test_classification_failure_exit_code(capsys, monkeypatch):
    def boom(model):
        raise ClassificationError("probe ladder is inconclusive")

    monkeypatch.setattr("excursion.cli.classify_regime", boom)
    rc = cli_main(["validate", "--model", "ou"])
    assert rc == 2
    assert "classification error" in capsys.readouterr().err


def test_config_file_drives_mc(tmp_path, capsys):
    cfg = {
        "schema_version": 1,
        "model": "ou",
        "u": [2.0],
        "n": 1000,
        "seed": 5,
        "grid": 513,
        "format": "csv",
    }
    path = tmp_path / "run.json"
    path.write_text(json.dumps(cfg))
    assert cli_main(["mc", "--config", str(path)]) == 0
    base = capsys.readouterr().out
    assert base.splitlines()[1].split(",")[9] == "1000"
    # command-line flags override config entries
    assert cli_main(["mc", "--config", str(path), "--n", "2000"]) == 0
    over = capsys.readouterr().out
    assert over.splitlines()[1].split(",")[9] == "2000"


def test_config_requires_schema_version(tmp_path, capsys):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps({"model": "ou"}))
    assert cli_main(["mc", "--config", str(path), "--u", "2", "--seed", "1"]) == 1
    assert "schema_version" in capsys.readouterr().err


def test_compare_is_byte_identical_across_reruns_and_threads(tmp_path, capsys):
    base = ["compare", "--model", "ou", "--u", "1.5,2", "--n", "2000",
            "--seed", "2", "--grid", "513"]
    paths = []
    for name, extra in (("a.csv", []), ("b.csv", []), ("c.csv", ["--threads", "3"])):
        out = tmp_path / name
        assert cli_main(base + extra + ["--out", str(out)]) == 0
        paths.append(out.read_bytes())
    assert capsys.readouterr().out == ""
    assert paths[0] == paths[1] == paths[2]
    assert paths[0].startswith(b"model_id,u,asym_value")


def test_compare_rejects_levels_at_or_below_one(capsys):
    rc = cli_main(["compare", "--model", "ou", "--u", "0.5,2", "--n", "1000", "--seed", "1"])
    assert rc == 1
    assert "u > 1" in capsys.readouterr().err
