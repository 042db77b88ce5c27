import csv
import json
import os

import pytest

from boglab.cli import COMMANDS, config_hash, main, resolve_config, run
from boglab.errors import ConfigInvalid


def _read(path):
    return open(path, "rb").read()


def test_exponent_table_example(tmp_path):
    status = main(["exponent-table", "--delta", "0:1:0.01", "--alpha", "0:2:0.01", "--out", str(tmp_path)])
    assert status == 0
    rows = list(csv.reader(open(tmp_path / "exponent_table.csv")))
    assert rows[0] == ["delta", "alpha", "q", "beta1", "beta2", "beta3", "beta", "branch"]
    assert len(rows) == 1 + 101 * 201
    summary = json.load(open(tmp_path / "exponent_table_summary.json"))
    assert summary["command"] == "exponent-table"
    assert all(a["pass"] for a in summary["assertions"])
    assert {"name", "pass", "value", "bound"} == set(summary["assertions"][0])


def test_byte_identical_reruns(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    args = ["pressure-check", "--resolution", "3x4x8", "--n-pressures", "3", "--q", "2,3"]
    main(args + ["--out", str(a)])
    main(args + ["--out", str(b)])
    assert _read(a / "pressure_check.csv") == _read(b / "pressure_check.csv")
    assert _read(a / "pressure_check_summary.json") == _read(b / "pressure_check_summary.json")


def test_thread_pool_preserves_order(tmp_path, monkeypatch):
    args = ["constant-sweep", "--L", "2,1.5,1.25", "--resolution", "3x4x8"]
    main(args + ["--out", str(tmp_path / "one")])
    monkeypatch.setenv("BOG_LAB_THREADS", "3")
    main(args + ["--out", str(tmp_path / "three")])
    assert _read(tmp_path / "one" / "constant_sweep.csv") == _read(tmp_path / "three" / "constant_sweep.csv")
    rows = list(csv.reader(open(tmp_path / "three" / "constant_sweep.csv")))
    assert [r[2] for r in rows[1:]] == ["2.0", "1.5", "1.25"]


def test_empty_list_invalid(tmp_path, capsys):
    assert main(["constant-sweep", "--L", "", "--out", str(tmp_path)]) == 2
    assert "L" in capsys.readouterr().err
    with pytest.raises(ConfigInvalid, match="^L:"):
        resolve_config("constant-sweep", {"L": []})


@pytest.mark.parametrize(
    "cfg,field",
    [
        ({"q": "abc"}, "q"),
        ({"resolution": "4x4"}, "resolution"),
        ({"n_samples": 0}, "n_samples"),
        ({"seed": "x"}, "seed"),
        ({"bogus": 1}, "bogus"),
    ],
)
def test_config_errors_name_field(cfg, field):
    with pytest.raises(ConfigInvalid) as exc:
        resolve_config("constant-sweep", cfg)
    assert str(exc.value).startswith(field)


def test_config_file_and_flag_precedence(tmp_path):
    cfg_file = tmp_path / "c.json"
    cfg_file.write_text(json.dumps({"command": "exponent-table", "delta": "0,1", "alpha": "0,1"}))
    main(["exponent-table", "--config", str(cfg_file), "--alpha", "0", "--out", str(tmp_path)])
    summary = json.load(open(tmp_path / "exponent_table_summary.json"))
    assert summary["config"]["delta"] == "0,1"
    assert summary["config"]["alpha"] == "0"
    assert summary["config"]["seed"] == 0x5EED
    rows = list(csv.reader(open(tmp_path / "exponent_table.csv")))
    assert len(rows) == 3


def test_config_file_for_other_command(tmp_path):
    cfg_file = tmp_path / "c.json"
    cfg_file.write_text(json.dumps({"command": "energy-check"}))
    assert main(["exponent-table", "--config", str(cfg_file), "--out", str(tmp_path)]) == 2


def test_config_hash_ignores_output_dir():
    a = resolve_config("covering-stats", overrides={"out": "/tmp/a"})
    b = resolve_config("covering-stats", overrides={"out": "/tmp/b"})
    assert config_hash(a) == config_hash(b)
    c = resolve_config("covering-stats", overrides={"seed": "7"})
    assert config_hash(c) != config_hash(a)


def test_atomic_writes_leave_no_temp_files(tmp_path):
    cfg = resolve_config("covering-stats", overrides={"sigma": "0.125", "n_points": 2000, "out": str(tmp_path)})
    status, summary, paths = run(cfg)
    assert status == 0
    assert sorted(os.listdir(tmp_path)) == ["covering_stats.csv", "covering_stats_summary.json"]


def test_downstream_error_has_provenance(tmp_path, capsys):
    status = main(["covering-stats", "--sigma", "0.2", "--n-points", "100", "--out", str(tmp_path)])
    assert status == 3
    assert "boglab.errors.SigmaOutOfRange" in capsys.readouterr().err


@pytest.mark.parametrize(
    "argv",
    [
        ["energy-check", "--resolutions", "8x8x16 16x16x32", "--tol", "0.01", "--min-order", "0.5"],
        ["criterion-sweep", "--delta", "0,1", "--alpha", "0,1/2", "--R", "10,100,1000"],
        ["transform-verify", "--L", "1.5", "--resolutions", "4x4x8 8x8x16", "--tol", "0.01"],
        ["constant-sweep", "--kind", "slabshell", "--R", "1,2", "--L", "2", "--resolution", "3x8x3"],
    ],
)
def test_commands_run(tmp_path, argv):
    status = main(argv + ["--out", str(tmp_path)])
    summary = json.load(open(tmp_path / f"{argv[0].replace('-', '_')}_summary.json"))
    assert summary["assertions"]
    if argv[0] == "constant-sweep":
        # two coarse R points: the slope check is reported, not required to pass
        assert any(a["name"].startswith("slope") for a in summary["assertions"])
    else:
        assert status == 0, summary


def test_all_commands_have_defaults():
    for c in COMMANDS:
        cfg = resolve_config(c)
        assert cfg["command"] == c and cfg["seed"] == 0x5EED
