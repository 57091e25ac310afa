import csv
import io
import json
import math
import time

import pytest

from dbcare import cli


def bounds_rows(capsys, *args):
    assert cli.main(["bounds", *args]) == 0
    return list(csv.reader(io.StringIO(capsys.readouterr().out)))


def write_config(tmp_path, **over):
    cfg = {"setting": "TwoArmGaussian", "grid": [0.5, 1.0], "cost": 1e-3, "runs": 10,
           "policies": [{"name": "dbcare"}, {"name": "racing", "delta": 0.1}]}
    cfg.update(over)
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(cfg))
    return path


def test_run_guess_prints_zero_tau(capsys):
    assert cli.main(["run", "--policy", "guess", "--instance", "gaussian2:delta=1"]) == 0
    out = capsys.readouterr().out
    assert "tau=0 " in out and out.count("\n") == 1


def test_run_dbcare(capsys):
    assert cli.main(["run", "--policy", "dbcare:mi", "--instance", "gaussian2:delta=2", "--cost", "1e-4"]) == 0
    out = capsys.readouterr().out
    assert out.startswith("recommended=0 tau=")


@pytest.mark.parametrize("argv", [
    ["run", "--policy", "dbcare:sr", "--instance", "gaussian2:delta=1", "--risk", "sr"],
    ["run", "--policy", "nope", "--instance", "gaussian2:delta=1"],
    ["run", "--policy", "guess", "--instance", "gaussian2"],
    ["run", "--policy", "guess", "--instance", "gaussian2:delta=1,bogus=3"],
    ["run", "--policy", "racing:delta=2", "--instance", "gaussian2:delta=1"],
    ["bounds", "--risk", "sr", "--scope", "two", "--cost", "1e-4", "--grid", "0.1"],
    ["bounds", "--risk", "mi", "--scope", "k", "--cost", "1e-4", "--grid", "0.1"],
    ["bounds", "--risk", "mi", "--scope", "two", "--cost", "1e-4", "--grid", "lin:a:b:c"],
    ["bounds", "--risk", "mi", "--scope", "two", "--cost", "1e-4", "--grid", "0.1", "--K", "4"],
    ["frobnicate"],
])
def test_validation_exit_code(argv, capsys):
    assert cli.main(argv) == 2


def test_bounds_regime_flips_once(capsys):
    rows = bounds_rows(capsys, "--risk", "mi", "--scope", "two", "--cost", "1e-4", "--grid", "log:1e-4:1:41")
    assert rows[0] == ["grid_value", "lower", "regime", "oracle_mi", "dbcare_mi2"]
    regimes = [r[2] for r in rows[1:]]
    assert regimes[0] == "small_gap" and regimes[-1] == "large_gap"
    assert sum(a != b for a, b in zip(regimes, regimes[1:])) == 1
    # grid contains sqrt(sigma^2 c) = 0.01 (log grid from 1e-4 to 1, 41 points)
    assert any(math.isclose(float(r[0]), 0.01) for r in rows[1:])
    for r in rows[1:]:
        assert float(r[1]) <= min(float(v) for v in r[3:])


def test_bounds_sr_minimax_row(capsys):
    rows = bounds_rows(capsys, "--risk", "sr", "--scope", "two", "--cost", "1e-4", "--B", "1",
                       "--grid", "lin:0.01:2:10")
    assert rows[-1][0] == "minimax"
    assert float(rows[-1][1]) == pytest.approx(0.012471913987849614, rel=1e-14)
    for r in rows[1:]:
        assert float(r[1]) <= min(float(v) for v in r[3:])


def test_bounds_k_scope(capsys):
    rows = bounds_rows(capsys, "--risk", "sr", "--scope", "k", "--K", "8", "--cost", "1e-4", "--B", "1",
                       "--grid", "0.05,0.5,2")
    assert rows[0][-1] == "dbcare_srk" and rows[-1][0] == "minimax"
    assert len(rows) == 5


def test_bounds_out_file_is_byte_identical(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    args = ["bounds", "--risk", "mi", "--scope", "k", "--K", "4", "--cost", "1e-3", "--grid", "lin:0.1:2:7"]
    assert cli.main([*args, "--out", str(a)]) == 0
    assert cli.main([*args, "--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_sweep_smoke_under_five_seconds(tmp_path):
    t0 = time.perf_counter()
    code = cli.main(["sweep", "--config", "two_arm_gaussian.json", "--out", str(tmp_path), "--runs", "10"])
    elapsed = time.perf_counter() - t0
    assert code == 0
    assert elapsed < 5, elapsed
    assert sorted(p.name for p in tmp_path.iterdir()) == ["TwoArmGaussian_mi.csv", "TwoArmGaussian_sr.csv"]


def test_sweep_outputs_and_plot(tmp_path):
    cfg = write_config(tmp_path, risk=["mi", "sr"])
    assert cli.main(["sweep", "--config", str(cfg), "--out", str(tmp_path / "o"), "--plot"]) == 0
    names = sorted(p.name for p in (tmp_path / "o").iterdir())
    assert names == ["TwoArmGaussian_mi.csv", "TwoArmGaussian_mi.svg",
                     "TwoArmGaussian_sr.csv", "TwoArmGaussian_sr.svg"]


def test_sweep_k_list_files(tmp_path):
    cfg = write_config(tmp_path, setting="OneSparse", K=[3, 4], policies=[{"name": "guess"}])
    assert cli.main(["sweep", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 0
    assert sorted(p.name for p in (tmp_path / "o").iterdir()) == ["OneSparse_K3_mi.csv", "OneSparse_K4_mi.csv"]


def test_invalid_delta_names_field(tmp_path, capsys):
    cfg = write_config(tmp_path, policies=[{"name": "racing", "delta": 1.5}])
    assert cli.main(["sweep", "--config", str(cfg), "--out", str(tmp_path)]) == 2
    assert "policies[0].delta" in capsys.readouterr().err


@pytest.mark.parametrize("over,field", [
    ({"bogus": 1}, "bogus"),
    ({"runs": 0}, "runs"),
    ({"cost": -1}, "cost"),
    ({"setting": "LinearDecay", "K": 2}, "K"),
    ({"grid": "lin:1:2"}, "grid"),
    ({"K": 3}, "policies"),
])
def test_config_errors(tmp_path, capsys, over, field):
    cfg = write_config(tmp_path, **over)
    if field == "policies":
        cfg.write_text(json.dumps({**json.loads(cfg.read_text()), "policies": [{"name": "oracle"}],
                                   "setting": "OneSparse"}))
    assert cli.main(["sweep", "--config", str(cfg), "--out", str(tmp_path)]) == 2
    assert field in capsys.readouterr().err


def test_bad_json_reports_line(tmp_path, capsys):
    path = tmp_path / "bad.json"
    path.write_text('{\n  "setting": "TwoArmGaussian",\n  oops\n}')
    assert cli.main(["sweep", "--config", str(path), "--out", str(tmp_path)]) == 2
    assert "line 3" in capsys.readouterr().err


def test_io_errors_exit_one(tmp_path):
    assert cli.main(["sweep", "--config", str(tmp_path / "missing.json"), "--out", str(tmp_path)]) == 1
    cfg = write_config(tmp_path)
    blocker = tmp_path / "file"
    blocker.write_text("x")
    assert cli.main(["sweep", "--config", str(cfg), "--out", str(blocker / "sub")]) == 1


def test_flags_override_config(tmp_path):
    cfg = write_config(tmp_path, policies=[{"name": "guess"}])
    assert cli.main(["sweep", "--config", str(cfg), "--out", str(tmp_path / "o"), "--runs", "3"]) == 0
    text = (tmp_path / "o" / "TwoArmGaussian_mi.csv").read_text()
    assert text.splitlines()[1].split(",")[4] == "3"


def test_bundled_configs_parse():
    for name in ("two_arm_gaussian", "two_arm_bernoulli", "one_sparse", "linear_decay", "drug_binary",
                 "drug_leveled"):
        configs, _ = cli.load_config(cli.find_config(f"{name}.json"))
        assert configs and all(c.runs == 1000 for c in configs)


def test_grid_grammar():
    assert cli.parse_grid("lin:0:1:3") == [0.0, 0.5, 1.0]
    assert cli.parse_grid("1, 2,3") == [1.0, 2.0, 3.0]
    assert cli.parse_grid("log:1:100:3") == pytest.approx([1.0, 10.0, 100.0])
    with pytest.raises(cli.ConfigError):
        cli.parse_grid("log:0:1:3")
