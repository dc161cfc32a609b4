import csv
import json
import shutil
from pathlib import Path

import pytest

from wasteplan.cli import EXIT_DATA, EXIT_NUMERIC, EXIT_OK, EXIT_USAGE, main, parse_grid, UsageError

FX = Path(__file__).parent / "fixtures"
INPUTS = ["--hydrants", str(FX / "hydrants.csv"), "--districts", str(FX / "districts.geojson"),
          "--lots", str(FX / "lots.csv"), "--tonnage", str(FX / "tonnage.csv"),
          "--zones", str(FX / "zones.geojson")]


def rows(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def test_validate_fixture(capsys):
    code = main(["validate", "--config", str(FX / "run.json")])
    out, err = capsys.readouterr()
    assert code == EXIT_OK
    assert "hydrants: 482" in out and "districts: 3" in out
    assert "hydrants_excluded: 2" in out
    assert "warning" in err and "OUT-" in err


def test_validate_corrupt_row(tmp_path, capsys):
    bad = tmp_path / "h.csv"
    lines = (FX / "hydrants.csv").read_text().splitlines()
    lines[5] = lines[5].split(",")[0] + ",not-a-number,-73.9"
    bad.write_text("\n".join(lines) + "\n")
    code = main(["validate", "--hydrants", str(bad)])
    err = capsys.readouterr().err
    assert code == EXIT_DATA
    assert "line 6" in err and "latitude" in err


def test_missing_file_is_data_error(tmp_path, capsys):
    assert main(["validate", "--hydrants", str(tmp_path / "nope.csv")]) == EXIT_DATA


def test_no_command_is_usage():
    assert main([]) == EXIT_USAGE
    assert main(["dcap", "--bogus"]) == EXIT_USAGE


def test_dcap_district_count(tmp_path, capsys):
    code = main(["dcap", *INPUTS, "--district", "109", "--count", "100", "--output-dir", str(tmp_path)])
    assert code == EXIT_OK
    plan = rows(tmp_path / "dcap" / "plan_109.csv")
    assert len(plan) == 100
    assert list(plan[0]) == ["district_id", "rank", "hydrant_id", "lat", "lon"]
    assert [int(r["rank"]) for r in plan] == list(range(1, 101))
    metrics = json.loads((tmp_path / "dcap" / "metrics_109.json").read_text())
    assert metrics["dumpsters"] == 100 and metrics["mean_min_distance_m"] > 0


def test_dcap_count_too_large(tmp_path, capsys):
    code = main(["dcap", *INPUTS, "--district", "109", "--count", "5000", "--output-dir", str(tmp_path)])
    assert code == EXIT_USAGE
    assert "5000" in capsys.readouterr().err


def test_dcap_unknown_district(tmp_path, capsys):
    code = main(["dcap", *INPUTS, "--district", "999", "--output-dir", str(tmp_path)])
    err = capsys.readouterr().err
    assert code == EXIT_USAGE
    assert "109" in err and "110" in err and "503" in err


def test_dcap_needs_target(tmp_path):
    assert main(["dcap", *INPUTS, "--output-dir", str(tmp_path)]) == EXIT_USAGE


def test_dcap_curve(tmp_path, capsys):
    code = main(["dcap", *INPUTS, "--district", "110", "--curve", "--curve-step", "10", "--output-dir", str(tmp_path)])
    assert code == EXIT_OK
    curve = rows(tmp_path / "dcap" / "curve_110.csv")
    assert list(curve[0]) == ["N", "mean_min_distance", "required_frequency"]
    d = [float(r["mean_min_distance"]) for r in curve]
    assert all(b <= a + 1e-9 for a, b in zip(d, d[1:]))


def tree(root):
    return {p.relative_to(root).as_posix(): p.read_bytes() for p in sorted(root.rglob("*")) if p.is_file()}


def test_dcap_repeat_byte_identical(tmp_path, capsys):
    args = ["dcap", "--config", str(FX / "run.json"), "--all", "--curve", "--curve-step", "5"]
    assert main([*args, "--output-dir", str(tmp_path / "a")]) == EXIT_OK
    assert main([*args, "--output-dir", str(tmp_path / "b")]) == EXIT_OK
    a, b = tree(tmp_path / "a"), tree(tmp_path / "b")
    assert a and a == b
    assert "dcap/borough_outcomes.csv" in a


def test_seed_changes_plan(tmp_path, capsys):
    for s in ("1", "2"):
        main(["dcap", *INPUTS, "--district", "109", "--count", "5", "--seed", s, "--output-dir", str(tmp_path / s)])
    assert (tmp_path / "1/dcap/plan_109.csv").read_bytes() != (tmp_path / "2/dcap/plan_109.csv").read_bytes()


def test_payt_optimize_policy_example(tmp_path, capsys):
    code = main(["payt", "optimize", "--A", "50", "--B", "0.20", "--output-dir", str(tmp_path)])
    assert code == EXIT_OK
    res = json.loads(capsys.readouterr().out)
    assert abs(res["p_star"] - 2.90) <= 0.15
    assert abs(res["efficiency"] - 0.91) <= 0.02
    assert res["weights"] == {"alpha": 1.0, "beta": pytest.approx(0.25), "mu": 50.0}
    for key in ("gov_savings", "societal_savings", "diverted_tons"):
        assert key in res
    assert json.loads((tmp_path / "payt" / "optimize.json").read_text()) == res


def test_payt_optimize_zero_price(tmp_path, capsys):
    assert main(["payt", "optimize", "--A", "0", "--B", "0.99", "--output-dir", str(tmp_path)]) == EXIT_OK
    assert json.loads(capsys.readouterr().out)["p_star"] == 0


def test_payt_B_one_rejected(tmp_path, capsys):
    assert main(["payt", "optimize", "--A", "10", "--B", "1", "--output-dir", str(tmp_path)]) == EXIT_USAGE
    assert "B" in capsys.readouterr().err


def test_payt_missing_scenario(tmp_path, capsys):
    code = main(["payt", "curve", "--scenario", str(tmp_path / "none.json"), "--output-dir", str(tmp_path)])
    assert code == EXIT_DATA


def test_payt_curve_rows(tmp_path, capsys):
    assert main(["payt", "curve", "--step", "0.01", "--output-dir", str(tmp_path)]) == EXIT_OK
    table = rows(tmp_path / "payt" / "curve.csv")
    assert len(table) == 501
    assert list(table[0]) == ["p", "e", "d_c", "d_r", "d_g", "C", "R", "G", "E", "T", "r", "S_G", "S_S"]
    assert float(table[0]["p"]) == 0.0 and float(table[-1]["p"]) == 5.0


def test_payt_sweep(tmp_path, capsys):
    code = main(["payt", "sweep", "--A", "0,50,200", "--B", "0,0.2", "--output-dir", str(tmp_path)])
    assert code == EXIT_OK
    table = rows(tmp_path / "payt" / "sweep.csv")
    assert [(r["A"], r["B"]) for r in table][:2] == [("0.0", "0.0"), ("0.0", "0.2")]
    assert len(table) == 6


def test_paper_literal_flag_changes_output(tmp_path, capsys):
    main(["payt", "curve", "--output-dir", str(tmp_path / "c")])
    main(["payt", "curve", "--paper-literal", "--output-dir", str(tmp_path / "l")])
    assert (tmp_path / "c/payt/curve.csv").read_bytes() != (tmp_path / "l/payt/curve.csv").read_bytes()


def test_numerical_error_exit(tmp_path, capsys):
    scen = tmp_path / "s.json"
    scen.write_text(json.dumps({"totals": {"t_c": 1e305, "t_r": 1e305, "t_g": 1e305}}))
    code = main(["payt", "optimize", "--A", "1e300", "--B", "0.5", "--scenario", str(scen),
                 "--output-dir", str(tmp_path)])
    assert code == EXIT_NUMERIC
    assert "p=" in capsys.readouterr().err


def test_config_values_and_flag_precedence(tmp_path, capsys):
    cfg_dir = tmp_path / "cfg"
    shutil.copytree(FX, cfg_dir, ignore=shutil.ignore_patterns("*.py", "__pycache__"))
    conf = json.loads((cfg_dir / "run.json").read_text())
    conf.update({"district": "110", "count": 3, "output_dir": "out"})
    (cfg_dir / "run.json").write_text(json.dumps(conf))
    assert main(["dcap", "--config", str(cfg_dir / "run.json")]) == EXIT_OK
    assert len(rows(cfg_dir / "out/dcap/plan_110.csv")) == 3
    assert main(["dcap", "--config", str(cfg_dir / "run.json"), "--count", "4"]) == EXIT_OK
    assert len(rows(cfg_dir / "out/dcap/plan_110.csv")) == 4


def test_env_output_dir(tmp_path, monkeypatch, capsys):
    monkeypatch.setenv("WASTEPLAN_OUTPUT_DIR", str(tmp_path / "env"))
    assert main(["payt", "curve", "--step", "0.5"]) == EXIT_OK
    assert len(rows(tmp_path / "env/payt/curve.csv")) == 11


def test_parse_grid():
    assert parse_grid("50") == [50.0]
    assert parse_grid("1,2") == [1.0, 2.0]
    assert parse_grid("0:1:3") == [0.0, 0.5, 1.0]
    with pytest.raises(UsageError):
        parse_grid("a:b")
