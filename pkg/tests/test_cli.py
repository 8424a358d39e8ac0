"""Command-line front end: configs, outputs, exit codes and determinism."""

import json
from pathlib import Path

import jsonschema
import numpy as np
import pytest

from postincident import cli
from postincident.errors import ConfigError

SCENARIOS = Path(__file__).resolve().parents[1] / "scenarios"


def scenario(name: str) -> dict:
    return json.loads((SCENARIOS / f"{name}.json").read_text())


def write_config(tmp_path: Path, config: dict, name: str = "config.json") -> Path:
    path = tmp_path / name
    path.write_text(json.dumps(config))
    return path


def run(*argv) -> int:
    return cli.main([str(a) for a in argv])


# ---------------------------------------------------------------------------
# simulate
# ---------------------------------------------------------------------------


def test_simulate_matches_library_bit_for_bit(tmp_path):
    cfg = scenario("wave_trace")
    assert run("simulate", "--config", SCENARIOS / "wave_trace.json", "--out", tmp_path) == 0
    rec, _ = cli.simulate(cli.build_scenario(cfg))
    assert (tmp_path / "record.csv").read_text() == rec.to_csv()
    summary = json.loads((tmp_path / "summary.json").read_text())
    cli.validate(summary, "summary")
    assert summary["samples"] == rec.times.size


def test_zero_source_gives_zero_record(tmp_path):
    cfg = scenario("heat_point")
    cfg["mu"] = {"kind": "table", "knots": [0.0, 1.0], "values": [0.0, 0.0]}
    assert run("simulate", "--config", write_config(tmp_path, cfg), "--out", tmp_path / "out") == 0
    lines = (tmp_path / "out" / "record.csv").read_text().splitlines()[1:]
    values = np.array([[float(v) for v in line.split(",")[1:]] for line in lines])
    assert values.size > 0 and not np.any(values)
    summary = json.loads((tmp_path / "out" / "summary.json").read_text())
    assert summary["value_to_source_ratio"] is None


def test_value_to_source_ratio(tmp_path):
    assert run("simulate", "--config", SCENARIOS / "wave_state.json", "--out", tmp_path) == 0
    summary = json.loads((tmp_path / "summary.json").read_text())
    # the unit ramp on (0, 1) has L2 norm 1/sqrt(3)
    assert summary["value_to_source_ratio"] == pytest.approx(summary["max_abs_value"] * 3**0.5, rel=1e-10)


def test_pre_incident_window_rejected(tmp_path, capsys):
    cfg = scenario("heat_point")
    cfg["observation"]["T1"] = 0.8
    assert run("simulate", "--config", write_config(tmp_path, cfg), "--out", tmp_path / "out") == 2
    assert "T < T1 < T2" in capsys.readouterr().err
    assert not (tmp_path / "out").exists()


def test_schema_violation_is_config_error(tmp_path, capsys):
    cfg = scenario("heat_point")
    del cfg["equation"]
    assert run("check", "--config", write_config(tmp_path, cfg)) == 2
    assert "config invalid" in capsys.readouterr().err


def test_missing_config_file(tmp_path):
    assert run("check", "--config", tmp_path / "absent.json") == 2


def test_build_scenario_raises_config_error():
    cfg = scenario("wave_state")
    cfg["observation"]["time"] = 0.5
    with pytest.raises(ConfigError):
        cli.build_scenario(cfg)


# ---------------------------------------------------------------------------
# invert
# ---------------------------------------------------------------------------


def simulate_then_invert(tmp_path, name):
    cfg = SCENARIOS / f"{name}.json"
    assert run("simulate", "--config", cfg, "--out", tmp_path / "sim") == 0
    code = run("invert", "--config", cfg, "--data", tmp_path / "sim" / "record.csv", "--out", tmp_path / "inv")
    return code, json.loads((tmp_path / "inv" / "report.json").read_text())


def test_invert_wave_trace(tmp_path):
    code, payload = simulate_then_invert(tmp_path, "wave_trace")
    assert code == 0
    assert payload["status"] == "ok"
    assert payload["report"]["error"]["relative"] < 1e-3
    cli.validate(payload, "report")
    header = (tmp_path / "inv" / "profile.csv").read_text().splitlines()[0]
    assert header == "s,mu"


def test_invert_nonuniqueness_reports_condition(tmp_path, capsys):
    code, payload = simulate_then_invert(tmp_path, "nonuniqueness")
    assert code == 4
    assert payload["status"] == "condition_violated"
    assert payload["failure"]["condition"] == "1.29"
    assert payload["failure"]["indices"] == [1]
    assert "1.29" in capsys.readouterr().err
    assert not (tmp_path / "inv" / "profile.csv").exists()


def test_invert_onset(tmp_path):
    code, payload = simulate_then_invert(tmp_path, "heat_onset")
    assert code == 0
    assert payload["report"]["error"]["absolute"] < 1e-6


def test_invert_malformed_csv(tmp_path):
    bad = tmp_path / "bad.csv"
    bad.write_text("t,u0\n1.7,not-a-number\n")
    code = run("invert", "--config", SCENARIOS / "wave_trace.json", "--data", bad, "--out", tmp_path / "inv")
    assert code == 2


def test_invert_without_inversion_section(tmp_path):
    cfg = scenario("rectangle_irrational")
    path = write_config(tmp_path, cfg)
    assert run("simulate", "--config", path, "--out", tmp_path / "sim") == 0
    code = run("invert", "--config", path, "--data", tmp_path / "sim" / "record.csv", "--out", tmp_path / "inv")
    assert code == 2


# ---------------------------------------------------------------------------
# check
# ---------------------------------------------------------------------------


def check_reports(tmp_path, name):
    out = tmp_path / f"{name}.json"
    assert run("check", "--config", SCENARIOS / f"{name}.json", "--out", out) == 0
    reports = json.loads(out.read_text())
    cli.validate(reports, "conditions")
    return {r["condition"]: r for r in reports}


def test_check_heat_interval_fails_muntz(tmp_path):
    assert check_reports(tmp_path, "heat_point")["1.12"]["verdict"] == "Fails"


def test_check_irrational_rectangle_holds(tmp_path):
    assert check_reports(tmp_path, "rectangle_irrational")["1.12"]["verdict"] == "Holds"


def test_check_wave_state_trig_condition(tmp_path):
    assert check_reports(tmp_path, "wave_state")["1.31"]["verdict"] == "Holds"


def test_check_nonuniqueness(tmp_path):
    r = check_reports(tmp_path, "nonuniqueness")["1.29"]
    assert r["verdict"] == "Fails" and r["indices"] == [1]


def test_check_disk_density(tmp_path):
    r = check_reports(tmp_path, "disk_wave")["1.23/1.25"]
    assert r["verdict"] == "Holds"


def test_check_prints_to_stdout(capsys):
    assert run("check", "--config", SCENARIOS / "wave_trace.json") == 0
    reports = json.loads(capsys.readouterr().out)
    assert {r["condition"] for r in reports} == {"1.16/1.17", "1.15", "1.31"}


# ---------------------------------------------------------------------------
# sweep
# ---------------------------------------------------------------------------


def read_sweep(path: Path):
    lines = path.read_text().splitlines()
    header = lines[0].split(",")
    return [dict(zip(header, line.split(","))) for line in lines[1:]]


def test_single_point_sweep_equals_invert(tmp_path):
    assert run("sweep", "--config", SCENARIOS / "wave_trace.json", "--out", tmp_path / "sw") == 0
    (row,) = read_sweep(tmp_path / "sw" / "sweep.csv")
    code, payload = simulate_then_invert(tmp_path, "wave_trace")
    assert code == 0
    assert float(row["error"]) == payload["report"]["error"]["relative"]
    assert list(row) == cli.SWEEP_COLUMNS


def test_onset_sweep(tmp_path):
    assert run("sweep", "--config", SCENARIOS / "heat_onset.json", "--out", tmp_path) == 0
    rows = read_sweep(tmp_path / "sweep.csv")
    assert len(rows) == 10
    assert max(float(r["error"]) for r in rows) < 1e-6
    summary = json.loads((tmp_path / "sweep.json").read_text())
    cli.validate(summary, "sweep")
    assert (tmp_path / "sweep.svg").read_text().startswith("<svg")


def test_empty_sweep_axis(tmp_path):
    cfg = scenario("heat_onset")
    cfg["sweep"]["t0s"] = []
    assert run("sweep", "--config", write_config(tmp_path, cfg), "--out", tmp_path / "sw") == 2


# ---------------------------------------------------------------------------
# determinism and schemas
# ---------------------------------------------------------------------------


@pytest.mark.parametrize("command", ["simulate", "sweep"])
def test_outputs_byte_identical(tmp_path, command):
    cfg = SCENARIOS / "heat_onset.json"
    for k in (1, 2):
        assert run(command, "--config", cfg, "--out", tmp_path / str(k), "--seed", 5) == 0
    names = sorted(p.name for p in (tmp_path / "1").iterdir())
    assert names == sorted(p.name for p in (tmp_path / "2").iterdir())
    for name in names:
        assert (tmp_path / "1" / name).read_bytes() == (tmp_path / "2" / name).read_bytes()


def test_seed_changes_noisy_record(tmp_path):
    cfg = scenario("wave_trace")
    cfg["noise"] = {"delta": 1e-3, "seed": 0}
    path = write_config(tmp_path, cfg)
    run("simulate", "--config", path, "--out", tmp_path / "a", "--seed", 1)
    run("simulate", "--config", path, "--out", tmp_path / "b", "--seed", 2)
    assert (tmp_path / "a" / "record.csv").read_text() != (tmp_path / "b" / "record.csv").read_text()


def test_json_outputs_use_sorted_keys(tmp_path):
    run("simulate", "--config", SCENARIOS / "wave_state.json", "--out", tmp_path)
    text = (tmp_path / "summary.json").read_text()
    assert text == json.dumps(json.loads(text), sort_keys=True, indent=2, ensure_ascii=False) + "\n"


@pytest.mark.parametrize("name", ["config", "summary", "report", "conditions", "sweep"])
def test_schemas_are_valid(name):
    jsonschema.Draft202012Validator.check_schema(cli.load_schema(name))


@pytest.mark.parametrize("path", sorted(SCENARIOS.glob("*.json")), ids=lambda p: p.stem)
def test_shipped_scenarios_validate(path):
    cli.validate(json.loads(path.read_text()), "config")
