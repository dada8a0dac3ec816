import hashlib
import json
import math

import numpy as np
import pytest

from aoiipoll import config as cfgmod
from aoiipoll.channel import LinkModel
from aoiipoll.cli import main
from aoiipoll.engine import SimConfig
from aoiipoll.suites import ExperimentSuite, SUITES, get_suite, run_suite, write_suite
from aoiipoll.whittle import WhittleConfig
from aoiipoll.world import CategorySpec, ScenarioSpec, TraceSpec, ValidationError


def digest(path):
    return hashlib.sha256(path.read_bytes()).hexdigest()


@pytest.mark.parametrize("cfg", [
    SimConfig(),
    SimConfig(M=3, horizon=500, seed=9, policy="fwaoii", whittle=WhittleConfig(penalty=0.25, eta=100.0),
              link=LinkModel(pdr=(0.5, 0.9), r_max=2), policy_params={"alpha_power": 0.7}),
    SimConfig(scenario=ScenarioSpec((CategorySpec(1.0, 40.0, 0.2, 3, 10.0, "X"),), 300, name="mine")),
    SimConfig(trace=TraceSpec("lab.txt", nodes=(1, 2)), scenario=None),
])
def test_config_round_trip(cfg, tmp_path):
    path = tmp_path / "c.yaml"
    cfgmod.dump(cfg, path)
    back = cfgmod.load(path)
    assert back == cfg
    assert cfgmod.config_hash(back) == cfgmod.config_hash(cfg)


def test_infinite_window_serialised_as_text():
    assert cfgmod.to_dict(SimConfig())["whittle"]["eta"] == "inf"
    assert cfgmod.from_dict({"whittle": {"eta": ".inf"}}).whittle.eta == math.inf


def test_unknown_keys_rejected():
    with pytest.raises(ValidationError, match="engine"):
        cfgmod.from_dict({"engine": {"N": 3}})
    with pytest.raises(ValidationError):
        cfgmod.from_dict({"plotting": {}})


def test_yaml_errors_are_line_anchored(tmp_path):
    p = tmp_path / "bad.yaml"
    p.write_text("engine:\n  M: 2\n  horizon: [1, 2\n")
    with pytest.raises(ValidationError, match=r"bad.yaml:\d+:\d+"):
        cfgmod.load(p)


def test_overrides_win_over_file():
    cfg = cfgmod.apply_overrides(SimConfig(), M=4, penalty=0.1, eta="300", scenario="two", horizon=50)
    assert (cfg.M, cfg.whittle.penalty, cfg.whittle.eta, cfg.scenario, cfg.horizon) == (4, 0.1, 300.0, "two", 50)


def test_cli_run_writes_outputs_and_is_deterministic(tmp_path, capsys):
    args = ["run", "--scenario", "one", "--policy", "waoii", "--m", "2", "--horizon", "800", "--seed", "42"]
    assert main(args + ["--out", str(tmp_path / "a")]) == 0
    assert main(args + ["--out", str(tmp_path / "b")]) == 0
    for name in ("steps.csv", "summary.json"):
        assert digest(tmp_path / "a" / name) == digest(tmp_path / "b" / name)
    summary = json.loads((tmp_path / "a" / "summary.json").read_text())
    assert len(summary["config_hash"]) == 16 and summary["M"] == 2
    assert "RMSE" in capsys.readouterr().out


def test_cli_config_file_and_flags(tmp_path):
    p = tmp_path / "c.yaml"
    p.write_text("engine: {M: 1, horizon: 300}\npolicy: {name: rr}\n")
    assert main(["run", "--config", str(p), "--policy", "aoi", "--out", str(tmp_path / "o")]) == 0
    assert json.loads((tmp_path / "o" / "summary.json").read_text())["policy"] == "aoi"


def test_cli_replications(tmp_path):
    assert main(["run", "--horizon", "300", "--seeds", "1,2", "--out", str(tmp_path)]) == 0
    s = json.loads((tmp_path / "summary.json").read_text())
    assert s["seeds"] == [1, 2] and len(s["per_seed"]) == 2


def test_cli_index_dump(tmp_path):
    assert main(["run", "--horizon", "40", "--verbose-index-dump", "--out", str(tmp_path)]) == 0
    assert (tmp_path / "index.csv").read_text().startswith("t,node,W,c,fairness_flag")


def test_cli_rejects_zero_budget(tmp_path, capsys):
    assert main(["run", "--m", "0", "--out", str(tmp_path)]) != 0
    assert "M must be >= 1" in capsys.readouterr().err


def test_cli_missing_suite_lists_available(capsys):
    assert main(["suite", "table9"]) != 0
    err = capsys.readouterr().err
    assert all(name in err for name in SUITES)


def test_empty_suite_is_a_validation_error():
    with pytest.raises(ValidationError):
        run_suite(ExperimentSuite("empty", [], lambda runs, seeds: []))


def test_suite_layout_and_rr_is_exactly_100(tmp_path):
    suite = get_suite("table2_m_sweep", horizon=300)
    result = run_suite(suite, seeds=[0, 1])
    assert [r["M"] for r in result["rows"]] == [1, 2, 5, 10]
    assert set(result["rows"][0]) == {"M", "waoii_pct_rr", "kf_pct_rr", "aoi_pct_rr", "waoii_rmse", "kf_rmse"}
    runs = result["runs"]
    for M in (1, 2, 5, 10):
        for s in (0, 1):
            rr = runs[(f"rr_M{M}", s)]["total_packets"]
            assert 100.0 * rr / rr == 100.0
    csv_path, json_path = write_suite(result, tmp_path, "abc")
    assert csv_path.name == "suite_table2_m_sweep.csv"
    assert csv_path.read_text().splitlines()[0].startswith("M,waoii_pct_rr_mean,waoii_pct_rr_sd")
    assert json.loads(json_path.read_text())["config_hash"] == "abc"


def test_eta_suite_rows():
    result = run_suite(get_suite("table4_eta_sweep", horizon=300), seeds=[0])
    rows = result["rows"]
    assert [(r["eta"], r["category"]) for r in rows] == [
        (100, "A"), (100, "B"), (300, "A"), (300, "B"), (500, "A"), (500, "B")]
    assert {"polls", "pct", "rmse"} <= set(rows[0])


def test_cli_suite_writes_files(tmp_path):
    assert main(["suite", "fig_scenario3_adaptation", "--horizon", "600", "--seeds", "0",
                 "--out", str(tmp_path)]) == 0
    assert (tmp_path / "suite_fig_scenario3_adaptation.csv").exists()


def test_parallel_suite_matches_serial():
    suite = get_suite("fig9_reward_comparison", horizon=200)
    a = run_suite(suite, seeds=[0, 1], workers=2)["rows"]
    b = run_suite(suite, seeds=[0, 1])["rows"]
    assert a == b
