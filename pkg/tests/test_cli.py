import json

import pytest

from smithian.cli import main, parse_plan_text, policy_key
from smithian.experiment import ExperimentPlan

SMALL = ["--override", "trials_per_cell=8", "--override", "bootstrap_resamples=200"]


@pytest.fixture(scope="module")
def run_dir(tmp_path_factory):
    out = tmp_path_factory.mktemp("run")
    assert main(["run", "--out", str(out), "-q", *SMALL]) == 0
    return out


def test_run_writes_artifacts(run_dir):
    for name in ("trials.csv", "stats.json", "figure2.csv", "manifest.json"):
        assert (run_dir / name).exists(), name
    manifest = json.loads((run_dir / "manifest.json").read_text())
    assert manifest["plan"]["trials_per_cell"] == 8
    assert manifest["plan"]["alpha"] == 5.0  # defaults are materialized
    assert set(manifest["plan"]) == set(ExperimentPlan().to_dict())
    assert len((run_dir / "trials.csv").read_text().splitlines()) == 1 + 3 * 5 * 8
    assert len(list((run_dir / "policies").glob("pbvi-v1-*.npz"))) == 5


def test_stats_reproduces_report(run_dir):
    before = (run_dir / "stats.json").read_bytes()
    (run_dir / "stats.json").unlink()
    assert main(["stats", "--out", str(run_dir), "-q"]) == 0
    assert (run_dir / "stats.json").read_bytes() == before


def test_plot_data(run_dir):
    before = (run_dir / "figure2.csv").read_bytes()
    assert main(["plot-data", "--out", str(run_dir), "-q"]) == 0
    assert (run_dir / "figure2.csv").read_bytes() == before
    assert before.decode().splitlines()[0] == "cost,condition,mean_reward,ci_low,ci_high,upper_bound"


def test_rerun_from_manifest_is_byte_identical(run_dir, tmp_path):
    assert main(["run", "--plan", str(run_dir / "manifest.json"), "--out", str(tmp_path), "-q"]) == 0
    for name in ("trials.csv", "stats.json", "figure2.csv"):
        assert (tmp_path / name).read_bytes() == (run_dir / name).read_bytes(), name


def test_trace_command(run_dir, capsys):
    code = main(["trace", "--condition", "pragmatic", "--cost", "-5", "--seed", "7", "--out", str(run_dir)])
    assert code == 0
    lines = (run_dir / "trace.csv").read_text().splitlines()
    header = lines[0].split(",")
    for col in ("step", "stench", "svi_point", "svi_no_point", "signal", "belief_before", "belief_after"):
        assert col in header
    assert len(lines) > 1
    assert json.loads((run_dir / "trace_manifest.json").read_text())["seed"] == 7
    # the run's manifest is left alone
    assert json.loads((run_dir / "manifest.json").read_text())["command"] == "run"


def test_run_with_trace(tmp_path):
    args = ["run", "--out", str(tmp_path), "-q", "--trace", "--override", "trials_per_cell=2",
            "--override", "costs=[-3]", "--override", "bootstrap_resamples=50"]
    assert main(args) == 0
    rows = (tmp_path / "steps.csv").read_text().splitlines()
    assert rows[0].startswith("condition,moving_cost,seed,step,")
    assert len(rows) > 6


def test_unknown_override_key(tmp_path, capsys):
    assert main(["run", "--out", str(tmp_path), "--override", "alhpa=3"]) == 1
    err = capsys.readouterr().err
    assert "alhpa" in err and "master_seed" in err


def test_bad_flag_is_usage_error(capsys):
    assert main(["run", "--bogus"]) == 1
    assert "usage" in capsys.readouterr().err
    assert main([]) == 1


def test_missing_trials_is_runtime_error(tmp_path, capsys):
    assert main(["stats", "--out", str(tmp_path), "--trials", str(tmp_path / "nope.csv")]) == 2
    assert "nope.csv" in capsys.readouterr().err


def test_empty_plan_stats_refused(tmp_path):
    assert main(["run", "--out", str(tmp_path), "-q", "--override", "trials_per_cell=0"]) == 0
    assert not (tmp_path / "stats.json").exists()
    assert main(["stats", "--out", str(tmp_path), "-q"]) == 1


def test_seed_flag_sets_master_seed(tmp_path):
    assert main(["run", "--out", str(tmp_path), "-q", "--seed", "11", "--override", "trials_per_cell=1",
                 "--override", "costs=[-9]", "--override", "bootstrap_resamples=10"]) == 0
    assert json.loads((tmp_path / "manifest.json").read_text())["plan"]["master_seed"] == 11


def test_env_out_dir(tmp_path, monkeypatch):
    monkeypatch.setenv("SMITHIAN_OUT_DIR", str(tmp_path / "env"))
    assert main(["solve", "-q", "--override", "costs=[-7]"]) == 0
    assert (tmp_path / "env" / "manifest.json").exists()


def test_parse_plan_text_forms():
    assert parse_plan_text('{"alpha": 2}') == {"alpha": 2}
    assert parse_plan_text('{"plan": {"alpha": 2}, "command": "run"}') == {"alpha": 2}
    text = "# comment\nalpha = 20\ncosts = [-1, -9]\ncontinuation = rollout\n"
    assert parse_plan_text(text) == {"alpha": 20, "costs": [-1, -9], "continuation": "rollout"}


def test_policy_key_ignores_non_solver_keys():
    a, b = ExperimentPlan(), ExperimentPlan(alpha=20.0, master_seed=5)
    assert policy_key(a, -5.0) == policy_key(b, -5.0)
    assert policy_key(a, -5.0) != policy_key(a, -3.0)
    assert policy_key(a, -5.0) != policy_key(ExperimentPlan(belief_points=32), -5.0)
