import csv
import json
import math
from pathlib import Path

import numpy as np
import pytest

from prola.environments import write_matrix_csv
from prola.errors import ParseError, ValidationError
from prola.runner.cli import EXIT_CONFIG, EXIT_OK, EXIT_USAGE, cli_main
from prola.runner.config import load_config, parse_config, read_config, shipped_configs
from prola.runner.experiment import run_experiment, simulate_replication
from prola.runner.outputs import write_outputs

MINIMAL = """\
name: minimal
K: 10
T: 600
replications: 1
base_seed: 7
environment:
  kind: bernoulli
  preset: paper-k10
"""


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


class TestConfig:
    def test_minimal_defaults(self):
        config = load_config(MINIMAL)
        assert config.gamma == math.sqrt(10 * math.log(10) / 600)
        assert config.eta == config.gamma / 18
        assert config.policy == "prola"
        assert {"gamma", "eta", "policy", "snapshot_every", "output_dir"} <= set(config.defaults_applied)

    def test_eta_above_bound(self):
        with pytest.raises(ValidationError, match="η ≤ γ/\\(2\\(K−1\\)\\)"):
            load_config(MINIMAL + "gamma: 0.1\neta: 0.006\n")

    def test_round_trip(self):
        config = load_config(MINIMAL)
        again = load_config(config.dump())
        assert again == config
        assert again.dump() == config.dump()

    def test_unknown_key(self):
        with pytest.raises(ValidationError, match="unknown key"):
            load_config(MINIMAL + "horizon: 5\n")

    def test_unknown_environment_key(self):
        text = MINIMAL.replace("  preset: paper-k10", "  preset: paper-k10\n  seed: 3")
        with pytest.raises(ValidationError, match="environment"):
            load_config(text)

    def test_parse_error_has_line(self):
        with pytest.raises(ParseError, match=r"line \d+, column \d+"):
            load_config("name: x\nK: 10\nT: [1, 2\n")

    @pytest.mark.parametrize("patch, message", [
        ({"K": 1}, "K"),
        ({"T": 0}, "T"),
        ({"replications": 0}, "replications"),
        ({"base_seed": -1}, "base_seed"),
        ({"policy": "greedy"}, "policy"),
        ({"K": 20}, "K=10"),
        ({"gamma": 1.5}, "gamma"),
        ({"environment": {"kind": "bernoulli", "probs": [0.5, 0.5]}}, "arms"),
        ({"environment": {"kind": "bernoulli"}}, "exactly one"),
        ({"environment": {"kind": "bernoulli", "preset": "nope"}}, "nope"),
        ({"environment": {"kind": "poisson"}}, "kind"),
    ])
    def test_validation(self, patch, message):
        raw = {"name": "v", "K": 10, "T": 100,
               "environment": {"kind": "bernoulli", "preset": "paper-k10"}}
        raw.update(patch)
        with pytest.raises(ValidationError, match=message):
            parse_config(raw)

    def test_missing_required(self):
        with pytest.raises(ValidationError, match="environment"):
            parse_config({"name": "x", "K": 3, "T": 10})

    def test_schedule_segments(self):
        config = parse_config({"name": "s", "K": 2, "T": 10, "environment": {
            "kind": "schedule", "segments": [{"start": 1, "probs": [0.0, 1.0]},
                                             {"start": 6, "probs": [1.0, 0.0]}]}})
        trace = simulate_replication(config, 0)
        assert trace.reward_matrix.tolist() == [[0, 1]] * 5 + [[1, 0]] * 5

    def test_fixed_relative_path(self, tmp_path):
        write_matrix_csv([[1, 0], [0, 1], [1, 1]], tmp_path / "m.csv")
        config = load_config("name: f\nK: 2\nT: 3\nenvironment:\n  kind: fixed\n  path: m.csv\n",
                             base_dir=tmp_path)
        assert Path(config.environment.path) == tmp_path / "m.csv"
        with pytest.raises(ValidationError, match="rows"):
            load_config("name: f\nK: 2\nT: 4\nenvironment:\n  kind: fixed\n  path: m.csv\n",
                        base_dir=tmp_path)

    def test_with_overrides_rederives_defaults(self):
        config = read_config("regret-sweep")
        k30 = config.with_overrides(K=30)
        assert k30.K == 30
        assert k30.gamma == math.sqrt(30 * math.log(30) / config.T)
        assert k30.eta == k30.gamma / 58

    def test_shipped_configs_valid(self):
        assert {"paper-k10", "convergence-k10", "regret-sweep", "switch-k10", "uniform-k10"} <= set(shipped_configs())
        for name in shipped_configs():
            read_config(name)


def fixed_config(tmp_path, policy, matrix, R=2):
    write_matrix_csv(matrix, tmp_path / "m.csv")
    T, K = np.shape(matrix)
    return parse_config({"name": "fx", "K": K, "T": T, "policy": policy, "replications": R,
                         "snapshot_every": 1, "output_dir": str(tmp_path / "out"),
                         "environment": {"kind": "fixed", "path": str(tmp_path / "m.csv")}})


class TestExperiment:
    def test_oracle_zero_regret(self, tmp_path):
        matrix = np.zeros((50, 4), dtype=int)
        matrix[:, 2] = 1
        matrix[::3, 0] = 1
        result = run_experiment(fixed_config(tmp_path, "oracle-best-fixed", matrix))
        assert result.mean_regret == 0
        assert all(r.report.best_arm == 2 for r in result.replications)

    def test_uniform_baseline_frequencies_flat(self, tmp_path):
        result = run_experiment(fixed_config(tmp_path, "uniform-random", np.zeros((2000, 4), int), R=1))
        np.testing.assert_allclose(result.mean_frequency, 0.25, atol=0.04)
        np.testing.assert_allclose(result.mean_trajectory, 0.25)

    def test_paper_raster_trace(self):
        config = read_config("paper-k10")
        result = run_experiment(config)
        trace = result.replications[0].trace
        assert len(trace.records) == 600
        assert all(0 <= r.played < 10 and r.played != r.observed for r in trace.records)
        assert result.replications[0].seed == config.base_seed

    def test_parallel_matches_serial(self):
        config = read_config("convergence-k10").with_overrides(T=300, replications=4)
        a, b = run_experiment(config, jobs=1), run_experiment(config, jobs=2)
        assert [r.report for r in a.replications] == [r.report for r in b.replications]
        np.testing.assert_array_equal(a.mean_trajectory, b.mean_trajectory)

    def test_replication_streams_differ(self):
        config = read_config("convergence-k10").with_overrides(T=200, replications=3)
        traces = [simulate_replication(config, r) for r in range(3)]
        assert not np.array_equal(traces[0].reward_matrix, traces[1].reward_matrix)

    def test_policy_params_do_not_change_rewards(self):
        config = read_config("paper-k10")
        a = simulate_replication(config, 0)
        b = simulate_replication(config.with_overrides(gamma=0.4, eta=0.4 / 18), 0)
        np.testing.assert_array_equal(a.reward_matrix, b.reward_matrix)
        assert a.played.tolist() != b.played.tolist()

    def test_aggregate_recomputes_from_rows(self):
        config = read_config("convergence-k10").with_overrides(T=500, replications=5)
        result = run_experiment(config)
        regrets = [r.report.weak_regret for r in result.replications]
        assert result.mean_regret == pytest.approx(sum(regrets) / 5, rel=1e-12)
        assert result.std_regret == pytest.approx(np.std(regrets, ddof=1), rel=1e-12)


class TestOutputs:
    def test_single_replication_files(self, tmp_path):
        config = read_config("paper-k10")
        result = run_experiment(config)
        written = {p.name for p in write_outputs(result, config, tmp_path)}
        assert {"runs.csv", "trajectory.csv", "frequency.csv", "violations.csv", "metadata.json",
                "plays.csv", "regret.csv", "regret.svg", "bi_probability.svg", "plays.svg",
                "violations.svg"} <= written
        assert not list(tmp_path.glob("*.tmp"))

        runs = read_csv(tmp_path / "runs.csv")
        rep = result.replications[0].report
        assert runs == [{"replication": "0", "seed": str(config.base_seed), "g_max": str(rep.g_max),
                         "g_policy": str(rep.g_policy), "weak_regret": str(rep.weak_regret),
                         "best_arm": str(rep.best_arm + 1)}]
        assert rep.best_arm + 1 == 6

        violations = read_csv(tmp_path / "violations.csv")
        assert len(violations) == 600 * 10
        matrix = np.zeros((600, 10), dtype=int)
        for row in violations:
            matrix[int(row["round"]) - 1, int(row["arm"]) - 1] = int(row["reward"])
        np.testing.assert_array_equal(matrix, result.replications[0].trace.reward_matrix)

        traj = read_csv(tmp_path / "trajectory.csv")
        assert len(traj) == 600 * 10
        assert {int(r["arm"]) for r in traj} == set(range(1, 11))
        freq = read_csv(tmp_path / "frequency.csv")
        assert math.fsum(float(r["frequency"]) for r in freq) == pytest.approx(1.0, abs=1e-12)

        plays = read_csv(tmp_path / "plays.csv")
        assert [int(p["played"]) for p in plays] == [r.played + 1 for r in result.replications[0].trace.records]

        meta = json.loads((tmp_path / "metadata.json").read_text())
        assert meta["resolved"]["gamma"] == config.gamma
        assert meta["resolved"]["eta"] == config.eta
        assert set(meta["config"]) == {"name", "K", "T", "gamma", "eta", "environment", "policy",
                                       "replications", "base_seed", "snapshot_every", "output_dir"}
        for name in written:
            assert b"\r\n" not in (tmp_path / name).read_bytes()
        assert (tmp_path / "plays.svg").read_text().startswith("<svg")

    def test_multi_replication_skips_rasters(self, tmp_path):
        config = read_config("convergence-k10").with_overrides(T=200, replications=3)
        written = {p.name for p in write_outputs(run_experiment(config), config, tmp_path)}
        assert "violations.csv" not in written and "plays.svg" not in written
        assert len(read_csv(tmp_path / "runs.csv")) == 3

    def test_metadata_recreates_config(self, tmp_path):
        config = read_config("paper-k10")
        write_outputs(run_experiment(config), config, tmp_path)
        meta = json.loads((tmp_path / "metadata.json").read_text())
        assert parse_config(meta["config"]) == config


class TestCli:
    def test_validate_shipped(self, capsys):
        assert cli_main(["validate", "--config", "paper-k10"]) == EXIT_OK
        assert "gamma:" in capsys.readouterr().out

    def test_run_missing_config(self, capsys):
        assert cli_main(["run"]) == EXIT_USAGE
        assert "usage:" in capsys.readouterr().err

    def test_run_nonexistent_config(self, capsys, tmp_path):
        assert cli_main(["run", "--config", str(tmp_path / "nope.yaml")]) == EXIT_USAGE
        assert "usage:" in capsys.readouterr().err

    def test_invalid_config_exit_code(self, tmp_path, capsys):
        path = tmp_path / "bad.yaml"
        path.write_text(MINIMAL + "gamma: 0.1\neta: 0.5\n")
        assert cli_main(["validate", "--config", str(path)]) == EXIT_CONFIG
        assert "η ≤ γ/(2(K−1))" in capsys.readouterr().err

    def test_presets_list(self, capsys):
        assert cli_main(["presets", "list"]) == EXIT_OK
        out = capsys.readouterr().out
        assert "paper-k10" in out and "paper-switch" in out

    def test_run_and_out_override(self, tmp_path, monkeypatch):
        monkeypatch.setenv("PROLA_OUT_DIR", str(tmp_path / "env"))
        assert cli_main(["run", "--config", "paper-k10"]) == EXIT_OK
        assert (tmp_path / "env" / "runs.csv").exists()
        assert cli_main(["run", "--config", "paper-k10", "--out", str(tmp_path / "flag"), "--seed", "5"]) == EXIT_OK
        rows = read_csv(tmp_path / "flag" / "runs.csv")
        assert rows[0]["seed"] == "5"

    def test_sweep_layout(self, tmp_path):
        path = tmp_path / "sweep.yaml"
        path.write_text("name: sw\nK: 10\nT: 300\nreplications: 3\nbase_seed: 1\n"
                        "environment:\n  kind: bernoulli\n  preset: paper\n")
        assert cli_main(["sweep", "--config", str(path), "--k", "10,20,30", "--out", str(tmp_path / "o")]) == EXIT_OK
        for k in (10, 20, 30):
            assert (tmp_path / "o" / f"k{k}" / "runs.csv").exists()
        summary = read_csv(tmp_path / "o" / "summary.csv")
        assert [int(r["K"]) for r in summary] == [10, 20, 30]
        # independent recomputation of the bars from each runs.csv
        for row in summary:
            runs = read_csv(tmp_path / "o" / f"k{row['K']}" / "runs.csv")
            regrets = [int(r["weak_regret"]) for r in runs]
            assert float(row["mean_weak_regret"]) == pytest.approx(sum(regrets) / len(regrets), rel=1e-12)
        svg = (tmp_path / "o" / "regret_vs_k.svg").read_text()
        assert svg.count('fill="#1f77b4"') == 3

    def test_bad_k_list(self):
        assert cli_main(["sweep", "--config", "regret-sweep", "--k", "10,x"]) == EXIT_USAGE


def test_aggregation_independent_of_completion_order():
    import random

    from prola.runner.experiment import _run_one, aggregate, map_replications
    from prola.runner.outputs import render_outputs

    config = read_config("convergence-k10").with_overrides(T=300, replications=6)
    results = map_replications(_run_one, config)
    shuffled = results[:]
    random.Random(3).shuffle(shuffled)
    assert render_outputs(aggregate(config, shuffled)) == render_outputs(aggregate(config, results))
