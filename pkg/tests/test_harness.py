"""Run harness: config parsing, logging, aggregation, and the CLI."""

import numpy as np
import pytest
import yaml

from rmabql import cli, fileio, harness
from rmabql.harness import (
    PARTIAL_MARKER,
    RunConfig,
    SeedRun,
    aggregate_series,
    extrapolate_oracle,
    moving_average,
    read_csv,
    write_seed_csv,
)
from rmabql.oracles import value_iteration


def base_dict(tmp_path, **overrides):
    d = {
        "algorithm": "ql0",
        "domain": {"name": "random", "n_states": 3, "n_actions": 2},
        "n_arms": 4,
        "horizon": 60,
        "seeds": [0, 1],
        "schedule": {"C": 0.2, "D": 20, "epsilon0": 0.99},
        "output_dir": str(tmp_path / "out"),
    }
    d.update(overrides)
    return d


def test_from_dict_fills_defaults(tmp_path):
    cfg = RunConfig.from_dict(base_dict(tmp_path))
    assert cfg.discount == 0.9
    assert cfg.n_lam == 2000  # random domain
    assert cfg.lambda_max is None
    assert cfg.replay_period == 1_000_000
    assert cfg.replays_per_dream == 1000
    assert cfg.replay_capacity is None
    assert cfg.oracle_horizon == 1000
    assert cfg.oracle_settle_window == 500
    assert cfg.wibql_action == 1
    assert cfg.init_state == 0
    assert cfg.maiql_mode == "discounted"
    assert cfg.on_non_indexable == "raise"

    two = RunConfig.from_dict(
        base_dict(tmp_path, domain={"name": "two_process"}, budget=2)
    )
    assert two.n_lam == 3000  # denser default grid for the two-process domain


def test_from_dict_rejects_unknown_keys(tmp_path):
    with pytest.raises(ValueError, match="unknown config"):
        RunConfig.from_dict(base_dict(tmp_path, frobnicate=1))
    with pytest.raises(ValueError, match="unknown schedule"):
        RunConfig.from_dict(
            base_dict(tmp_path, schedule={"C": 0.2, "D": 20, "epsilon0": 0.99, "x": 1})
        )
    with pytest.raises(ValueError, match="unknown replay"):
        RunConfig.from_dict(base_dict(tmp_path, replay={"cadence": 5}))
    with pytest.raises(ValueError, match="unknown lambda_grid"):
        RunConfig.from_dict(base_dict(tmp_path, lambda_grid={"points": 10}))
    with pytest.raises(ValueError, match="unknown oracle"):
        RunConfig.from_dict(base_dict(tmp_path, oracle={"window": 10}))


def test_from_dict_required_keys_and_ranges(tmp_path):
    for key in ("algorithm", "domain", "horizon", "seeds", "output_dir"):
        d = base_dict(tmp_path)
        del d[key]
        with pytest.raises(ValueError, match=f"missing required key {key!r}"):
            RunConfig.from_dict(d)
    with pytest.raises(ValueError, match="unknown algorithm"):
        RunConfig.from_dict(base_dict(tmp_path, algorithm="sarsa"))
    with pytest.raises(ValueError, match="horizon must be >= 1"):
        RunConfig.from_dict(base_dict(tmp_path, horizon=0))
    with pytest.raises(ValueError, match="horizon must be an integer"):
        RunConfig.from_dict(base_dict(tmp_path, horizon=59.5))
    with pytest.raises(ValueError, match="seeds must be non-empty"):
        RunConfig.from_dict(base_dict(tmp_path, seeds=[]))
    d = base_dict(tmp_path)
    del d["n_arms"]
    with pytest.raises(ValueError, match="n_arms is required"):
        RunConfig.from_dict(d)
    with pytest.raises(ValueError, match="budget is required for the two_process"):
        RunConfig.from_dict(base_dict(tmp_path, domain={"name": "two_process"}))
    with pytest.raises(ValueError, match="settle_window must be in"):
        RunConfig.from_dict(
            base_dict(tmp_path, oracle={"horizon": 100, "settle_window": 101})
        )
    with pytest.raises(ValueError, match="settle_window must be in"):
        RunConfig.from_dict(base_dict(tmp_path, oracle={"settle_window": 0}))
    with pytest.raises(ValueError, match="maiql_mode"):
        RunConfig.from_dict(base_dict(tmp_path, maiql_mode="robust"))
    with pytest.raises(ValueError, match="on_non_indexable"):
        RunConfig.from_dict(base_dict(tmp_path, on_non_indexable="ignore"))


def test_to_dict_round_trips(tmp_path):
    d = base_dict(
        tmp_path,
        budget=3,
        discount=0.95,
        replay={"period": 10, "per_dream": 50, "capacity": 500},
        lambda_grid={"n_lam": 11, "lambda_max": 2.5},
        oracle={"horizon": 200, "settle_window": 40},
        init_state=1,
    )
    resolved = RunConfig.from_dict(d).to_dict()
    assert RunConfig.from_dict(resolved).to_dict() == resolved
    # the resolved form pins every default explicitly
    assert resolved["maiql_mode"] == "discounted"
    assert resolved["domain"]["row_sampling"] == "uniform"


def test_moving_average_hand_values():
    out = moving_average([1.0, 2.0, 3.0, 4.0], 2)
    assert np.allclose(out, [1.0, 1.5, 2.5, 3.5])
    # window 1 is the series itself
    assert np.allclose(moving_average([5.0, 1.0, 2.0], 1), [5.0, 1.0, 2.0])
    # a window wider than the series degrades to running means
    out = moving_average([2.0, 4.0, 6.0], 10)
    assert np.allclose(out, [2.0, 3.0, 4.0])
    with pytest.raises(ValueError, match="window"):
        moving_average([1.0], 0)


def test_extrapolate_oracle_hand_values():
    out = extrapolate_oracle([0.0, 1.0, 2.0, 3.0], 2, 6)
    assert out.shape == (6,)
    assert np.allclose(out, 2.5)  # mean of the last two entries
    with pytest.raises(ValueError, match="settle_window must be >= 1"):
        extrapolate_oracle([1.0, 2.0], 0, 5)
    with pytest.raises(ValueError, match="need at least settle_window"):
        extrapolate_oracle([1.0, 2.0], 3, 5)


def test_aggregate_series_hand_values():
    stacked = np.array([[1.0, 3.0], [3.0, 5.0], [5.0, 7.0]])
    mean, p25, p75 = aggregate_series(stacked)
    assert np.allclose(mean, [3.0, 5.0])
    assert np.allclose(p25, [2.0, 4.0])
    assert np.allclose(p75, [4.0, 6.0])
    with pytest.raises(ValueError, match="n_seeds"):
        aggregate_series(np.array([1.0, 2.0]))


def test_seed_csv_round_trip(tmp_path):
    run = SeedRun(
        seed=7,
        t=np.arange(1, 4),
        instant_reward=np.array([0.25, 1.0, 0.125]),
        cumulative_reward=np.array([0.25, 1.25, 1.375]),
        mean_cumulative_reward=np.array([0.25, 0.625, 1.375 / 3]),
        epsilon=np.array([0.99, 0.99, 0.495]),
        lambda_index=np.array([-1, 3, 0]),
    )
    path = tmp_path / "one.csv"
    write_seed_csv(path, "abc123", run)
    config_hash, cols = read_csv(path)
    assert config_hash == "abc123"
    assert list(cols) == harness.SEED_CSV_HEADER.split(",")
    assert np.array_equal(cols["seed"], [7.0, 7.0, 7.0])
    assert np.array_equal(cols["t"], [1.0, 2.0, 3.0])
    # floats are written with repr, so the round trip is exact
    assert np.array_equal(cols["instant_reward"], run.instant_reward)
    assert np.array_equal(cols["mean_cumulative_reward"], run.mean_cumulative_reward)
    assert np.array_equal(cols["lambda_index"], [-1.0, 3.0, 0.0])


def test_read_csv_without_hash_line(tmp_path):
    path = tmp_path / "bare.csv"
    path.write_text("a,b\n1,2\n3,4\n", encoding="utf-8")
    config_hash, cols = read_csv(path)
    assert config_hash is None
    assert np.array_equal(cols["a"], [1.0, 3.0])
    assert np.array_equal(cols["b"], [2.0, 4.0])


def test_run_writes_seed_and_aggregate_files(tmp_path):
    cfg = RunConfig.from_dict(base_dict(tmp_path))
    result = harness.run(cfg)
    outdir = tmp_path / "out"
    assert result.seed_paths == [
        str(outdir / "ql0_seed0.csv"),
        str(outdir / "ql0_seed1.csv"),
    ]
    assert result.aggregate_path == str(outdir / "ql0_aggregate.csv")

    per_seed = []
    for path in result.seed_paths:
        config_hash, cols = read_csv(path)
        assert config_hash == result.config_hash
        assert len(cols["t"]) == 60
        assert np.array_equal(cols["cumulative_reward"], np.cumsum(cols["instant_reward"]))
        assert np.allclose(
            cols["mean_cumulative_reward"], cols["cumulative_reward"] / cols["t"]
        )
        # epsilon follows the configured decay: min(1, 0.99 / ceil(t / 20))
        expected = np.minimum(1.0, 0.99 / np.ceil(cols["t"] / 20.0))
        assert np.allclose(cols["epsilon"], expected)
        # no penalty-grid tracking outside the grid-based learner
        assert np.all(cols["lambda_index"] == -1.0)
        per_seed.append(cols["mean_cumulative_reward"])

    config_hash, agg = read_csv(result.aggregate_path)
    assert config_hash == result.config_hash
    assert np.array_equal(agg["t"], np.arange(1.0, 61.0))
    assert np.all(agg["n_seeds"] == 2.0)
    mean, p25, p75 = aggregate_series(np.vstack(per_seed))
    assert np.array_equal(agg["mean"], mean)
    assert np.array_equal(agg["p25"], p25)
    assert np.array_equal(agg["p75"], p75)


def test_run_is_deterministic_per_seed(tmp_path):
    first = harness.run(RunConfig.from_dict(base_dict(tmp_path / "a")))
    second = harness.run(RunConfig.from_dict(base_dict(tmp_path / "b")))
    for p1, p2 in zip(first.seed_paths, second.seed_paths):
        with open(p1, "rb") as f1, open(p2, "rb") as f2:
            assert f1.read() == f2.read()


def test_oracle_run_extrapolates_flat(tmp_path):
    cfg = RunConfig.from_dict(
        base_dict(
            tmp_path,
            algorithm="oracle_lambda0",
            horizon=100,
            oracle={"horizon": 40, "settle_window": 10},
            schedule=None,
        )
    )
    result = harness.run(cfg)
    levels = []
    for path in result.seed_paths:
        _, cols = read_csv(path)
        assert len(cols["t"]) == 40  # oracles log their own shorter horizon
        levels.append(cols["instant_reward"][-10:].mean())
    _, agg = read_csv(result.aggregate_path)
    assert len(agg["t"]) == 100  # ...but aggregate onto the learners' grid
    assert np.allclose(agg["mean"], np.mean(levels))
    assert np.ptp(agg["mean"]) == 0.0


def test_grid_learner_logs_lambda_index(tmp_path):
    cfg = RunConfig.from_dict(
        base_dict(
            tmp_path,
            algorithm="lpql",
            seeds=[0],
            schedule={"C": 0.4, "D": 20, "epsilon0": 0.99},
            lambda_grid={"n_lam": 25},
        )
    )
    result = harness.run(cfg)
    _, cols = read_csv(result.seed_paths[0])
    lam = cols["lambda_index"]
    assert np.all(lam >= -1.0)
    assert np.all(lam < 25.0)
    assert np.any(lam >= 0.0)  # greedy rounds record the chosen grid point
    assert np.any(lam == -1.0)  # exploration rounds record none


def test_crash_leaves_partial_marker(tmp_path):
    cfg = RunConfig.from_dict(base_dict(tmp_path, init_state=7))
    with pytest.raises(RuntimeError, match="partial-results marker"):
        harness.run(cfg)
    marker = tmp_path / "out" / PARTIAL_MARKER
    text = marker.read_text(encoding="utf-8")
    assert "seed 0 crashed" in text
    assert "completed seeds: []" in text
    assert not (tmp_path / "out" / "ql0_aggregate.csv").exists()


def _write_config(tmp_path, d):
    path = tmp_path / "run.yaml"
    path.write_text(yaml.safe_dump(d), encoding="utf-8")
    return str(path)


def test_cli_gen_writes_loadable_instance(tmp_path):
    cfg_path = _write_config(tmp_path, base_dict(tmp_path))
    out = tmp_path / "instance.yaml"
    assert cli.main(["gen", "--config", cfg_path, "--out", str(out)]) == 0
    instance = fileio.load_instance(out)
    assert instance.n_arms == 4
    assert instance.arms[0].n_states == 3

    # the same seed through the library gives the same instance
    cfg = harness.load_run_config(cfg_path)
    direct = harness.sample_instance(cfg, 0, harness.prepare_domain(cfg))
    assert np.array_equal(direct.arms[0].transitions, instance.arms[0].transitions)


def test_cli_run_then_aggregate_reproduces_file(tmp_path):
    cfg_path = _write_config(tmp_path, base_dict(tmp_path))
    assert cli.main(["run", "--config", cfg_path]) == 0
    outdir = tmp_path / "out"
    redo = tmp_path / "redo.csv"
    assert (
        cli.main(
            [
                "aggregate",
                "--inputs",
                str(outdir / "ql0_seed0.csv"),
                str(outdir / "ql0_seed1.csv"),
                "--out",
                str(redo),
            ]
        )
        == 0
    )
    assert redo.read_bytes() == (outdir / "ql0_aggregate.csv").read_bytes()


def test_cli_aggregate_extrapolates_oracles(tmp_path):
    d = base_dict(
        tmp_path,
        algorithm="oracle_lambda0",
        horizon=80,
        oracle={"horizon": 40, "settle_window": 10},
        schedule=None,
    )
    cfg_path = _write_config(tmp_path, d)
    assert cli.main(["run", "--config", cfg_path]) == 0
    outdir = tmp_path / "out"
    redo = tmp_path / "redo.csv"
    assert (
        cli.main(
            [
                "aggregate",
                "--inputs",
                str(outdir / "oracle_lambda0_seed0.csv"),
                str(outdir / "oracle_lambda0_seed1.csv"),
                "--out",
                str(redo),
                "--extrapolate-to",
                "80",
                "--settle-window",
                "10",
            ]
        )
        == 0
    )
    assert redo.read_bytes() == (outdir / "oracle_lambda0_aggregate.csv").read_bytes()


def test_cli_aggregate_rejects_mixed_configs(tmp_path, capsys):
    a = _write_config(tmp_path, base_dict(tmp_path / "a"))
    b_dict = base_dict(tmp_path / "b", horizon=61)
    b = tmp_path / "other.yaml"
    b.write_text(yaml.safe_dump(b_dict), encoding="utf-8")
    assert cli.main(["run", "--config", a]) == 0
    assert cli.main(["run", "--config", str(b)]) == 0
    code = cli.main(
        [
            "aggregate",
            "--inputs",
            str(tmp_path / "a" / "out" / "ql0_seed0.csv"),
            str(tmp_path / "b" / "out" / "ql0_seed1.csv"),
            "--out",
            str(tmp_path / "mixed.csv"),
        ]
    )
    assert code == 1
    assert "different config" in capsys.readouterr().err


def test_cli_oracle_exports_exact_tables(tmp_path):
    cfg_path = _write_config(tmp_path, base_dict(tmp_path, seeds=[3]))
    outdir = tmp_path / "oracle"
    assert (
        cli.main(
            [
                "oracle",
                "--config",
                cfg_path,
                "--out",
                str(outdir),
                "--lambdas",
                "0.0,0.5",
            ]
        )
        == 0
    )
    _, tables = read_csv(outdir / "oracle_tables.csv")
    _, indexes = read_csv(outdir / "oracle_indexes.csv")
    cfg = harness.load_run_config(cfg_path)
    instance = harness.sample_instance(cfg, 3, harness.prepare_domain(cfg))
    # 4 arms x 3 states x 2 actions x 2 penalty values
    assert len(tables["q"]) == 48
    assert len(indexes["index"]) == 12
    q = value_iteration(instance.arms[0], 0.5, cfg.discount)
    mask = (
        (tables["arm"] == 0.0)
        & (tables["state"] == 1.0)
        & (tables["action"] == 1.0)
        & (tables["lambda"] == 0.5)
    )
    assert tables["q"][mask][0] == pytest.approx(q[1, 1], abs=1e-12)


def test_cli_reports_errors_as_exit_code(tmp_path, capsys):
    assert cli.main(["run", "--config", str(tmp_path / "missing.yaml")]) == 1
    assert "error:" in capsys.readouterr().err
