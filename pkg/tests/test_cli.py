import json

import pytest

from socialcoop.experiments import cli, runner

CONFIG = {
    "experiment_id": "clitest",
    "master_seed": 13,
    "game": {"family": "coordpref", "n_actions": 2, "off_peak": 0.6, "horizon": 16},
    "population": {"name": "handshake", "members": [{"kind": "handshake"}]},
    "type_distribution": "uniform",
    "k_list": [10, 30],
    "t_tilde_list": [2],
    "seeds": [0],
    "eval_episodes": 20,
    "certification": {"consistency_horizon": 200, "compatibility_horizon": 16, "trials": 30},
}


@pytest.fixture()
def config_path(tmp_path):
    path = tmp_path / "config.json"
    path.write_text(json.dumps(CONFIG))
    return str(path)


def run_cli(*argv):
    return cli.main(list(argv))


def test_missing_config_is_a_config_error(capsys):
    assert run_cli("--config", "/does/not/exist.json", "certify") == 2
    assert "config error" in capsys.readouterr().err


def test_malformed_config_is_a_config_error(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text('{"experiment_id": "x"}')  # no game section
    assert run_cli("--config", str(bad), "certify") == 2


def test_unknown_member_kind_is_a_config_error(tmp_path):
    raw = dict(CONFIG, population={"members": [{"kind": "wizard"}]})
    path = tmp_path / "c.json"
    path.write_text(json.dumps(raw))
    assert run_cli("--config", str(path), "dataset", "--k", "3") == 2


def test_equilibria_report(config_path, capsys):
    assert run_cli("--config", config_path, "equilibria", "--theta1", "0", "--theta2", "1") == 0
    report = json.loads(capsys.readouterr().out)
    payoffs = sorted(
        (round(e["payoff1"], 6), round(e["payoff2"], 6))
        for e in report["nash_equilibria"]
    )
    assert payoffs == [(0.375, 0.375), (0.6, 1.0), (1.0, 0.6)]
    assert len(report["pareto_optimal"]) == 2


def test_dataset_command_writes_header_and_rows(config_path, tmp_path, capsys):
    out = tmp_path / "out"
    assert run_cli("--config", config_path, "--out", str(out), "dataset", "--k", "12") == 0
    message = capsys.readouterr().out
    assert "K=12" in message and "sha256=" in message
    lines = (out / "clitest-dataset.jsonl").read_text().splitlines()
    assert len(lines) == 13
    assert "meta" in json.loads(lines[0])


def test_dataset_rerun_is_byte_identical(config_path, tmp_path, capsys):
    out1, out2 = tmp_path / "a", tmp_path / "b"
    run_cli("--config", config_path, "--out", str(out1), "dataset")
    run_cli("--config", config_path, "--out", str(out2), "dataset")
    assert (out1 / "clitest-dataset.jsonl").read_bytes() == (
        out2 / "clitest-dataset.jsonl"
    ).read_bytes()


def test_run_ic_csv_header_and_reproducibility(config_path, tmp_path, capsys):
    out1, out2 = tmp_path / "a", tmp_path / "b"
    assert run_cli("--config", config_path, "--out", str(out1), "run-ic") == 0
    assert run_cli("--config", config_path, "--out", str(out2), "run-ic") == 0
    csv1 = (out1 / "clitest-ic.csv").read_text()
    assert csv1.splitlines()[0] == ",".join(runner.RESULT_COLUMNS)
    assert len(csv1.splitlines()) == 3  # header + two K cells
    assert csv1 == (out2 / "clitest-ic.csv").read_text()
    # The K sweep also renders plots with manifests.
    assert (out1 / "clitest-ic-tv.svg").exists()
    manifest = json.loads((out1 / "clitest-ic-tv.manifest.json").read_text())
    assert manifest["axes"]["x"] == "K (episodes)"


def test_run_ic_with_external_dataset_too_small(config_path, tmp_path, capsys):
    out = tmp_path / "out"
    run_cli("--config", config_path, "--out", str(out), "dataset", "--k", "5")
    code = run_cli(
        "--config", config_path, "--out", str(out), "run-ic",
        "--dataset", str(out / "clitest-dataset.jsonl"),
    )
    assert code == 2  # K list requests 30 episodes but the file has 5


def test_certify_writes_report(config_path, tmp_path, capsys):
    out = tmp_path / "out"
    assert run_cli("--config", config_path, "--out", str(out), "certify") == 0
    report = json.loads((out / "clitest-certification.json").read_text())
    assert report["property"] == "si_class"
    assert set(report) >= {"delta_upper_bound", "epsilon_measured", "passed"}


def test_json_format_output(config_path, tmp_path):
    out = tmp_path / "out"
    assert run_cli(
        "--config", config_path, "--out", str(out), "--format", "json", "run-ic"
    ) == 0
    rows = json.loads((out / "clitest-ic.json").read_text())
    assert len(rows) == 2
    assert set(rows[0]) == set(runner.RESULT_COLUMNS)


def test_bounds_prints_table(capsys):
    code = run_cli("bounds", "--t-tilde", "3", "--horizon", "100", "--k", "100", "1000")
    assert code == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert lines[0] == ",".join(runner.BOUNDS_COLUMNS)
    assert len(lines) == 3


def test_runinfo_sidecar_carries_wall_clock(config_path, tmp_path):
    out = tmp_path / "out"
    run_cli("--config", config_path, "--out", str(out), "dataset", "--k", "4")
    info = json.loads((out / "clitest-dataset.runinfo.json").read_text())
    assert info["master_seed"] == 13
    assert info["wall_clock_s"] >= 0.0


def test_seed_override_changes_hash_and_data(config_path, tmp_path):
    out1, out2 = tmp_path / "a", tmp_path / "b"
    run_cli("--config", config_path, "--out", str(out1), "dataset", "--k", "8")
    run_cli("--config", config_path, "--seed", "99", "--out", str(out2), "dataset", "--k", "8")
    d1 = (out1 / "clitest-dataset.jsonl").read_text()
    d2 = (out2 / "clitest-dataset.jsonl").read_text()
    assert d1 != d2
