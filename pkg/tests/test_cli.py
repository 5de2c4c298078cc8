import json

import pytest

import run_all_pipelines as cli
from utils.config import SCENARIOS


def write_config(tmp_path, body: str):
    path = tmp_path / "run.ini"
    path.write_text(body, encoding="utf-8")
    return path


@pytest.fixture
def fake_runner(monkeypatch):
    """Replace scenario dispatch with a stub returning the given check verdicts."""
    def install(*passes):
        def runner(cfg):
            return {"scenario": cfg.scenario, "pass": all(passes),
                    "checks": [{"check": f"c{i}", "pass": p} for i, p in enumerate(passes)]}
        monkeypatch.setattr(cli, "resolve_runner", lambda scenario: runner)
    return install


def test_list_prints_registry_in_order(capsys):
    assert cli.main(["--list"]) == cli.EXIT_OK
    assert capsys.readouterr().out.split() == list(SCENARIOS)


def test_missing_config_is_an_error(tmp_path):
    assert cli.main(["--config", str(tmp_path / "nope.ini")]) == cli.EXIT_ERROR


@pytest.mark.parametrize("body", [
    "[run]\nscenario = simulate\n[time]\ndt = 0\n",
    "[run]\nscenario = teleport\n",
    "[run]\nscenario = simulate\n[grid]\nbogus = 1\n",
])
def test_invalid_config_is_an_error(tmp_path, body):
    assert cli.main(["--config", str(write_config(tmp_path, body))]) == cli.EXIT_ERROR


def test_threads_must_be_positive(tmp_path):
    path = write_config(tmp_path, "[run]\nscenario = simulate\n")
    assert cli.main(["--config", str(path), "--threads", "0"]) == cli.EXIT_ERROR


def test_passing_run_writes_summary(tmp_path, fake_runner):
    fake_runner(True, True)
    path = write_config(tmp_path, "[run]\nscenario = simulate\n")
    out = tmp_path / "out"
    assert cli.main(["--config", str(path), "--out", str(out), "--threads", "2"]) == cli.EXIT_OK
    body = json.loads((out / "run_summary.json").read_text())
    assert body["pass"] is True
    assert body["config"]["threads"] == 2
    assert body["config"]["output_dir"] == str(out.resolve())
    assert body["timing"]["seconds"] >= 0


def test_failed_check_exit_code(tmp_path, fake_runner, capsys):
    fake_runner(True, False)
    path = write_config(tmp_path, "[run]\nscenario = simulate\n")
    assert cli.run(path, out=str(tmp_path)) == cli.EXIT_FAILED
    assert "c1" in capsys.readouterr().out


def test_run_all_reports_worst_code(tmp_path, fake_runner, monkeypatch):
    fake_runner(False)
    good = write_config(tmp_path, "[run]\nscenario = simulate\n")
    monkeypatch.setattr(cli, "checked_in_configs", lambda: [good])
    monkeypatch.setattr(cli, "BASE_DIR", tmp_path)
    assert cli.run_all(out=str(tmp_path)) == cli.EXIT_FAILED


def test_checked_in_configs_follow_registry_order():
    names = [p.stem.replace("_", "-") for p in cli.checked_in_configs()]
    assert names == [s for s in SCENARIOS if s in names]
    assert "simulate" in names


@pytest.mark.parametrize("path", cli.checked_in_configs(), ids=lambda p: p.stem)
def test_every_checked_in_config_loads_through_run(path, tmp_path, fake_runner):
    fake_runner(True)
    assert cli.run(path, out=str(tmp_path)) == cli.EXIT_OK
    body = json.loads((tmp_path / "run_summary.json").read_text())
    assert body["config"]["scenario"].replace("-", "_") == path.stem
