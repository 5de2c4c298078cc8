from pathlib import Path

import numpy as np
import pandas as pd
import pytest

from pipelines.morawetz_test import MIN_ORDER, identity_checks
from pipelines.simulate import run_simulate
from pipelines.sweep import PIPELINES, resolve_runner, run_sweep, sweep_configs
from pipelines.transform_selftest import build_corpus, corpus_bounds, run_transform_selftest
from utils.config import SCENARIOS
from utils.errors import ConfigParseError, ScenarioUnknown
from utils.fetch import load_json
from utils.radial_transform import BOUNDARY_TOLERANCE


def test_every_scenario_has_a_runner():
    assert list(PIPELINES) == list(SCENARIOS)
    for scenario in SCENARIOS:
        assert callable(resolve_runner(scenario))
    with pytest.raises(ScenarioUnknown):
        resolve_runner("teleport")


def test_sweep_configs(small_config):
    cfg = small_config("sweep")
    children = sweep_configs(cfg, "simulate", "n", [256.0, 512])
    assert [c.n for c in children] == [256, 512]
    assert all(c.scenario == "simulate" and not c.params for c in children)
    assert children[0].output_dir == cfg.output_dir / "sweep" / "simulate_n_256"
    with pytest.raises(ConfigParseError):
        sweep_configs(cfg, "sweep", "n", [256])
    with pytest.raises(ConfigParseError):
        sweep_configs(cfg, "simulate", "geometry", ["euclidean"])
    with pytest.raises(ConfigParseError):
        sweep_configs(cfg, "simulate", "n", [256.5])


def test_simulate_smoke(small_config, tmp_path):
    cfg = small_config("simulate", amplitude=0.5, dt=1e-2, t_end=0.2, record_every=5,
                       params={"order_test": "false"})
    summary = run_simulate(cfg)
    assert {c["check"] for c in summary["checks"]} == {
        "mass_conservation", "energy_conservation", "small_data_z_norm"}
    assert summary["checks"][0]["pass"]
    for name in ("simulate_diagnostics.csv", "simulate_final_field.csv", "simulate_profiles.csv", "simulate.json"):
        assert (tmp_path / name).exists()
    diag = pd.read_csv(tmp_path / "simulate_diagnostics.csv")
    assert diag["t"].iloc[-1] == pytest.approx(0.2)
    assert set(load_json(tmp_path / "simulate.json")["norms"]) == {"Z", "L2L6", "L10L30_13_grad", "N1"}


def test_sweep_smoke(small_config, tmp_path):
    cfg = small_config("sweep", dt=1e-2, t_end=0.05, threads=2,
                       params={"target": "simulate", "key": "amplitude", "values": "0.1 0.2"})
    summary = run_sweep(cfg)
    table = pd.read_csv(tmp_path / "sweep.csv")
    assert list(table["amplitude"]) == [0.1, 0.2]
    assert len(summary["checks"]) == 2
    for rel in table["output_dir"]:
        assert (tmp_path / Path(rel) / "simulate.json").exists()


def test_identity_checks_report_observed_order(small_config):
    identity, sign = identity_checks(small_config("morawetz-test"), 4e-3, 0.04, 0.03)
    assert identity["check"] == "morawetz_identity"
    assert identity["observed_order"] >= MIN_ORDER
    assert {"refined_mismatch", "mismatch_order"} <= set(identity)
    assert sign["pass"]


@pytest.mark.parametrize("r_max", [10.0, 20.0, 30.0])
def test_corpus_bounds_decay_on_the_grid(r_max):
    center, width = corpus_bounds(r_max)
    assert 0 < center <= r_max / 4 and 0 < width <= 2.0
    gap = r_max - center
    # log of |h(r_max)| / |h(center)| for the widest bump at the farthest center
    log_ratio = -gap ** 2 / (2 * width ** 2) + gap
    assert log_ratio < np.log(BOUNDARY_TOLERANCE)


def test_corpus_decays_on_small_grid(small_config):
    cfg = small_config("transform-selftest")
    corpus = build_corpus(cfg, 20)
    assert len(corpus) == 20
    for f in corpus:
        assert abs(f.h[-1]) <= BOUNDARY_TOLERANCE * np.max(np.abs(f.h))


def test_transform_selftest_smoke(small_config, tmp_path):
    summary = run_transform_selftest(small_config("transform-selftest", params={"corpus_size": "3"}))
    checks = {c["check"]: c for c in summary["checks"]}
    assert checks["plancherel"]["pass"] and checks["roundtrip"]["pass"]
    assert (tmp_path / "transform_selftest.json").exists()
    assert (tmp_path / "transform_selftest.csv").exists()
