from pathlib import Path

import pytest

from utils.config import (
    DEFAULT_OUTPUT_DIR,
    PROJECT_ROOT,
    SCENARIOS,
    RunConfig,
    default_config,
    load_config,
    parse_config,
)
from utils.errors import ConfigParseError, ScenarioUnknown
from utils.grid import Geometry
from utils.propagator import SolverConfig

MINIMAL = "[run]\nscenario = simulate\n"


def test_minimal_config_uses_defaults():
    cfg = parse_config(MINIMAL, env={})
    assert cfg.scenario == "simulate"
    assert cfg.geometry is Geometry.HYPERBOLIC
    assert cfg.output_dir == DEFAULT_OUTPUT_DIR
    assert (cfg.r_max, cfg.n, cfg.dt) == (30.0, 2048, 1e-3)


def test_sections_are_typed():
    text = MINIMAL + (
        "geometry = Euclidean\nthreads = 3\n"
        "[grid]\nr_max = 12.5\nn = 256\n"
        "[time]\ndt = 5e-3\nrecord_every = 4\n"
        "[data]\nfamily = ring\ncenter = 3\n"
        "[diagnostics]\nstrichartz = off\nmorawetz_N = 2\n"
    )
    cfg = parse_config(text, env={})
    assert cfg.geometry is Geometry.EUCLIDEAN
    assert cfg.threads == 3 and cfg.n == 256 and cfg.r_max == 12.5
    assert cfg.record_every == 4 and cfg.dt == 5e-3
    assert cfg.family == "ring" and cfg.center == 3.0
    assert cfg.strichartz is False and cfg.morawetz_N == 2.0


@pytest.mark.parametrize("text", [
    "not an ini file",
    "[grid]\nn = 512\n",
    MINIMAL + "[grid]\nn = lots\n",
    MINIMAL + "[grid]\nm = 512\n",
    MINIMAL + "[extras]\nx = 1\n",
    MINIMAL + "[time]\ndt = 0\n",
    MINIMAL + "[time]\ndt = -1e-3\n",
    MINIMAL + "[grid]\nn = 8\n",
    MINIMAL + "[diagnostics]\nenergy = maybe\n",
    MINIMAL + "[diagnostics]\nmorawetz_N = 0.5\n",
    MINIMAL + "[data]\nfamily = square\n",
    MINIMAL + "geometry = spherical\n",
])
def test_bad_configs_are_rejected(text):
    with pytest.raises(ConfigParseError):
        parse_config(text, env={})


def test_unknown_scenario():
    with pytest.raises(ScenarioUnknown):
        parse_config("[run]\nscenario = teleport\n", env={})


def test_environment_overrides(tmp_path):
    env = {
        "HYPERLAB_GRID__N": "4096",
        "HYPERLAB_TIME__DT": "2e-3",
        "HYPERLAB_OUTPUT_DIR": str(tmp_path),
        "UNRELATED": "x",
    }
    cfg = parse_config(MINIMAL + "[grid]\nn = 512\n", env=env)
    assert cfg.n == 4096
    assert cfg.dt == 2e-3
    assert cfg.output_dir == tmp_path


def test_relative_output_dir_is_under_project_root():
    cfg = parse_config(MINIMAL + "output_dir = out/run1\n", env={})
    assert cfg.output_dir == PROJECT_ROOT / "out" / "run1"


def test_scenario_params():
    cfg = parse_config(MINIMAL + "[scenario]\norder_DTS = 1e-2, 5e-3\nenergy_tolerance = 1e-5\norder_test = no\n",
                       env={})
    params = cfg.scenario_params({"order_dts": [1e-3], "energy_tolerance": 1e-6, "order_test": True, "K": 4})
    assert params["order_dts"] == [1e-2, 5e-3]
    assert params["energy_tolerance"] == 1e-5
    assert params["order_test"] is False
    assert params["K"] == 4
    with pytest.raises(ConfigParseError):
        cfg.scenario_params({"energy_tolerance": 1e-6})


def test_scenario_params_mixed_case_keys():
    cfg = default_config("profile-extract", params={"J_max": "2"})
    assert cfg.scenario_params({"J_max": 4})["J_max"] == 2


def test_load_config(tmp_path):
    with pytest.raises(ConfigParseError):
        load_config(tmp_path / "missing.ini", env={})
    path = tmp_path / "run.ini"
    path.write_text(MINIMAL, encoding="utf-8")
    assert load_config(path, env={}).source == path


def test_checked_in_configs_parse():
    paths = sorted((PROJECT_ROOT / "configs").glob("*.ini"))
    assert paths
    for path in paths:
        cfg = load_config(path, env={})
        assert cfg.scenario in SCENARIOS
        assert cfg.scenario.replace("-", "_") == path.stem


def test_derived_objects(tmp_path):
    cfg = default_config("simulate", geometry="euclidean", output_dir=str(tmp_path), r_max=10.0, n=128)
    assert isinstance(cfg.output_dir, Path)
    solver = cfg.solver_config(dt=0.5)
    assert isinstance(solver, SolverConfig)
    assert solver.dt == 0.5 and solver.geometry is Geometry.EUCLIDEAN
    f = cfg.initial_data()
    assert f.geometry is Geometry.EUCLIDEAN and f.grid.n == 128
    d = cfg.to_dict()
    assert d["geometry"] == "euclidean" and d["output_dir"] == str(tmp_path)
    assert RunConfig(scenario="simulate", baseline="/abs/b.json").baseline_path() == Path("/abs/b.json")


@pytest.mark.parametrize("key", ["morawetz_N", "MORAWETZ_N", "morawetz_n"])
def test_diagnostics_key_reaches_field_in_any_case(key):
    cfg = parse_config(MINIMAL + f"[diagnostics]\n{key} = 3\n", env={})
    assert cfg.morawetz_N == 3.0
    cfg = parse_config(MINIMAL, env={"HYPERLAB_DIAGNOSTICS__" + key.upper(): "4"})
    assert cfg.morawetz_N == 4.0
