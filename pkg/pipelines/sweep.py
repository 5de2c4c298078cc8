# pipelines/sweep.py

import importlib
import logging
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import fields, replace
from pathlib import Path
from typing import Callable, Dict

import pandas as pd

# Ensure project root is on sys.path so utils can import correctly
BASE_DIR = Path(__file__).resolve().parents[1]
if str(BASE_DIR) not in sys.path:
    sys.path.insert(0, str(BASE_DIR))

from utils.config import RunConfig, default_config
from utils.errors import ConfigParseError, ScenarioUnknown
from utils.fetch import scenario_summary, write_csv, write_json

log = logging.getLogger(__name__)

# scenario id -> "module:function"; listing order follows utils.config.SCENARIOS
PIPELINES: Dict[str, str] = {
    "simulate": "pipelines.simulate:run_simulate",
    "transform-selftest": "pipelines.transform_selftest:run_transform_selftest",
    "dispersive-test": "pipelines.dispersive_test:run_dispersive_test",
    "morawetz-test": "pipelines.morawetz_test:run_morawetz_test",
    "sobolev-test": "pipelines.sobolev_test:run_sobolev_test",
    "euclid-compare": "pipelines.euclid_compare:run_euclid_compare",
    "profile-extract": "pipelines.profile_extract:run_profile_extract",
    "sweep": "pipelines.sweep:run_sweep",
}

DEFAULTS = {
    "target": "simulate",
    "key": "amplitude",
    "values": [0.25, 0.5, 1.0],
}

# RunConfig fields a sweep may vary
SWEEPABLE = {"seed", "r_max", "n", "dt", "t_end", "record_every", "amplitude", "scale", "width",
             "center", "morawetz_N", "boundary_tolerance"}


def resolve_runner(scenario: str) -> Callable[[RunConfig], dict]:
    try:
        target = PIPELINES[scenario]
    except KeyError:
        raise ScenarioUnknown(f"unknown scenario '{scenario}' (known: {', '.join(PIPELINES)})") from None
    module, func = target.split(":")
    return getattr(importlib.import_module(module), func)


def _typed(default, value, where: str):
    if isinstance(default, int):
        if float(value) != int(value):
            raise ConfigParseError(f"{where}: expected an integer, got {value}")
        return int(value)
    return type(default)(value)


def sweep_configs(cfg: RunConfig, target: str, key: str, values) -> list:
    """One child config per value; each writes into its own subdirectory."""
    if target == "sweep":
        raise ConfigParseError("a sweep cannot target itself")
    if key not in SWEEPABLE:
        raise ConfigParseError(f"scenario.key '{key}' is not sweepable (choose from {sorted(SWEEPABLE)})")
    default = {f.name: f.default for f in fields(RunConfig)}[key]
    children = []
    for value in values:
        typed = _typed(default, value, f"scenario.values[{key}]")
        out = cfg.output_dir / "sweep" / f"{target}_{key}_{typed}"
        children.append(replace(cfg, scenario=target, output_dir=out, params={}, **{key: typed}))
    return children


def run_sweep(cfg: RunConfig) -> dict:
    params = cfg.scenario_params(DEFAULTS)
    runner = resolve_runner(params["target"])
    children = sweep_configs(cfg, params["target"], params["key"], params["values"])

    log.debug("sweeping %s over %s=%s on %d threads", params["target"], params["key"], params["values"], cfg.threads)
    # runs share no mutable state; map keeps the input order
    with ThreadPoolExecutor(max_workers=cfg.threads) as pool:
        results = list(pool.map(runner, children))

    rows = []
    for child, result in zip(children, results):
        rows.append({
            params["key"]: getattr(child, params["key"]),
            "pass": result["pass"],
            "checks": len(result["checks"]),
            "failed": sum(not c.get("pass", True) for c in result["checks"]),
            "output_dir": child.output_dir.relative_to(cfg.output_dir).as_posix(),
        })
    table = pd.DataFrame(rows)
    csv_path = write_csv(table, "sweep.csv", cfg.output_dir)

    checks = [{"check": f"{params['target']}[{params['key']}={row[params['key']]}]", "pass": bool(row["pass"])}
              for row in rows]
    summary = scenario_summary("sweep", checks, [csv_path], target=params["target"], key=params["key"])
    write_json(summary, "sweep.json", cfg.output_dir)
    return summary


if __name__ == "__main__":
    cfg = default_config("sweep", r_max=20.0, n=512, t_end=0.1, threads=3,
                         params={"target": "simulate", "key": "amplitude", "values": "0.1 0.2 0.4"})
    summary = run_sweep(cfg)
    print(f"{'✔' if summary['pass'] else '✖'} Sweep of {summary['target']} over {summary['key']}: {len(summary['checks'])} runs")
