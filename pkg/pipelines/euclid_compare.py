# pipelines/euclid_compare.py

import logging
import sys
from pathlib import Path

import pandas as pd

# Ensure project root is on sys.path so utils can import correctly
BASE_DIR = Path(__file__).resolve().parents[1]
if str(BASE_DIR) not in sys.path:
    sys.path.insert(0, str(BASE_DIR))

from utils.config import RunConfig, default_config
from utils.euclidean import (
    cutoff_error_scan,
    euclidean_energy,
    scaling_limit_experiment,
    scaling_verdict,
    strichartz_extinction,
)
from utils.fetch import scenario_summary, write_csv, write_json
from utils.field import gaussian
from utils.grid import Geometry, RadialGrid
from utils.propagator import SolverConfig, euclid_evolve

log = logging.getLogger(__name__)

DEFAULTS = {
    "N_list": [4.0, 8.0, 16.0, 32.0],
    "T0": 1.0,
    "R": 10.0,
    "steps": 200,
    "record_every": 4,
    "n_hyperbolic": 4096,
    "eps_linear": 1e-2,
    "eps_nonlinear": 5e-2,
    "max_energy": 1.0,
    "cutoff_R": [5.0, 10.0, 20.0],
    "cutoff_r_max": 60.0,
    "cutoff_n": 4096,
    "extinction_N": [32.0, 64.0],
    "extinction_p": 10.0,
    "extinction_q": 30.0 / 13.0,
    "extinction_T1": [1.0, 2.0, 4.0, 8.0],
    "extinction_tau_max": 100.0,
}


def scaling_tables(phi, params: dict, boundary_tolerance: float):
    tables, checks = {}, []
    for mode, nonlinear, eps in (("linear", False, params["eps_linear"]),
                                 ("nonlinear", True, params["eps_nonlinear"])):
        table = scaling_limit_experiment(
            phi, params["T0"], params["R"], params["N_list"], nonlinear, params["steps"],
            params["record_every"], params["n_hyperbolic"], boundary_tolerance, params["max_energy"],
        )
        table.insert(0, "mode", mode)
        tables[mode] = table
        check = scaling_verdict(table, eps)
        check["mode"] = mode
        checks.append(check)
    return pd.concat(tables.values(), ignore_index=True), checks


def run_euclid_compare(cfg: RunConfig) -> dict:
    params = cfg.scenario_params(DEFAULTS)
    out = cfg.output_dir
    phi = cfg.initial_data(Geometry.EUCLIDEAN)
    energy = euclidean_energy(phi)
    log.debug("Euclidean data energy %.4g", energy.energy)

    scaling, checks = scaling_tables(phi, params, cfg.boundary_tolerance)
    scaling_path = write_csv(scaling, "euclid_scaling_limit.csv", out)

    wide = gaussian(RadialGrid(params["cutoff_r_max"], params["cutoff_n"]), Geometry.EUCLIDEAN,
                    cfg.amplitude, cfg.width)
    v = euclid_evolve(wide, SolverConfig(dt=params["T0"] / params["steps"], t_end=params["T0"],
                                         geometry=Geometry.EUCLIDEAN, nonlinearity_on=False,
                                         record_every=params["record_every"],
                                         boundary_tolerance=cfg.boundary_tolerance))
    cutoff_table, cutoff_check = cutoff_error_scan(v, params["cutoff_R"])
    cutoff_path = write_csv(cutoff_table, "euclid_cutoff_error.csv", out)
    checks.append(cutoff_check)

    ext_table, ext_check = strichartz_extinction(
        phi, params["extinction_N"], params["extinction_p"], params["extinction_q"],
        params["extinction_T1"], params["extinction_tau_max"],
    )
    ext_path = write_csv(ext_table, "euclid_strichartz_extinction.csv", out)
    checks.append(ext_check)

    summary = scenario_summary("euclid-compare", checks, [scaling_path, cutoff_path, ext_path],
                               euclidean_energy=energy.to_dict())
    write_json(summary, "euclid_compare.json", out)
    return summary


if __name__ == "__main__":
    cfg = default_config("euclid-compare", geometry="euclidean", r_max=20.0, n=2048, amplitude=0.45)
    summary = run_euclid_compare(cfg)
    print(f"{'✔' if summary['pass'] else '✖'} Saved scaling-limit table: {cfg.output_dir / 'euclid_scaling_limit.csv'}")
