# pipelines/simulate.py

import logging
import sys
from pathlib import Path

import numpy as np

# Ensure project root is on sys.path so utils can import correctly
BASE_DIR = Path(__file__).resolve().parents[1]
if str(BASE_DIR) not in sys.path:
    sys.path.insert(0, str(BASE_DIR))

from utils.config import RunConfig, default_config
from utils.diagnostics import strichartz_accumulators, verdict
from utils.fetch import save_field_csv, scenario_summary, write_csv, write_json
from utils.field import mass
from utils.grid import Geometry, RadialField
from utils.propagator import Trajectory, euclid_evolve, evolve

log = logging.getLogger(__name__)

DEFAULTS = {
    "order_test": True,
    "order_dts": [1e-2, 5e-3, 2.5e-3],
    "order_t_end": 1.0,
    "order_width": 2.0 ** 0.5,
    "energy_tolerance": 1e-6,
    "small_data_amplitude": 0.005,
    "small_data_tolerance": 0.1,
}


def run_solver(phi: RadialField, cfg: RunConfig, **changes) -> Trajectory:
    solver = cfg.solver_config(**changes)
    if solver.geometry is Geometry.EUCLIDEAN:
        return euclid_evolve(phi, solver)
    return evolve(phi, solver)


def conservation_checks(traj: Trajectory, steps: int, energy_tolerance: float) -> list:
    df = traj.to_frame()
    m0, e0 = df["mass"].iloc[0], df["energy"].iloc[0]
    mass_drift = float(np.max(np.abs(df["mass"] - m0)) / m0) if m0 > 0 else 0.0
    energy_drift = float(np.max(np.abs(df["energy"] - e0)) / e0) if e0 > 0 else 0.0
    return [
        verdict("mass_conservation", mass_drift, 1e-12 * steps, None, mass_drift <= 1e-12 * steps),
        verdict("energy_conservation", energy_drift, energy_tolerance, None, energy_drift <= energy_tolerance),
    ]


def convergence_order(cfg: RunConfig, dts, t_end: float, width: float) -> dict:
    """Observed order from u(dt) - u(dt/2) against u(dt/2) - u(dt/4)."""
    phi = RadialField.from_values(cfg.grid(), cfg.geometry, lambda r: np.exp(-(r / width) ** 2 / 2.0))
    finals = []
    for dt in dts:
        traj = run_solver(phi, cfg, dt=dt, t_end=t_end, record_every=10 ** 9)
        finals.append(traj.final)
    diffs = [np.sqrt(mass(a - b)) for a, b in zip(finals, finals[1:])]
    ratios = [diffs[i] / diffs[i + 1] for i in range(len(diffs) - 1) if diffs[i + 1] > 0]
    order = float(np.log2(min(ratios))) if ratios else float("inf")
    return verdict("convergence_order", order, 1.9, None, order >= 1.9, dts=list(dts), differences=diffs)


def small_data_check(cfg: RunConfig, amplitude: float, tolerance: float) -> dict:
    """Z-norm of a small nonlinear solution against the linear one."""
    phi = cfg.initial_data() * (amplitude / max(cfg.amplitude, 1e-300))
    z_nl = strichartz_accumulators(run_solver(phi, cfg))["Z"]
    z_lin = strichartz_accumulators(run_solver(phi, cfg, nonlinearity_on=False))["Z"]
    rel = abs(z_nl - z_lin) / z_lin if z_lin > 0 else 0.0
    return verdict("small_data_z_norm", z_nl, z_lin, None, rel <= tolerance, relative_difference=rel)


def run_simulate(cfg: RunConfig) -> dict:
    params = cfg.scenario_params(DEFAULTS)
    out = cfg.output_dir

    phi = cfg.initial_data()
    traj = run_solver(phi, cfg)
    diag_path = write_csv(traj.to_frame(), "simulate_diagnostics.csv", out)
    final_path = save_field_csv(traj.final, "simulate_final_field.csv", out)
    profiles_path = write_csv(traj.profiles_frame(), "simulate_profiles.csv", out)
    log.debug("simulated %d snapshots to t=%g", len(traj.snapshots), traj.times[-1])

    checks = []
    if cfg.energy:
        checks += conservation_checks(traj, max(cfg.solver_config().n_steps, 1), params["energy_tolerance"])
    if params["order_test"]:
        checks.append(convergence_order(cfg, params["order_dts"], params["order_t_end"], params["order_width"]))
    if cfg.strichartz and params["small_data_amplitude"] > 0:
        checks.append(small_data_check(cfg, params["small_data_amplitude"], params["small_data_tolerance"]))

    norms = strichartz_accumulators(traj) if cfg.strichartz else {}
    summary = scenario_summary("simulate", checks, [diag_path, final_path, profiles_path], norms=norms)
    write_json(summary, "simulate.json", out)
    return summary


if __name__ == "__main__":
    cfg = default_config("simulate", r_max=20.0, n=1024, amplitude=0.5, dt=1e-3, t_end=1.0, record_every=10)
    summary = run_simulate(cfg)
    print(f"{'✔' if summary['pass'] else '✖'} Saved simulation diagnostics: {cfg.output_dir / 'simulate_diagnostics.csv'}")
