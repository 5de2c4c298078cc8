# pipelines/profile_extract.py

import sys
from pathlib import Path

import numpy as np

# Ensure project root is on sys.path so utils can import correctly
BASE_DIR = Path(__file__).resolve().parents[1]
if str(BASE_DIR) not in sys.path:
    sys.path.insert(0, str(BASE_DIR))

from utils.config import RunConfig, default_config
from utils.diagnostics import verdict
from utils.fetch import load_manifest, save_field_csv, save_snapshot, scenario_summary, write_csv, write_json
from utils.field import gaussian, kinetic_energy, regularize
from utils.grid import Geometry, RadialGrid
from utils.profiles import (
    FrameKind,
    decoupling_audit,
    dyadic_scales,
    euclidean_sequence,
    full_decomposition,
    heat_profile_convergence,
    hyperbolic_sequence,
    profile_budget,
    superpose,
)

DEFAULTS = {
    "manifest": "",
    "delta_threshold": 0.1,
    "J_max": 4,
    "K": 4,
    "start": 2,
    "hyperbolic_amplitude": 0.5,
    "euclidean_amplitude": 0.5,
    "energy_tolerance": 0.05,
    "decoupling_tolerance": 0.05,
    "budget_constant": 4.0,
    "euclid_r_max": 20.0,
    "euclid_n": 2048,
    "heat_N": [4.0, 8.0, 16.0],
}


def synthetic_sequence(cfg: RunConfig, params: dict):
    """A stationary hyperbolic bump plus a Euclidean bump concentrating at dyadic scales."""
    grid = cfg.grid()
    psi = gaussian(grid, Geometry.HYPERBOLIC, params["hyperbolic_amplitude"], cfg.width)
    egrid = RadialGrid(params["euclid_r_max"], params["euclid_n"])
    phi = gaussian(egrid, Geometry.EUCLIDEAN, params["euclidean_amplitude"], cfg.width)
    K = params["K"]
    scales = dyadic_scales(K, params["start"])
    seq = superpose(
        hyperbolic_sequence(psi, np.zeros(K)),
        euclidean_sequence(phi, scales, grid),
    )
    # extraction averages the last half of the sequence, where T_N carries e^{Delta/N} phi
    tail = scales[K // 2:]
    regularized = sum((regularize(phi, N) for N in tail[1:]), regularize(phi, tail[0])) * (1.0 / len(tail))
    truth = {FrameKind.HYPERBOLIC: kinetic_energy(psi), FrameKind.EUCLIDEAN: kinetic_energy(regularized)}
    return seq, truth, egrid


def recovery_check(dec, truth: dict, tolerance: float) -> dict:
    """Each known component matched by one extracted profile of the same kind, energy within tolerance."""
    errors = {}
    for kind, expected in truth.items():
        found = [e.energy for e in dec.extractions if e.frame.kind is kind]
        errors[kind.value] = min((abs(e - expected) / expected for e in found), default=float("inf"))
    worst = max(errors.values())
    return verdict("profile_recovery", worst, tolerance, None, worst <= tolerance, relative_errors=errors)


def run_profile_extract(cfg: RunConfig) -> dict:
    params = cfg.scenario_params(DEFAULTS)
    out = cfg.output_dir
    delta = params["delta_threshold"]

    truth, kwargs = None, {}
    if params["manifest"]:
        seq = load_manifest(Path(params["manifest"]))
    else:
        seq, truth, egrid = synthetic_sequence(cfg, params)
        kwargs["euclid_grid"] = egrid

    dec = full_decomposition(seq, delta, params["J_max"], **kwargs)
    table, decoupling = decoupling_audit(dec, seq, params["decoupling_tolerance"])
    audit_path = write_csv(table, "profile_decoupling.csv", out)

    budget = profile_budget(seq, delta, params["budget_constant"])
    final_delta = dec.deltas[-1]
    checks = [
        decoupling,
        verdict("remainder_delta", final_delta, delta, None, final_delta < delta, monotone=dec.monotone),
        verdict("profile_budget", len(dec), budget, None, len(dec) <= budget),
        dec.guarantee_check(),
    ]
    if truth is not None:
        checks.append(recovery_check(dec, truth, params["energy_tolerance"]))

    heat_table, heat_check = heat_profile_convergence(params["heat_N"])
    heat_path = write_csv(heat_table, "heat_profile_convergence.csv", out)
    checks.append(heat_check)

    outputs = [audit_path, heat_path]
    for j, (_, profile) in enumerate(dec.profiles):
        outputs.append(save_field_csv(profile, f"profile_{j:02d}.csv", out))
        outputs.append(save_snapshot(profile, out / f"profile_{j:02d}.npz"))

    summary = scenario_summary("profile-extract", checks, outputs, decomposition=dec.summary())
    write_json(summary, "profile_extract.json", out)
    return summary


if __name__ == "__main__":
    summary = run_profile_extract(default_config("profile-extract", r_max=15.0, n=16384))
    print(f"{'✔' if summary['pass'] else '✖'} Extracted {summary['decomposition']['count']} profiles")
