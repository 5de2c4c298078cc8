# pipelines/transform_selftest.py

import logging
import sys
from pathlib import Path

import numpy as np
import pandas as pd

# Ensure project root is on sys.path so utils can import correctly
BASE_DIR = Path(__file__).resolve().parents[1]
if str(BASE_DIR) not in sys.path:
    sys.path.insert(0, str(BASE_DIR))

from utils.config import RunConfig, default_config
from utils.diagnostics import kernel_decay_check, verdict
from utils.errors import NonDecayedBoundary
from utils.fetch import scenario_summary, write_csv, write_json
from utils.field import mass
from utils.grid import RadialField, RadialGrid
from utils.radial_transform import (
    BOUNDARY_TOLERANCE,
    RECONSTRUCTION_CONSTANT,
    check_decay,
    finite_difference_symbol,
    apply_symbol,
    fractional_laplacian,
    heat_flow,
    heat_kernel_closed_form,
    heat_kernel_field,
    heat_kernel_mass,
    heat_kernel_spectral,
    helgason_forward,
    helgason_inverse,
    littlewood_paley,
    littlewood_paley_multiplier,
    littlewood_paley_reconstruct,
    plancherel_check,
    radial_convolve,
    schrodinger_flow,
    transform_quadrature,
)

log = logging.getLogger(__name__)

DEFAULTS = {
    "corpus_size": 20,
    "heat_z": 0.5,
    "heat_r_max": 30.0,
    "heat_n": 1024,
    "quadrature_modes": [3, 10, 25],
    "kernel_scales": [1.0, 2.0, 4.0],
    "low_scales": [0.25, 0.5, 1.0],
}


def _relative(a: np.ndarray, b: np.ndarray) -> float:
    ref = np.linalg.norm(b)
    return float(np.linalg.norm(a - b) / ref) if ref > 0 else float(np.linalg.norm(a))


def corpus_bounds(r_max: float, tolerance: float = BOUNDARY_TOLERANCE):
    """Largest center and width whose bumps have decayed by r_max.

    On H^3 the reduced profile carries sinh r, so a bump at distance D from
    the edge needs D^2/(2 width^2) - D to exceed log(1/tolerance) with room.
    """
    center = min(5.0, r_max / 4.0)
    gap = r_max - center
    width = min(2.0, gap / np.sqrt(2.0 * (gap - np.log(tolerance) + 7.0)))
    return center, width


def build_corpus(cfg: RunConfig, size: int):
    """Seeded family of decayed, possibly oscillating Gaussian bumps sized to the grid."""
    rng = np.random.default_rng(cfg.seed)
    grid = cfg.grid()
    max_center, max_width = corpus_bounds(grid.r_max)
    corpus = []
    for _ in range(size):
        amp = rng.uniform(0.2, 2.0)
        width = rng.uniform(min(0.5, max_width / 2.0), max_width)
        center = rng.uniform(0.0, max_center)
        k = rng.uniform(-2.0, 2.0)
        f = RadialField.from_values(
            grid, cfg.geometry,
            lambda r: amp * np.exp(-0.5 * ((r - center) / width) ** 2 + 1j * k * r),
        )
        try:
            check_decay(f)
        except NonDecayedBoundary as exc:
            log.warning("corpus field skipped: %s", exc)
            continue
        corpus.append(f)
    if not corpus:
        raise NonDecayedBoundary(f"no corpus field decays on r_max={grid.r_max}")
    return corpus


def plancherel_table(corpus) -> pd.DataFrame:
    rows = []
    for i, f in enumerate(corpus):
        lhs, rhs = plancherel_check(f)
        back = helgason_inverse(helgason_forward(f))
        rows.append({
            "field": i,
            "l2_sq": lhs,
            "spectral_sq": rhs,
            "plancherel_rel": abs(lhs - rhs) / lhs,
            "roundtrip_rel": _relative(back.h, f.h),
        })
    return pd.DataFrame(rows)


def heat_kernel_checks(z: float, grid: RadialGrid) -> list:
    spectral = heat_kernel_spectral(z, grid)
    window = grid.r <= 10.0
    closed = heat_kernel_closed_form(z, grid.r[window])
    sup_err = float(np.max(np.abs(spectral.u.real[window] - closed)) / np.max(np.abs(closed)))

    forward = helgason_forward(heat_kernel_field(z, grid))
    expected = np.exp(-z * (grid.lam ** 2 + 1.0))
    keep = expected > 1e-12
    fwd_err = float(np.max(np.abs(forward.coeffs[keep] - expected[keep])))

    quad, spectral_mass = heat_kernel_mass(z, grid)
    mass_err = abs(quad - spectral_mass) / spectral_mass
    return [
        verdict("heat_kernel_closed_form", sup_err, 1e-6, None, sup_err <= 1e-6, z=z),
        verdict("heat_kernel_transform", fwd_err, 1e-6, None, fwd_err <= 1e-6, z=z),
        verdict("heat_kernel_mass", quad, spectral_mass, None, mass_err <= 1e-6, relative_error=mass_err),
    ]


def quadrature_check(grid: RadialGrid, geometry, modes) -> dict:
    """helgason_forward at a few lambda_m against direct quadrature of the sphere integral."""
    u = lambda r: np.exp(-0.5 * r ** 2)
    f = RadialField.from_values(grid, geometry, u)
    F = helgason_forward(f)
    errs = []
    for m in modes:
        lam = f.grid.lam[m - 1]
        direct = transform_quadrature(u, lam, f.grid.r_max, f.geometry)
        errs.append(abs(F.coeffs[m - 1] - direct) / abs(direct))
    worst = float(max(errs))
    return verdict("transform_quadrature", worst, 1e-6, None, worst <= 1e-6, modes=list(modes))


def multiplier_checks(f: RadialField) -> list:
    checks = []
    # unitarity and group law of the Schrodinger flow
    g = schrodinger_flow(1.3, f)
    unit = abs(mass(g) - mass(f)) / mass(f)
    back = _relative(schrodinger_flow(-1.3, g).h, f.h)
    checks.append(verdict("schrodinger_unitarity", unit, 1e-12, None, unit <= 1e-12 and back <= 1e-12,
                          inverse_error=back))

    ident = _relative(fractional_laplacian(-2.0, fractional_laplacian(2.0, f)).h, f.h)
    grows = np.sqrt(mass(fractional_laplacian(1.0, f))) >= np.sqrt(mass(f))
    checks.append(verdict("fractional_laplacian", ident, 1e-10, None, ident <= 1e-10 and grows))

    # spectral Laplacian against second differences, O(dr^2)
    errs = []
    for grid in (f.grid, RadialGrid(f.grid.r_max, 2 * f.grid.n + 1)):
        smooth = RadialField.from_values(grid, f.geometry, lambda r: np.exp(-0.5 * r ** 2))
        errs.append(_relative(finite_difference_symbol(smooth).h, apply_symbol(smooth, lambda mu: -mu).h))
    order = np.log2(errs[0] / errs[1]) if errs[1] > 0 else np.inf
    checks.append(verdict("finite_difference_laplacian", errs[0], f.grid.dr ** 2, None,
                          order >= 1.8, observed_order=float(order)))

    value = float(littlewood_paley_multiplier(2.0, np.array([4.0]))[0])
    checks.append(verdict("littlewood_paley_symbol", value, -np.exp(-1.0), None,
                          abs(value + np.exp(-1.0)) <= 1e-12))

    rec = _relative(littlewood_paley_reconstruct(f).h, f.h)
    checks.append(verdict("littlewood_paley_reconstruction", rec, 1e-4, RECONSTRUCTION_CONSTANT, rec <= 1e-4))
    return checks


def low_frequency_check(f: RadialField, scales) -> dict:
    """||P_N f||_2 <= 2 N^{-2} ||f||_2 for N <= 1."""
    norm = np.sqrt(mass(f))
    ratios = [np.sqrt(mass(littlewood_paley(N, f))) / (2.0 * N ** -2 * norm) for N in scales]
    return verdict("littlewood_paley_low_frequency", max(ratios), 1.0, max(ratios), max(ratios) <= 1.0,
                   scales=list(scales))


def convolution_check(f: RadialField, z: float) -> dict:
    kernel = heat_kernel_field(z, f.grid)
    err = _relative(radial_convolve(f, kernel).h, heat_flow(z, f).h)
    return verdict("radial_convolution", err, 1e-6, None, err <= 1e-6, z=z)


def run_transform_selftest(cfg: RunConfig) -> dict:
    params = cfg.scenario_params(DEFAULTS)
    out = cfg.output_dir

    corpus = build_corpus(cfg, params["corpus_size"])
    table = plancherel_table(corpus)
    csv_path = write_csv(table, "transform_selftest.csv", out)

    plan = float(table["plancherel_rel"].max())
    trip = float(table["roundtrip_rel"].max())
    checks = [
        verdict("plancherel", plan, 1e-8, None, plan <= 1e-8, corpus=len(corpus)),
        verdict("roundtrip", trip, 1e-8, None, trip <= 1e-8, corpus=len(corpus)),
    ]
    heat_grid = RadialGrid(params["heat_r_max"], params["heat_n"])
    checks += heat_kernel_checks(params["heat_z"], heat_grid)
    checks.append(quadrature_check(cfg.grid(), cfg.geometry, params["quadrature_modes"]))
    checks += multiplier_checks(corpus[0])
    checks.append(low_frequency_check(corpus[0], params["low_scales"]))
    checks.append(convolution_check(corpus[0], params["heat_z"]))
    checks += [kernel_decay_check(N, heat_grid) for N in params["kernel_scales"]]

    summary = scenario_summary("transform-selftest", checks, [csv_path])
    write_json(summary, "transform_selftest.json", out)
    return summary


if __name__ == "__main__":
    summary = run_transform_selftest(default_config("transform-selftest"))
    status = "✔" if summary["pass"] else "✖"
    print(f"{status} transform self-test: {sum(c['pass'] for c in summary['checks'])}/{len(summary['checks'])} checks passed")
