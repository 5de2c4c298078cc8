import numpy as np
import pytest

from utils.diagnostics import DIAGNOSTIC_COLUMNS
from utils.errors import BoundaryMassExceeded, GridMismatch, NonFiniteState
from utils.field import compute_energy, gaussian, h1_norm, mass
from utils.grid import Geometry, RadialField, RadialGrid
from utils.propagator import (
    SolverConfig,
    euclid_evolve,
    evolve,
    linear_solution,
    nonlinear_phase,
    strang_step,
)
from utils.radial_transform import schrodinger_flow


def rel(a, b):
    return np.linalg.norm(a - b) / np.linalg.norm(b)


def final_state(phi, dt, t_end, **kw):
    return evolve(phi, SolverConfig(dt=dt, t_end=t_end, **kw)).final


# ---------------------------------------------------------
# Config
# ---------------------------------------------------------
@pytest.mark.parametrize("kwargs", [
    {"dt": 0.0, "t_end": 1.0},
    {"dt": -1e-3, "t_end": 1.0},
    {"dt": 1e-3, "t_end": -1.0},
    {"dt": 1e-3, "t_end": 1.0, "record_every": 0},
    {"dt": 1e-3, "t_end": 1.0, "boundary_tolerance": 0.0},
])
def test_solver_config_rejects_bad_values(kwargs):
    with pytest.raises(ValueError):
        SolverConfig(**kwargs)


def test_solver_config_steps_and_grid():
    cfg = SolverConfig(dt=0.01, t_end=0.1, r_max=20.0, n=512)
    assert cfg.n_steps == 10
    assert cfg.grid().matches(RadialGrid(20.0, 512))
    with pytest.raises(ValueError):
        SolverConfig(dt=0.01, t_end=0.1).grid()


# ---------------------------------------------------------
# Single steps
# ---------------------------------------------------------
def test_nonlinear_phase(bump):
    np.testing.assert_allclose(nonlinear_phase(bump, 0.0).h, bump.h)
    out = nonlinear_phase(bump, 0.3)
    np.testing.assert_allclose(np.abs(out.u), np.abs(bump.u), rtol=1e-14)
    twice = nonlinear_phase(nonlinear_phase(bump, 0.15), 0.15)
    np.testing.assert_allclose(twice.h, out.h, rtol=1e-13)


def test_strang_step_without_nonlinearity_is_linear_flow(bump):
    out = strang_step(bump, 0.05, nonlinear=False)
    assert rel(out.h, schrodinger_flow(0.05, bump).h) <= 1e-12


def test_strang_step_boundary_guard(grid):
    edge = gaussian(grid, Geometry.HYPERBOLIC, 1e-6, 0.3, center=19.5)
    with pytest.raises(BoundaryMassExceeded) as err:
        strang_step(edge, 0.01, t=0.5)
    assert err.value.t == pytest.approx(0.51)


# ---------------------------------------------------------
# Trajectories
# ---------------------------------------------------------
def test_zero_data_stays_zero(grid):
    for run, geometry in ((evolve, Geometry.HYPERBOLIC), (euclid_evolve, Geometry.EUCLIDEAN)):
        traj = run(RadialField.zeros(grid, geometry), SolverConfig(dt=0.01, t_end=0.05))
        assert all(np.all(f.h == 0) for f in traj.fields)
        assert traj.to_frame()["energy"].eq(0).all()


def test_recording_schedule(bump):
    traj = evolve(bump, SolverConfig(dt=0.01, t_end=0.1, record_every=3))
    np.testing.assert_allclose(traj.times, [0.0, 0.03, 0.06, 0.09, 0.1])
    frame = traj.to_frame()
    assert list(frame.columns) == DIAGNOSTIC_COLUMNS
    assert len(frame) == len(traj.snapshots)
    assert np.all(np.diff(traj.times) > 0)
    profiles = traj.profiles_frame()
    assert len(profiles) == len(traj.snapshots) * bump.grid.n


@pytest.mark.parametrize("run, geometry", [(evolve, Geometry.HYPERBOLIC), (euclid_evolve, Geometry.EUCLIDEAN)])
def test_mass_conserved_to_round_off(grid, run, geometry):
    phi = gaussian(grid, geometry, 0.8, 1.0)
    cfg = SolverConfig(dt=0.01, t_end=0.5, record_every=10)
    traj = run(phi, cfg)
    m = traj.to_frame()["mass"].to_numpy()
    assert np.max(np.abs(m - m[0])) / m[0] <= 1e-12 * cfg.n_steps
    assert traj.to_frame()["l6"].ge(0).all()


def test_energy_drift_is_second_order(bump):
    e0 = compute_energy(bump).energy
    drifts = [abs(compute_energy(final_state(bump, dt, 0.1)).energy - e0) / e0 for dt in (1e-2, 5e-3)]
    assert drifts[1] <= drifts[0] / 3.5


def test_self_convergence_order(bump):
    phi = bump * 2.0
    u = [final_state(phi, dt, 0.1).h for dt in (1e-2, 5e-3, 2.5e-3)]
    order = np.log2(np.linalg.norm(u[0] - u[1]) / np.linalg.norm(u[1] - u[2]))
    assert order >= 1.9


def test_time_reversal(bump):
    cfg = SolverConfig(dt=0.01, t_end=1.0)
    phi = bump * 2.0
    forward = evolve(phi, cfg).final
    back = evolve(forward.conj(), cfg).final.conj()
    assert h1_norm(back - phi) <= 1e-6 * h1_norm(phi)


def test_small_data_follows_linear_flow(grid):
    phi = gaussian(grid, Geometry.HYPERBOLIC, 0.005, 1.0)
    traj = evolve(phi, SolverConfig(dt=0.01, t_end=0.5, record_every=5))
    lin = linear_solution(phi, traj.times)
    dist = max(h1_norm(u - v) for u, v in zip(traj.fields, lin))
    assert dist <= 10 * compute_energy(phi).energy ** 1.5


def test_linear_solution_matches_flow(bump):
    out = linear_solution(bump, [0.0, 0.4])
    np.testing.assert_allclose(out[0].h, bump.h, atol=1e-14)
    assert rel(out[1].h, schrodinger_flow(0.4, bump).h) <= 1e-12
    assert mass(out[1]) == pytest.approx(mass(bump), rel=1e-12)


# ---------------------------------------------------------
# Errors
# ---------------------------------------------------------
def test_evolve_errors(grid, bump, euclid_bump):
    cfg = SolverConfig(dt=0.01, t_end=0.05)
    with pytest.raises(GridMismatch):
        evolve(euclid_bump, cfg)
    with pytest.raises(GridMismatch):
        evolve(bump, SolverConfig(dt=0.01, t_end=0.05, r_max=20.0, n=256))
    bad = bump.with_h(np.where(grid.r > 5, np.nan, bump.h))
    with pytest.raises(NonFiniteState):
        evolve(bad, cfg)
    edge = gaussian(grid, Geometry.HYPERBOLIC, 1e-6, 0.3, center=19.5)
    with pytest.raises(BoundaryMassExceeded):
        evolve(edge, cfg)


def test_linear_flow_matches_closed_form():
    # sinh(r) e^{-r^2/2} splits into two shifted Gaussians that spread freely in h
    grid = RadialGrid(40.0, 1024)
    phi = gaussian(grid, Geometry.HYPERBOLIC)
    t = 2.0
    r = grid.r
    c = 1.0 + 2.0j * t
    h = np.exp(0.5 - 1j * t) / 2 / np.sqrt(c) * (np.exp(-(r - 1) ** 2 / (2 * c)) - np.exp(-(r + 1) ** 2 / (2 * c)))
    inside = r <= 20.0
    out = linear_solution(phi, [t])[0]
    np.testing.assert_allclose(out.h[inside], h[inside], atol=1e-10)
