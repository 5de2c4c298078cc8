import numpy as np
import pytest
from scipy import integrate

from utils.diagnostics import (
    MorawetzWeight,
    action_rate,
    action_rate_order,
    corpus_constant,
    default_scale_grid,
    dispersive_decay_check,
    hessian_term,
    kernel_decay_check,
    linear_l2l6,
    local_smoothing_check,
    local_smoothing_scan,
    morawetz_action,
    morawetz_identity_check,
    morawetz_inequality_check,
    morawetz_inequality_corpus,
    refined_sobolev_check,
    refinement_order,
    sobolev_embedding_check,
    strichartz_accumulators,
    verdict,
    weight_identities,
)
from utils.errors import BoundaryMassExceeded
from utils.field import gaussian, h1_norm, scaled_bump, weighted_power_sum
from utils.grid import Geometry, RadialField, RadialGrid
from utils.propagator import SolverConfig, evolve


def test_verdict_shape():
    v = verdict("x", 1, 2.0, None, 1, extra=3)
    assert v == {"check": "x", "lhs": 1.0, "rhs": 2.0, "constant": None, "pass": True, "extra": 3}


# ---------------------------------------------------------
# Morawetz weight
# ---------------------------------------------------------
def test_morawetz_weight_basics():
    with pytest.raises(ValueError):
        MorawetzWeight(0.5)
    assert MorawetzWeight(np.inf).eps == 0.0
    r = np.linspace(0.01, 10, 500)
    np.testing.assert_allclose(MorawetzWeight(np.inf).a(r), r, rtol=1e-12)
    assert np.all(MorawetzWeight(np.inf).d2r_a(r) == 0)
    for N in (1.0, 3.0, 10.0):
        w = MorawetzWeight(N)
        assert np.max(w.gradient_sq(r)) <= 1.0
        assert np.all(w.d2r_a(r) > 0)


@pytest.mark.parametrize("N", [1.0, 2.0, 4.0])
def test_weight_identities(N):
    out = weight_identities(MorawetzWeight(N))
    assert out["pass"]
    assert out["max_grad_sq"] <= 1.0
    assert out["laplacian_rel_error"] <= 1e-6


def test_morawetz_action_vanishes_for_real_data(bump):
    assert morawetz_action(bump, MorawetzWeight(1.0)) == pytest.approx(0.0, abs=1e-14)
    assert hessian_term(bump, MorawetzWeight(np.inf)) == 0.0
    assert hessian_term(bump, MorawetzWeight(1.0)) > 0


def test_morawetz_identity_on_linear_flow(bump):
    cfg = SolverConfig(dt=1e-3, t_end=0.05, nonlinearity_on=False)
    out = morawetz_identity_check(evolve(bump * 2.0, cfg), MorawetzWeight(1.0))
    assert out["pass"]
    assert out["max_mismatch"] <= 0.03


def test_morawetz_identity_needs_three_snapshots(bump):
    traj = evolve(bump, SolverConfig(dt=0.01, t_end=0.01))
    with pytest.raises(ValueError):
        morawetz_identity_check(traj, MorawetzWeight(1.0))


def test_refinement_order():
    assert refinement_order(4.0, 1.0) == pytest.approx(2.0)
    assert refinement_order(1.0, 1.0) == 0.0
    assert refinement_order(1.0, 0.0) == np.inf
    assert np.isnan(refinement_order(0.0, 0.0))


def test_action_rate_self_converges_at_second_order(bump):
    w = MorawetzWeight(1.0)
    trajs = [evolve(bump, SolverConfig(dt=dt, t_end=0.04, nonlinearity_on=False, record_every=1))
             for dt in (4e-3, 2e-3, 1e-3)]
    times, rate = action_rate(trajs[0], w)
    assert len(times) == len(rate) == 9
    assert action_rate_order(trajs, w) == pytest.approx(2.0, abs=0.3)
    with pytest.raises(ValueError):
        action_rate_order(trajs[:2], w)


def test_morawetz_inequality_corpus(grid):
    cfg = SolverConfig(dt=0.01, t_end=0.3)
    trajs = [evolve(gaussian(grid, Geometry.HYPERBOLIC, 0.6, w), cfg) for w in (0.8, 1.0, 1.5)]
    lhs, rhs, ratio = morawetz_inequality_check(trajs[0])
    assert lhs > 0 and rhs > 0 and ratio == pytest.approx(lhs / rhs)
    fitted = morawetz_inequality_corpus(trajs)
    assert fitted["pass"]
    assert fitted["spread"] >= 1.0
    assert not morawetz_inequality_corpus(trajs, frozen=0.5 * fitted["constant"])["pass"]


# ---------------------------------------------------------
# Dispersive decay
# ---------------------------------------------------------
def test_dispersive_decay_euclidean_closed_form():
    grid = RadialGrid(400.0, 8192)
    phi = gaussian(grid, Geometry.EUCLIDEAN)
    times = np.geomspace(5.0, 30.0, 8)
    fit = dispersive_decay_check(phi, times, 1.2)
    # ||e^{it Delta} e^{-r^2/2}||_6 = (pi/3)^{1/4} (1 + 4 t^2)^{-1/2}
    np.testing.assert_allclose(fit.norms, (np.pi / 3) ** 0.25 / np.sqrt(1 + 4 * times ** 2), rtol=1e-6)
    assert abs(fit.exponent + 1.0) <= 0.02
    assert fit.bound == pytest.approx(-0.9)


def test_dispersive_decay_hyperbolic_beats_bound():
    grid = RadialGrid(300.0, 8192)
    fit = dispersive_decay_check(gaussian(grid, Geometry.HYPERBOLIC), np.geomspace(2.0, 20.0, 10), 1.2)
    assert fit.passes
    assert fit.to_dict()["pass"]


def test_dispersive_decay_errors(grid, bump):
    with pytest.raises(ValueError):
        dispersive_decay_check(bump, [1.0, 2.0], 2.5)
    with pytest.raises(BoundaryMassExceeded):
        dispersive_decay_check(bump, [1.0, 30.0], 1.2)


# ---------------------------------------------------------
# Sobolev and smoothing
# ---------------------------------------------------------
def test_refined_sobolev_check(fine_grid):
    f = scaled_bump(fine_grid, 4.0)
    n_grid = default_scale_grid(fine_grid)
    out = refined_sobolev_check(f, n_grid)
    assert out["lhs"] > 0 and out["rhs"] > 0
    assert out["constant"] == pytest.approx(out["lhs"] / out["rhs"])
    assert n_grid[0] <= out["n_star"] <= n_grid[-1]
    assert refined_sobolev_check(RadialField.zeros(fine_grid))["constant"] == 0.0


def test_corpus_constant():
    rows = [{"lhs": 1.0, "rhs": 2.0}, {"lhs": 3.0, "rhs": 4.0}]
    out = corpus_constant(rows, "c")
    assert out["constant"] == pytest.approx(0.75)
    assert out["pass"]
    assert not corpus_constant(rows, "c", frozen=0.6)["pass"]
    assert not corpus_constant(rows, "c", ceiling=0.5)["pass"]


def test_sobolev_embedding_is_stable(fine_grid):
    fields = [scaled_bump(fine_grid, s) for s in np.geomspace(1.0, 8.0, 8)]
    out = sobolev_embedding_check(fields)
    assert out["pass"]
    assert out["stability"] <= 0.1


def test_local_smoothing_guards(bump):
    with pytest.raises(ValueError):
        local_smoothing_check(bump, 4.0, 2.0)
    with pytest.raises(ValueError):
        local_smoothing_check(bump, 0.5, 2.0)
    with pytest.raises(ValueError):
        local_smoothing_scan(bump * (2.0 / h1_norm(bump)), 2.0, [4.0, 8.0])


def test_local_smoothing_scan_decays(fine_grid):
    psi = scaled_bump(fine_grid, 4.0)
    psi = psi * (0.999 / h1_norm(psi))
    out = local_smoothing_scan(psi, 2.0, [16.0, 4.0, 8.0])
    assert out["K"] == [4.0, 8.0, 16.0]
    assert len(out["doubling_ratios"]) == 2
    assert out["constant"] > 0


def test_kernel_decay_check():
    out = kernel_decay_check(2.0, RadialGrid(30.0, 1024))
    assert out["pass"]
    assert out["spectral_error"] <= 1e-6


# ---------------------------------------------------------
# Space-time norms
# ---------------------------------------------------------
def test_strichartz_accumulators(grid, bump):
    traj = evolve(bump, SolverConfig(dt=0.01, t_end=0.2, record_every=2))
    acc = strichartz_accumulators(traj)
    assert set(acc) == {"Z", "L2L6", "L10L30_13_grad", "N1"}
    p10 = [weighted_power_sum(f.h, 10.0, grid, Geometry.HYPERBOLIC) for f in traj.fields]
    assert acc["Z"] == pytest.approx(integrate.trapezoid(p10, traj.times) ** 0.1, rel=1e-12)
    assert all(v > 0 for v in acc.values())

    zero = evolve(RadialField.zeros(grid), SolverConfig(dt=0.01, t_end=0.05))
    assert all(v == 0 for v in strichartz_accumulators(zero).values())


def test_linear_l2l6(grid, bump):
    assert linear_l2l6(RadialField.zeros(grid), np.linspace(0, 1, 5)) == 0.0
    assert linear_l2l6(bump * 2.0, [0.0, 0.5]) == pytest.approx(2.0 * linear_l2l6(bump, [0.0, 0.5]))
