import numpy as np
import pytest

from utils.errors import ScaleTooSmall
from utils.field import (
    DATA_FAMILIES,
    compute_energy,
    cutoff,
    euclidean_rescale,
    evaluate,
    gaussian,
    gradient_lp_norm,
    h1_inner,
    h1_norm,
    initial_data,
    kinetic_energy,
    lp_norm,
    mass,
    potential_energy,
    pullback,
    regularize,
    rescaled_profile,
    time_translate,
    transplant,
)
from utils.grid import Geometry, RadialField, RadialGrid
from utils.radial_transform import schrodinger_flow


def rel(a, b):
    return np.linalg.norm(a - b) / np.linalg.norm(b)


# ---------------------------------------------------------
# Norms
# ---------------------------------------------------------
@pytest.mark.parametrize("p", [1.0, 2.0, 3.5, 6.0, np.inf])
def test_lp_norm_homogeneity(bump, p):
    assert lp_norm(bump * (-2.5j), p) == pytest.approx(2.5 * lp_norm(bump, p), rel=1e-12)


def test_lp_norm_edge_cases(grid, bump):
    assert lp_norm(RadialField.zeros(grid), 6.0) == 0.0
    assert lp_norm(bump, np.inf) == pytest.approx(np.max(np.abs(bump.u)))
    assert lp_norm(bump, 2.0) ** 2 == pytest.approx(mass(bump), rel=1e-12)
    with pytest.raises(ValueError):
        lp_norm(bump, 0.5)


def test_mass_and_potential_match_direct_sums(grid, bump):
    r = grid.r
    u = 0.5 * np.exp(-0.5 * r ** 2)
    dmu = 4 * np.pi * grid.dr * np.sinh(r) ** 2
    assert mass(bump) == pytest.approx(np.sum(u ** 2 * dmu), rel=1e-12)
    assert potential_energy(bump) == pytest.approx(np.sum(u ** 6 * dmu) / 6, rel=1e-10)


@pytest.mark.parametrize("geometry", [Geometry.HYPERBOLIC, Geometry.EUCLIDEAN])
def test_kinetic_energy_is_gradient_norm(grid, geometry):
    f = gaussian(grid, geometry, 0.7, 1.1)
    r = grid.r
    w2 = np.sinh(r) ** 2 if geometry is Geometry.HYPERBOLIC else r ** 2
    du = -0.7 * r / 1.21 * np.exp(-0.5 * (r / 1.1) ** 2)
    direct = 4 * np.pi * grid.dr * np.sum(du ** 2 * w2)
    assert kinetic_energy(f) == pytest.approx(direct, rel=1e-8)
    assert gradient_lp_norm(f, 2.0) ** 2 == pytest.approx(direct, rel=1e-8)
    assert h1_inner(f, f).real == pytest.approx(kinetic_energy(f), rel=1e-12)
    assert h1_norm(f) == pytest.approx(np.sqrt(direct), rel=1e-8)


def test_energy_report(bump):
    e = compute_energy(bump)
    assert e.energy == pytest.approx(0.5 * e.kinetic + e.potential)
    assert set(e.to_dict()) == {"mass", "kinetic", "potential", "energy"}
    assert compute_energy(RadialField.zeros(bump.grid)).energy == 0.0


def test_energy_additive_for_separated_bumps(fine_grid):
    a = gaussian(fine_grid, Geometry.HYPERBOLIC, 0.4, 0.5)
    b = gaussian(fine_grid, Geometry.HYPERBOLIC, 0.4, 0.5, center=8.0)
    total = compute_energy(a + b).energy
    assert total == pytest.approx(compute_energy(a).energy + compute_energy(b).energy, rel=1e-6)


# ---------------------------------------------------------
# Cutoff and data
# ---------------------------------------------------------
def test_cutoff_shape():
    s = np.linspace(0, 3, 301)
    eta = cutoff(s)
    assert np.all(eta[s <= 1] == 1.0)
    assert np.all(eta[s >= 2] == 0.0)
    assert np.all(np.diff(eta) <= 0)
    assert cutoff(1.5) == pytest.approx(0.5)
    assert cutoff(-0.5) == 1.0


def test_initial_data_families(grid):
    for family in DATA_FAMILIES:
        f = initial_data(grid, Geometry.HYPERBOLIC, family, amplitude=0.3, scale=2.0, width=1.0, center=3.0)
        assert f.is_finite()
    assert mass(initial_data(grid, Geometry.HYPERBOLIC, "zero")) == 0.0
    ring = initial_data(grid, Geometry.HYPERBOLIC, "ring", center=3.0)
    assert abs(grid.r[np.argmax(np.abs(ring.u))] - 3.0) < 0.1
    with pytest.raises(ValueError):
        initial_data(grid, Geometry.HYPERBOLIC, "square")


def test_evaluate_off_grid(grid, bump):
    np.testing.assert_allclose(evaluate(bump, grid.r[5:50]), bump.u[5:50], rtol=1e-12)
    assert evaluate(bump, [0.0])[0].real == pytest.approx(0.5, rel=1e-4)
    np.testing.assert_allclose(evaluate(bump, [1.2345]), 0.5 * np.exp(-0.5 * 1.2345 ** 2), rtol=1e-6)
    assert evaluate(bump, [25.0])[0] == 0.0


# ---------------------------------------------------------
# Rescaling between R^3 and H^3
# ---------------------------------------------------------
def test_rescaled_profile_needs_large_scale(euclid_bump):
    with pytest.raises(ScaleTooSmall):
        rescaled_profile(euclid_bump, 0.5)


def test_rescaled_profile_energy_approaches_euclidean():
    phi = gaussian(RadialGrid(20.0, 2048), Geometry.EUCLIDEAN, 0.5)
    target = h1_norm(phi)
    gaps = [abs(h1_norm(rescaled_profile(phi, N)) - target) for N in (4.0, 16.0, 64.0)]
    assert gaps[0] > gaps[1] > gaps[2]
    assert gaps[2] <= 0.1 * target


def test_euclidean_rescale_preserves_homogeneous_norm(euclid_bump):
    q = regularize(euclid_bump, 8.0)
    assert h1_norm(euclidean_rescale(euclid_bump, 8.0)) == pytest.approx(h1_norm(q), rel=1e-10)


def test_pullback_inverts_transplant():
    egrid = RadialGrid(20.0, 1024)
    v = gaussian(egrid, Geometry.EUCLIDEAN, 1.0, 1.5)
    hgrid = RadialGrid(float(np.arcsinh(20.0 / 4.0)), 4096)
    back = pullback(transplant(v, 4.0, hgrid), 4.0, egrid, R=100.0)
    assert rel(back.h, v.h) <= 1e-5


def test_time_translate(grid):
    f = RadialField.from_values(grid, Geometry.HYPERBOLIC, lambda r: np.exp(-r ** 2 + 0.7j * r))
    np.testing.assert_allclose(time_translate(f, 0.0).h, f.h, atol=1e-14)
    a = time_translate(time_translate(f, 0.3), 0.9)
    assert rel(a.h, time_translate(f, 1.2).h) <= 1e-12
    assert rel(time_translate(schrodinger_flow(2.0, f), 2.0).h, f.h) <= 1e-12
