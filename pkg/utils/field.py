"""
Field state, norms, energies, and the operators that move data between
R^3 and H^3 (regularize, rescale, transplant through the chart Psi_I).

Conventions
-----------
* dmu = 4 pi sinh^2 r dr on H^3 and 4 pi r^2 dr on R^3.
* mass      E0 = int |u|^2 dmu
* kinetic   int |grad u|^2 dmu = 4 pi dr sum (lambda^2 + rho^2) |y_m|^2, where y
            are the orthonormal sine coefficients of h. On H^3 this is also
            ||(-Delta)^{1/2} u||^2 since int |grad u|^2 = 4 pi int (|h'|^2 + |h|^2) dr,
            so no mass correction is needed.
* energy    E1 = kinetic / 2 + (1/6) int |u|^6 dmu
* h1_norm always uses (lambda^2 + 1) on H^3 and lambda^2 (homogeneous) on R^3.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import Optional

import numpy as np
from scipy.interpolate import CubicSpline

from utils.errors import ScaleTooSmall
from utils.grid import Geometry, RadialField, RadialGrid, SpectralField  # noqa: F401
from utils.radial_transform import heat_flow, radial_derivative_h, schrodinger_flow, sine_coefficients


@dataclass
class EnergyReport:
    mass: float
    kinetic: float
    potential: float
    energy: float

    def to_dict(self) -> dict:
        return asdict(self)


# ---------------------------------------------------------
# Quadrature
# ---------------------------------------------------------
def weighted_power_sum(a: np.ndarray, q: float, grid: RadialGrid, geometry: Geometry) -> float:
    """4 pi dr sum |a|^q w^{2-q}, i.e. int |a/w|^q dmu, evaluated in log space."""
    mag = np.abs(a)
    nz = mag > 0
    if not np.any(nz):
        return 0.0
    logw = grid.log_weight(geometry)[nz]
    terms = np.exp(q * np.log(mag[nz]) + (2.0 - q) * logw)
    return float(4.0 * np.pi * grid.dr * np.sum(terms))


def integrate(f: RadialField, density: np.ndarray) -> float:
    """int g dmu for g given at the nodes (g must decay where w^2 is large)."""
    w2 = np.exp(2.0 * f.grid.log_weight(f.geometry))
    return float(4.0 * np.pi * f.grid.dr * np.sum(density * w2))


# ---------------------------------------------------------
# Norms and energies
# ---------------------------------------------------------
def lp_norm(f: RadialField, p: float) -> float:
    if p < 1:
        raise ValueError("p must be >= 1")
    if np.isinf(p):
        return float(np.max(np.abs(f.u))) if f.h.size else 0.0
    return weighted_power_sum(f.h, p, f.grid, f.geometry) ** (1.0 / p)


def mass(f: RadialField) -> float:
    return float(4.0 * np.pi * f.grid.dr * np.sum(np.abs(f.h) ** 2))


def kinetic_energy(f: RadialField) -> float:
    y = sine_coefficients(f)
    mu = f.grid.lam ** 2 + f.geometry.rho2
    return float(4.0 * np.pi * f.grid.dr * np.sum(mu * np.abs(y) ** 2))


def h1_norm(f: RadialField) -> float:
    """||(-Delta)^{1/2} f||_{L^2}: H^1 on H^3, homogeneous H^1 on R^3."""
    return float(np.sqrt(kinetic_energy(f)))


def h1_inner(f: RadialField, g: RadialField) -> complex:
    f.grid.require_match(g.grid)
    mu = f.grid.lam ** 2 + f.geometry.rho2
    return complex(4.0 * np.pi * f.grid.dr * np.sum(mu * sine_coefficients(f) * np.conj(sine_coefficients(g))))


def potential_energy(f: RadialField) -> float:
    return weighted_power_sum(f.h, 6.0, f.grid, f.geometry) / 6.0


def compute_energy(f: RadialField) -> EnergyReport:
    kin = kinetic_energy(f)
    pot = potential_energy(f)
    return EnergyReport(mass=mass(f), kinetic=kin, potential=pot, energy=0.5 * kin + pot)


def gradient_lp_norm(f: RadialField, q: float) -> float:
    """(int |du/dr|^q dmu)^{1/q} with a spectral derivative of h."""
    a = radial_derivative_h(f) - f.grid.log_derivative(f.geometry) * f.h
    return weighted_power_sum(a, q, f.grid, f.geometry) ** (1.0 / q)


# ---------------------------------------------------------
# Cutoff and data families
# ---------------------------------------------------------
def _flat(x: np.ndarray) -> np.ndarray:
    """e^{-1/x} for x > 0, 0 otherwise (smooth, all derivatives vanish at 0)."""
    with np.errstate(divide="ignore"):
        return np.where(x > 0, np.exp(-1.0 / np.where(x > 0, x, 1.0)), 0.0)


def cutoff(s) -> np.ndarray:
    """Smooth radial cutoff: 1 on [0, 1], 0 on [2, inf), C-infinity blend between."""
    s = np.abs(np.asarray(s, dtype=float))
    a, b = _flat(2.0 - s), _flat(s - 1.0)
    return a / (a + b)


def gaussian(grid: RadialGrid, geometry: Geometry = Geometry.HYPERBOLIC, amplitude: float = 1.0,
             width: float = 1.0, center: float = 0.0) -> RadialField:
    return RadialField.from_values(
        grid, geometry, lambda r: amplitude * np.exp(-0.5 * ((r - center) / width) ** 2)
    )


def scaled_bump(grid: RadialGrid, scale: float, geometry: Geometry = Geometry.HYPERBOLIC,
                amplitude: float = 1.0) -> RadialField:
    """Energy-critical rescaling N^{1/2} e^{-(N r)^2 / 2} of the unit Gaussian."""
    return RadialField.from_values(
        grid, geometry, lambda r: amplitude * np.sqrt(scale) * np.exp(-0.5 * (scale * r) ** 2)
    )


DATA_FAMILIES = ("zero", "gaussian", "bump", "ring")


def initial_data(grid: RadialGrid, geometry: Geometry, family: str = "gaussian",
                 amplitude: float = 1.0, scale: float = 1.0, width: float = 1.0,
                 center: float = 0.0) -> RadialField:
    if family == "zero":
        return RadialField.zeros(grid, geometry)
    if family == "gaussian":
        return gaussian(grid, geometry, amplitude, width)
    if family == "bump":
        return scaled_bump(grid, scale, geometry, amplitude)
    if family == "ring":
        return gaussian(grid, geometry, amplitude, width, center)
    raise ValueError(f"unknown data family '{family}' (expected one of {DATA_FAMILIES})")


# ---------------------------------------------------------
# Sampling off the grid
# ---------------------------------------------------------
def profile_spline(f: RadialField) -> CubicSpline:
    """Natural cubic spline of h through (0, 0), the nodes, and (r_max, 0)."""
    g = f.grid
    nodes = np.concatenate([[0.0], g.r, [g.r_max]])
    values = np.concatenate([[0.0], f.h, [0.0]])
    return CubicSpline(nodes, values, bc_type="natural")


def evaluate(f: RadialField, r) -> np.ndarray:
    """u at arbitrary radii; zero beyond r_max, h'(0) at the origin."""
    r = np.asarray(r, dtype=float)
    spline = profile_spline(f)
    inside = (r > 0) & (r < f.grid.r_max)
    out = np.zeros(r.shape, dtype=complex)
    rr = r[inside]
    w = np.sinh(rr) if f.geometry is Geometry.HYPERBOLIC else rr
    out[inside] = spline(rr) / w
    # u(0) = h'(0) for both weights
    out[r == 0] = spline(0.0, 1)
    return out


# ---------------------------------------------------------
# Moving data between R^3 and H^3
# ---------------------------------------------------------
def regularize(phi: RadialField, N: float) -> RadialField:
    """Q_N phi = eta(x / N^{1/2}) (e^{Delta/N} phi)(x) on the Euclidean grid."""
    smoothed = heat_flow(1.0 / N, phi)
    return smoothed.with_h(smoothed.h * cutoff(phi.grid.r / np.sqrt(N)))


def transplant(v: RadialField, N: float, grid: RadialGrid, R: Optional[float] = None) -> RadialField:
    """Hyperbolic field N^{1/2} (eta(./R) v)(N sinh r) on grid; R = None means no cutoff."""
    rho = N * np.sinh(grid.r)
    values = np.sqrt(N) * evaluate(v, rho)
    if R is not None:
        values = values * cutoff(rho / R)
    return RadialField.from_values(grid, Geometry.HYPERBOLIC, values)


def pullback(f: RadialField, N: float, grid: RadialGrid, R: float) -> RadialField:
    """Euclidean field eta(rho/R) N^{-1/2} u(asinh(rho / N)), the inverse of transplant."""
    rho = grid.r
    values = cutoff(rho / R) * evaluate(f, np.arcsinh(rho / N)) / np.sqrt(N)
    return RadialField.from_values(grid, Geometry.EUCLIDEAN, values)


def default_transplant_grid(phi: RadialField, N: float) -> RadialGrid:
    return RadialGrid(float(np.arcsinh(phi.grid.r_max / N)), phi.grid.n)


def rescaled_profile(phi: RadialField, N: float, grid: Optional[RadialGrid] = None) -> RadialField:
    """T_N phi = N^{1/2} (Q_N phi)(N Psi_I^{-1}(x)) as a hyperbolic field."""
    if N < 1:
        raise ScaleTooSmall(f"T_N needs N >= 1, got {N}")
    grid = grid or default_transplant_grid(phi, N)
    return transplant(regularize(phi, N), N, grid)


def euclidean_rescale(phi: RadialField, N: float, grid: Optional[RadialGrid] = None) -> RadialField:
    """phi_N(x) = N^{1/2} (Q_N phi)(N x) on a Euclidean grid (default r_max / N)."""
    q = regularize(phi, N)
    grid = grid or RadialGrid(phi.grid.r_max / N, phi.grid.n)
    values = np.sqrt(N) * evaluate(q, N * grid.r)
    return RadialField.from_values(grid, Geometry.EUCLIDEAN, values)


def time_translate(f: RadialField, t0: float) -> RadialField:
    """Pi_{t0} f = e^{-i t0 Delta} f (translations are the identity on radial data)."""
    return schrodinger_flow(-t0, f)
