"""
Radial Fourier (Helgason) calculus on H^3.

For a radial u with reduced profile h = sinh(r) u(r) the Laplace-Beltrami
operator acts as h'' - h, so the orthonormal DST-I on the Dirichlet grid
diagonalizes it with eigenvalues -(lambda_m^2 + 1). The transform is

    f~(lambda) = (4 pi / lambda) * int_0^inf sin(lambda r) sinh(r) u(r) dr

and is inverted with the Plancherel density |c(lambda)|^{-2} = lambda^2 / (2 pi^2):

    u(r) = int_0^inf f~(lambda) Phi_lambda(r) |c(lambda)|^{-2} dlambda,
    Phi_lambda(r) = sin(lambda r) / (lambda sinh r).

On the grid both formulas collapse to the DST-I up to the scale factor
dr * sqrt((n+1)/2), which makes the discrete Plancherel identity exact. The
Euclidean case (h = r u, multiplier lambda^2) uses the same formulas.
"""

from __future__ import annotations

import logging
from typing import Callable, Tuple, Union

import numpy as np
import scipy.fft
from scipy import integrate

from utils.errors import NonDecayedBoundary, NonFiniteMultiplier
from utils.grid import Geometry, RadialField, RadialGrid, SpectralField

log = logging.getLogger(__name__)

# f = c * int_0^inf N^{-1} P_N f dN; int_0^inf -u e^{-u} dN/N = -1/2 with u = (lambda^2+1)/N^2
RECONSTRUCTION_CONSTANT = -2.0

BOUNDARY_TOLERANCE = 1e-10

Multiplier = Union[Callable[[np.ndarray], np.ndarray], np.ndarray]


# ---------------------------------------------------------
# Discrete sine transform helpers
# ---------------------------------------------------------
def dst1(x: np.ndarray) -> np.ndarray:
    """Orthonormal DST-I along the last axis; it is its own inverse."""
    x = np.asarray(x)
    if np.iscomplexobj(x):
        return (scipy.fft.dst(x.real, type=1, norm="ortho", axis=-1)
                + 1j * scipy.fft.dst(x.imag, type=1, norm="ortho", axis=-1))
    return scipy.fft.dst(x, type=1, norm="ortho", axis=-1)


def _scale(grid: RadialGrid) -> float:
    return grid.dr * np.sqrt((grid.n + 1) / 2.0)


def sine_coefficients(f: RadialField) -> np.ndarray:
    """Orthonormal sine coefficients y of the profile h (no decay check)."""
    return dst1(f.h)


def from_sine_coefficients(grid: RadialGrid, geometry: Geometry, y: np.ndarray) -> RadialField:
    return RadialField(grid, geometry, dst1(y))


def c_function_density(lam: np.ndarray) -> np.ndarray:
    """|c(lambda)|^{-2} for d = 3."""
    return np.asarray(lam) ** 2 / (2.0 * np.pi ** 2)


def spherical_function(lam: float, r: np.ndarray, geometry: Geometry = Geometry.HYPERBOLIC) -> np.ndarray:
    """Phi_lambda(r) = sin(lambda r) / (lambda sinh r), with Phi_lambda(0) = 1."""
    r = np.asarray(r, dtype=float)
    w = np.sinh(r) if Geometry(geometry) is Geometry.HYPERBOLIC else r
    with np.errstate(invalid="ignore", divide="ignore"):
        out = np.sin(lam * r) / (lam * w)
    return np.where(r == 0, 1.0, out)


# ---------------------------------------------------------
# Forward / inverse transform
# ---------------------------------------------------------
def check_decay(f, tolerance=BOUNDARY_TOLERANCE):
    peak = np.max(np.abs(f.h)) if f.h.size else 0.0
    edge = abs(f.h[-1])
    if peak > 0 and edge > tolerance * peak:
        raise NonDecayedBoundary(
            f"profile at r_max is {edge / peak:.2e} of its peak (tolerance {tolerance:.0e})"
        )


def helgason_forward(f: RadialField, grid: RadialGrid = None,
                     tolerance: float = BOUNDARY_TOLERANCE) -> SpectralField:
    if grid is not None:
        grid.require_match(f.grid)
    check_decay(f, tolerance)
    y = sine_coefficients(f)
    coeffs = 4.0 * np.pi / f.grid.lam * _scale(f.grid) * y
    return SpectralField(f.grid, f.geometry, coeffs)


def helgason_inverse(F: SpectralField, grid: RadialGrid = None) -> RadialField:
    if grid is not None:
        grid.require_match(F.grid)
    y = F.coeffs * F.grid.lam / (4.0 * np.pi * _scale(F.grid))
    return from_sine_coefficients(F.grid, F.geometry, y)


def transform_quadrature(u: Callable[[np.ndarray], np.ndarray], lam: float, r_max: float,
                         geometry: Geometry = Geometry.HYPERBOLIC) -> complex:
    """Direct quadrature of int u Phi_{-lambda} dmu over [0, r_max] (oracle for helgason_forward)."""
    geometry = Geometry(geometry)
    w = np.sinh if geometry is Geometry.HYPERBOLIC else (lambda r: r)

    def part(fn):
        val, _ = integrate.quad(lambda r: 4.0 * np.pi / lam * w(r) * fn(r), 0.0, r_max,
                                weight="sin", wvar=lam, limit=400)
        return val

    re = part(lambda r: np.real(u(r)))
    im = part(lambda r: np.imag(u(r)))
    return re + 1j * im


# ---------------------------------------------------------
# Multipliers
# ---------------------------------------------------------
def apply_multiplier(m: Multiplier, F: SpectralField) -> SpectralField:
    values = m(F.lam) if callable(m) else np.asarray(m)
    values = np.broadcast_to(values, F.coeffs.shape)
    if not np.all(np.isfinite(values)):
        raise NonFiniteMultiplier("multiplier is not finite on the lambda grid")
    return SpectralField(F.grid, F.geometry, values * F.coeffs)


def apply_symbol(f: RadialField, symbol: Callable[[np.ndarray], np.ndarray]) -> RadialField:
    """Apply a function of (lambda^2 + rho^2) to f through its sine coefficients."""
    mu = f.grid.lam ** 2 + f.geometry.rho2
    values = symbol(mu)
    if not np.all(np.isfinite(values)):
        raise NonFiniteMultiplier("multiplier is not finite on the lambda grid")
    return from_sine_coefficients(f.grid, f.geometry, values * sine_coefficients(f))


def fractional_laplacian(s: float, f: RadialField) -> RadialField:
    """(-Delta)^{s/2}, symbol (lambda^2 + rho^2)^{s/2}."""
    if not -2.0 <= s <= 4.0:
        raise ValueError(f"s must lie in [-2, 4], got {s}")
    return apply_symbol(f, lambda mu: mu ** (s / 2.0))


def schrodinger_multiplier(t: float, geometry: Geometry, grid: RadialGrid) -> np.ndarray:
    return np.exp(-1j * t * (grid.lam ** 2 + Geometry(geometry).rho2))


def schrodinger_flow(t: float, f: RadialField) -> RadialField:
    """e^{it Delta}: multiplier e^{-it(lambda^2 + rho^2)}, unitary on the grid."""
    y = sine_coefficients(f) * schrodinger_multiplier(t, f.geometry, f.grid)
    return from_sine_coefficients(f.grid, f.geometry, y)


def heat_flow(z: float, f: RadialField) -> RadialField:
    if z < 0:
        raise ValueError("heat flow needs z >= 0")
    return apply_symbol(f, lambda mu: np.exp(-z * mu))


def littlewood_paley_multiplier(N: float, mu: np.ndarray) -> np.ndarray:
    """Symbol of P_N = N^{-2} Delta e^{N^{-2} Delta} as a function of mu = lambda^2 + rho^2."""
    u = np.asarray(mu) / (N * N)
    return -u * np.exp(-u)


def littlewood_paley(N: float, f: RadialField) -> RadialField:
    if N <= 0:
        raise ValueError("P_N needs N > 0")
    return apply_symbol(f, lambda mu: littlewood_paley_multiplier(N, mu))


def littlewood_paley_reconstruct(f: RadialField, n_min: float = 1e-2, n_max: float = 1e5,
                                 points_per_octave: int = 24) -> RadialField:
    """c * int N^{-1} P_N f dN with trapezoid quadrature in log N."""
    octaves = np.log2(n_max / n_min)
    log_n = np.linspace(np.log(n_min), np.log(n_max), int(np.ceil(octaves * points_per_octave)) + 1)
    mu = f.grid.lam ** 2 + f.geometry.rho2
    # stack of P_N symbols; integrating the symbols first is the same as summing P_N f
    symbols = littlewood_paley_multiplier(np.exp(log_n)[:, None], mu[None, :])
    total = integrate.trapezoid(symbols, log_n, axis=0)
    y = RECONSTRUCTION_CONSTANT * total * sine_coefficients(f)
    return from_sine_coefficients(f.grid, f.geometry, y)


# ---------------------------------------------------------
# Heat kernel and P_N kernel
# ---------------------------------------------------------
def _log_sinh(r: np.ndarray) -> np.ndarray:
    r = np.asarray(r, dtype=float)
    return np.abs(r) + np.log1p(-np.exp(-2.0 * np.abs(r))) - np.log(2.0)


def heat_kernel_closed_form(z: float, r) -> np.ndarray:
    """(4 pi z)^{-3/2} e^{-z} (r / sinh r) e^{-r^2 / 4z}; r / sinh r -> 1 at r = 0."""
    if z <= 0:
        raise ValueError("heat kernel needs z > 0")
    r = np.asarray(r, dtype=float)
    safe = np.where(r > 0, r, 1.0)
    ratio = np.where(r > 0, np.exp(np.log(safe) - _log_sinh(safe)), 1.0)
    return (4.0 * np.pi * z) ** -1.5 * np.exp(-z) * ratio * np.exp(-r * r / (4.0 * z))


def heat_kernel_field(z: float, grid: RadialGrid) -> RadialField:
    """Closed-form kernel stored as h = sinh(r) k(r) = (4 pi z)^{-3/2} e^{-z} r e^{-r^2/4z}."""
    r = grid.r
    h = (4.0 * np.pi * z) ** -1.5 * np.exp(-z) * r * np.exp(-r * r / (4.0 * z))
    return RadialField(grid, Geometry.HYPERBOLIC, h)


def heat_kernel_spectral(z: float, grid: RadialGrid) -> RadialField:
    """e^{z Delta} delta_0 built from its transform e^{-z(lambda^2+1)}."""
    F = SpectralField(grid, Geometry.HYPERBOLIC, np.exp(-z * (grid.lam ** 2 + 1.0)))
    return helgason_inverse(F)


def heat_kernel_mass(z: float, grid: RadialGrid) -> Tuple[float, float]:
    """(quadrature of int k dmu, transform e^{-z(lambda^2+1)} at lambda = i rho).

    The heat semigroup is stochastic on H^3, so the reference is 1 for every z.
    """
    r = grid.r
    integrand = np.exp(_log_sinh(r) - r * r / (4.0 * z)) * r
    quad = 4.0 * np.pi * grid.dr * (4.0 * np.pi * z) ** -1.5 * np.exp(-z) * np.sum(integrand)
    lam = 1j
    return float(quad), float(np.real(np.exp(-z * (lam * lam + 1.0))))


def littlewood_paley_kernel(N: float, r) -> np.ndarray:
    """Radial kernel of P_N: z d/dz of the heat kernel at z = N^{-2}."""
    z = 1.0 / (N * N)
    r = np.asarray(r, dtype=float)
    return heat_kernel_closed_form(z, r) * (-1.5 - z + r * r / (4.0 * z))


def littlewood_paley_kernel_spectral(N: float, grid: RadialGrid) -> RadialField:
    mu = grid.lam ** 2 + 1.0
    F = SpectralField(grid, Geometry.HYPERBOLIC, littlewood_paley_multiplier(N, mu))
    return helgason_inverse(F)


# ---------------------------------------------------------
# Radial convolution
# ---------------------------------------------------------
def radial_convolve(f: RadialField, kernel: RadialField) -> RadialField:
    """f * K for a radial kernel K, computed as the product of transforms."""
    f.grid.require_match(kernel.grid)
    K = helgason_forward(kernel, tolerance=np.inf)
    return from_sine_coefficients(f.grid, f.geometry, sine_coefficients(f) * K.coeffs)


def radial_convolve_direct(u: Callable[[np.ndarray], np.ndarray],
                           kernel: Callable[[np.ndarray], np.ndarray],
                           r_points: np.ndarray, s_max: float,
                           n_radial: int = 400, n_angular: int = 64) -> np.ndarray:
    """(f * K)(r) = int f(y) K(d(x, y)) dmu(y) by Gauss-Legendre quadrature,
    with cosh d = cosh r cosh s - sinh r sinh s cos(theta)."""
    s_nodes, s_w = np.polynomial.legendre.leggauss(n_radial)
    s = 0.5 * s_max * (s_nodes + 1.0)
    s_w = 0.5 * s_max * s_w
    c, c_w = np.polynomial.legendre.leggauss(n_angular)
    out = []
    for r in np.atleast_1d(r_points):
        cosh_d = np.cosh(r) * np.cosh(s)[:, None] - np.sinh(r) * np.sinh(s)[:, None] * c[None, :]
        d = np.arccosh(np.maximum(cosh_d, 1.0))
        inner = kernel(d) @ c_w
        out.append(2.0 * np.pi * np.sum(s_w * np.sinh(s) ** 2 * u(s) * inner))
    return np.asarray(out)


# ---------------------------------------------------------
# Plancherel
# ---------------------------------------------------------
def plancherel_pairing(f: RadialField, g: RadialField) -> Tuple[complex, complex]:
    """(int f conj(g) dmu, 1/2 int_R f~ conj(g~) |c|^{-2} dlambda) on the grid."""
    f.grid.require_match(g.grid)
    lhs = 4.0 * np.pi * f.grid.dr * np.sum(f.h * np.conj(g.h))
    F = helgason_forward(f, tolerance=np.inf)
    G = helgason_forward(g, tolerance=np.inf)
    # the lambda-integrand is even, so half the integral over R is the sum over lambda_m > 0
    rhs = np.sum(F.coeffs * np.conj(G.coeffs) * c_function_density(F.lam)) * f.grid.dlam
    return complex(lhs), complex(rhs)


def plancherel_check(f: RadialField) -> Tuple[float, float]:
    lhs, rhs = plancherel_pairing(f, f)
    return float(lhs.real), float(rhs.real)


def finite_difference_symbol(f: RadialField) -> RadialField:
    """Second difference h'' - rho^2 h with h(0) = h(r_max) = 0."""
    h = np.concatenate([[0.0], f.h, [0.0]])
    d2 = (h[2:] - 2.0 * h[1:-1] + h[:-2]) / f.grid.dr ** 2
    return f.with_h(d2 - f.geometry.rho2 * f.h)


def radial_derivative_h(f: RadialField) -> np.ndarray:
    """Spectral h' at the interior nodes (cosine series of the sine coefficients)."""
    y = sine_coefficients(f)
    n = f.grid.n
    padded = np.zeros(n + 2, dtype=complex)
    padded[1:-1] = f.grid.lam * y
    # DCT-I of length n+2: X_k = 2 sum_m x_m cos(pi m k / (n+1)) when the end samples vanish
    dct = (scipy.fft.dct(padded.real, type=1) + 1j * scipy.fft.dct(padded.imag, type=1))
    return 0.5 * np.sqrt(2.0 / (n + 1)) * dct[1:-1]


def radial_gradient(f: RadialField) -> np.ndarray:
    """d u / dr at the interior nodes: (h' - (w'/w) h) / w."""
    g = f.grid
    hp = radial_derivative_h(f)
    return (hp - g.log_derivative(f.geometry) * f.h) * g.inv_weight(f.geometry)
