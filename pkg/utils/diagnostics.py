"""
Numerical checks of the estimates the solver is expected to respect:
conservation, dispersive decay, Strichartz-type space-time norms, the
refined Sobolev and local smoothing bounds, and the Morawetz machinery.

Every inequality is one-sided with a fitted constant; constants are compared
against frozen baselines in utils/regression.py. Each check returns a plain
dict (the JSON verdict written by the pipelines) with at least the keys
check, lhs, rhs, constant and pass.
"""

from __future__ import annotations

import logging
from dataclasses import asdict, dataclass
from typing import TYPE_CHECKING, Dict, Iterable, List, Optional, Sequence

import numpy as np
from scipy import integrate, stats

from utils.errors import BoundaryMassExceeded
from utils.field import compute_energy, h1_norm, lp_norm, mass, weighted_power_sum
from utils.grid import Geometry, RadialField, RadialGrid
from utils.radial_transform import (
    from_sine_coefficients,
    littlewood_paley_kernel,
    littlewood_paley_kernel_spectral,
    littlewood_paley_multiplier,
    radial_derivative_h,
    sine_coefficients,
)

if TYPE_CHECKING:
    from utils.propagator import Trajectory

log = logging.getLogger(__name__)

DIAGNOSTIC_COLUMNS = ["t", "mass", "energy", "l6", "z_increment", "morawetz_action", "boundary_mass"]


def verdict(check: str, lhs: float, rhs: float, constant: Optional[float], passed: bool, **extra) -> dict:
    out = {"check": check, "lhs": float(lhs), "rhs": float(rhs),
           "constant": None if constant is None else float(constant), "pass": bool(passed)}
    out.update(extra)
    return out


# ---------------------------------------------------------
# Morawetz weight
# ---------------------------------------------------------
@dataclass
class MorawetzWeight:
    """a = a~(cosh r) with a~'(y) = (y^2 - 1 + N^{-2})^{-1/2}; N = inf gives a = r."""

    N: float = 1.0

    def __post_init__(self):
        if not self.N >= 1:
            raise ValueError(f"Morawetz scale must be >= 1, got {self.N}")

    @property
    def eps(self) -> float:
        return 0.0 if np.isinf(self.N) else 1.0 / (self.N * self.N)

    # -- functions of y = cosh r --
    def a_tilde_prime(self, y) -> np.ndarray:
        y = np.asarray(y, dtype=float)
        return (y * y - 1.0 + self.eps) ** -0.5

    def a_tilde(self, y) -> np.ndarray:
        y = np.asarray(y, dtype=float)
        return np.log(y + np.sqrt(y * y - 1.0 + self.eps))

    def b(self, y) -> np.ndarray:
        """Delta a as a function of y: 3y q^{-1/2} - y(y^2-1) q^{-3/2}, q = y^2 - 1 + eps."""
        y = np.asarray(y, dtype=float)
        q = y * y - 1.0 + self.eps
        return 2.0 * y * q ** -0.5 + self.eps * y * q ** -1.5

    def b_prime(self, y) -> np.ndarray:
        y = np.asarray(y, dtype=float)
        e = self.eps
        q = y * y - 1.0 + e
        return 2.0 * q ** -0.5 - 2.0 * y * y * q ** -1.5 + e * q ** -1.5 - 3.0 * e * y * y * q ** -2.5

    def b_second(self, y) -> np.ndarray:
        y = np.asarray(y, dtype=float)
        e = self.eps
        q = y * y - 1.0 + e
        return (-6.0 * y * q ** -1.5 + 6.0 * y ** 3 * q ** -2.5
                - 9.0 * e * y * q ** -2.5 + 15.0 * e * y ** 3 * q ** -3.5)

    # -- functions of r --
    def a(self, r) -> np.ndarray:
        r = np.asarray(r, dtype=float)
        return np.log(np.cosh(r) + np.sqrt(np.sinh(r) ** 2 + self.eps))

    def dr_a(self, r, geometry: Geometry = Geometry.HYPERBOLIC) -> np.ndarray:
        r = np.asarray(r, dtype=float)
        if Geometry(geometry) is Geometry.EUCLIDEAN:
            return r / np.sqrt(r * r + self.eps)
        with np.errstate(over="ignore", divide="ignore"):
            s2 = np.sinh(r) ** 2
            return np.where(s2 > 0, 1.0 / np.sqrt(1.0 + self.eps / np.where(s2 > 0, s2, 1.0)), 0.0)

    def d2r_a(self, r) -> np.ndarray:
        """eps cosh r (sinh^2 r + eps)^{-3/2}, evaluated in log space."""
        r = np.asarray(r, dtype=float)
        if self.eps == 0:
            return np.zeros_like(r)
        log_sinh = np.abs(r) + np.log1p(-np.exp(-2.0 * np.abs(r))) - np.log(2.0)
        with np.errstate(divide="ignore"):
            log_q = np.logaddexp(2.0 * np.where(r > 0, log_sinh, -np.inf), np.log(self.eps))
        log_cosh = np.abs(r) + np.log1p(np.exp(-2.0 * np.abs(r))) - np.log(2.0)
        return np.exp(np.log(self.eps) + log_cosh - 1.5 * log_q)

    def laplacian(self, r) -> np.ndarray:
        return self.b(np.cosh(r))

    def bilaplacian(self, r) -> np.ndarray:
        """Delta(Delta a) = (y^2 - 1) b'' + 3 y b' at y = cosh r."""
        y = np.cosh(np.asarray(r, dtype=float))
        return (y * y - 1.0) * self.b_second(y) + 3.0 * y * self.b_prime(y)

    def gradient_sq(self, r) -> np.ndarray:
        """|grad a|^2 = sinh^2 r a~'(cosh r)^2."""
        return self.dr_a(r) ** 2


# ---------------------------------------------------------
# Per-snapshot record
# ---------------------------------------------------------
@dataclass
class DiagnosticsRecord:
    t: float
    mass: float
    energy: float
    l6: float
    z_increment: float
    morawetz_action: float
    boundary_mass: float

    def to_dict(self) -> dict:
        return asdict(self)


def _wu_r(f: RadialField) -> np.ndarray:
    """w(r) du/dr = h' - (w'/w) h at the nodes."""
    return radial_derivative_h(f) - f.grid.log_derivative(f.geometry) * f.h


def morawetz_action(u: RadialField, w: MorawetzWeight) -> float:
    """2 Im int da/dr conj(u) du/dr dmu = 8 pi Im int da/dr conj(h) h' dr."""
    hp = radial_derivative_h(u)
    integrand = w.dr_a(u.r, u.geometry) * np.imag(np.conj(u.h) * hp)
    return float(8.0 * np.pi * u.grid.dr * np.sum(integrand))


def make_record(t: float, f: RadialField, w: MorawetzWeight, z_increment: float) -> DiagnosticsRecord:
    e = compute_energy(f)
    return DiagnosticsRecord(
        t=float(t),
        mass=e.mass,
        energy=e.energy,
        l6=lp_norm(f, 6.0),
        z_increment=float(z_increment),
        morawetz_action=morawetz_action(f, w),
        boundary_mass=f.boundary_mass(),
    )


# ---------------------------------------------------------
# Morawetz identity and inequality
# ---------------------------------------------------------
def hessian_term(f: RadialField, w: MorawetzWeight) -> float:
    """int d^2a/dr^2 |du/dr|^2 dmu (the Hessian term for radial u)."""
    return float(4.0 * np.pi * f.grid.dr * np.sum(w.d2r_a(f.r) * np.abs(_wu_r(f)) ** 2))


def morawetz_rhs(f: RadialField, w: MorawetzWeight) -> float:
    """4 int D^2 a(grad u, grad u) dmu - int Delta(Delta a) |u|^2 dmu."""
    bilap = w.bilaplacian(f.r)
    potential = 4.0 * np.pi * f.grid.dr * np.sum(bilap * np.abs(f.h) ** 2)
    return 4.0 * hessian_term(f, w) - float(potential)


def action_rate(traj: "Trajectory", w: MorawetzWeight) -> tuple:
    """Interior snapshot times and the centered difference of M_a(t) there."""
    times = traj.times
    if len(times) < 3:
        raise ValueError("need at least three snapshots")
    actions = np.array([morawetz_action(f, w) for f in traj.fields])
    return times[1:-1], (actions[2:] - actions[:-2]) / (times[2:] - times[:-2])


def refinement_order(coarse: float, fine: float) -> float:
    """Observed order log2(coarse / fine) of an error under one halving of the step."""
    if fine <= 0:
        return float("inf") if coarse > 0 else float("nan")
    return float(np.log2(coarse / fine))


def action_rate_order(trajs: Sequence["Trajectory"], w: MorawetzWeight) -> float:
    """Self-convergence order of the centered dM_a/dt from runs at dt, dt/2, dt/4.

    Differences between successive levels cancel the dt-independent
    spatial error, leaving the O(dt^2) of the centered difference.
    """
    if len(trajs) != 3:
        raise ValueError("need runs at dt, dt/2 and dt/4")
    t0, r0 = action_rate(trajs[0], w)
    levels = [r0]
    for traj in trajs[1:]:
        t, r = action_rate(traj, w)
        levels.append(r[np.abs(t[None, :] - t0[:, None]).argmin(axis=1)])
    coarse = float(np.max(np.abs(levels[0] - levels[1])))
    fine = float(np.max(np.abs(levels[1] - levels[2])))
    return refinement_order(coarse, fine)


def morawetz_identity_check(traj: "Trajectory", w: MorawetzWeight, tolerance: float = 0.03) -> dict:
    """Centered difference of M_a(t) against the right-hand side at interior snapshots."""
    _, lhs = action_rate(traj, w)
    rhs = np.array([morawetz_rhs(f, w) for f in traj.fields[1:-1]])
    scale = np.max(np.abs(rhs))
    mismatch = 0.0 if scale == 0 else float(np.max(np.abs(lhs - rhs)) / scale)
    return verdict(
        "morawetz_identity", float(np.max(np.abs(lhs))), float(scale), None, mismatch <= tolerance,
        max_mismatch=mismatch, tolerance=tolerance, N=float(w.N),
    )


def morawetz_inequality_check(traj: "Trajectory") -> tuple:
    """(int int |u|^6 dmu dt, sup_t ||u||_2 ||u||_{H^1}, ratio)."""
    times = traj.times
    p6 = np.array([weighted_power_sum(f.h, 6.0, f.grid, f.geometry) for f in traj.fields])
    lhs = float(integrate.trapezoid(p6, times)) if len(times) > 1 else 0.0
    rhs = float(max(np.sqrt(mass(f)) * h1_norm(f) for f in traj.fields))
    ratio = 0.0 if rhs == 0 else lhs / rhs
    return lhs, rhs, ratio


def morawetz_inequality_corpus(trajs: Sequence["Trajectory"], frozen: Optional[float] = None) -> dict:
    rows = [morawetz_inequality_check(t) for t in trajs]
    ratios = [r[2] for r in rows]
    constant = max(ratios) if ratios else 0.0
    bound = constant if frozen is None else frozen
    passed = all(r[0] <= bound * r[1] * (1 + 1e-12) for r in rows)
    spread = (max(ratios) / min(ratios)) if ratios and min(ratios) > 0 else float("nan")
    return verdict(
        "morawetz_inequality", max(r[0] for r in rows), max(r[1] for r in rows), constant, passed,
        ratios=ratios, spread=spread,
    )


def weight_identities(w: MorawetzWeight, r_max: float = 10.0, dr: float = 1e-3) -> dict:
    """|grad a|^2 <= 1, Delta a = b(cosh r) and the closed-form Delta(Delta a) against
    fourth-order finite differences of a and b(cosh r)."""
    r = np.arange(1, int(r_max / dr) + 1) * dr
    grad_sq = w.gradient_sq(r)

    def laplacian_fd(values_fn):
        # both a and b(cosh r) are even in r, so the stencil may reach below 0
        vals = {k: values_fn(np.abs(r + k * dr)) for k in (-2, -1, 0, 1, 2)}
        d1 = (vals[-2] - 8 * vals[-1] + 8 * vals[1] - vals[2]) / (12 * dr)
        d2 = (-vals[-2] + 16 * vals[-1] - 30 * vals[0] + 16 * vals[1] - vals[2]) / (12 * dr * dr)
        return d2 + 2.0 / np.tanh(r) * d1

    lap_fd = laplacian_fd(w.a)
    lap_exact = w.laplacian(r)
    bilap_fd = laplacian_fd(w.laplacian)
    bilap_exact = w.bilaplacian(r)
    interior = slice(2, -2)
    lap_err = float(np.max(np.abs(lap_fd - lap_exact)[interior]) / np.max(np.abs(lap_exact)))
    bilap_err = float(np.max(np.abs(bilap_fd - bilap_exact)[interior]) / np.max(np.abs(bilap_exact)))
    hess = w.d2r_a(r)
    bound = w.eps * np.cosh(r) * (np.cosh(r) ** 2 - 1.0 + w.eps) ** -1.5
    hess_ratio = float(np.min(hess / bound)) if w.eps > 0 else 1.0
    return {
        "check": "morawetz_weight",
        "N": float(w.N),
        "max_grad_sq": float(np.max(grad_sq)),
        "laplacian_rel_error": lap_err,
        "bilaplacian_rel_error": bilap_err,
        "hessian_min_ratio": hess_ratio,
        "bilaplacian_over_N3": float(np.max(np.abs(bilap_exact)) / w.N ** 3) if np.isfinite(w.N) else None,
        "pass": bool(np.max(grad_sq) <= 1 + 1e-12 and lap_err <= 1e-6 and hess_ratio >= 1 - 1e-10),
    }


# ---------------------------------------------------------
# Dispersive decay
# ---------------------------------------------------------
@dataclass
class DecayFit:
    exponent: float
    intercept: float
    times: np.ndarray
    norms: np.ndarray
    p: float
    bound: float

    @property
    def passes(self) -> bool:
        return bool(self.exponent <= self.bound)

    def to_dict(self) -> dict:
        return {"exponent": self.exponent, "intercept": self.intercept, "p": self.p,
                "bound": self.bound, "pass": self.passes,
                "times": list(map(float, self.times)), "norms": list(map(float, self.norms))}


def dispersive_decay_check(phi: RadialField, times: Iterable[float], p: float,
                           boundary_tolerance: float = 1e-8) -> DecayFit:
    """Log-log slope of ||e^{it Delta} phi||_{L^{p'}} over the given times."""
    if not 1.0 < p <= 2.0:
        raise ValueError(f"p must lie in (1, 2], got {p}")
    times = np.asarray(list(times), dtype=float)
    q = p / (p - 1.0) if p < 2 else 2.0
    y = sine_coefficients(phi)
    mu = phi.grid.lam ** 2 + phi.geometry.rho2
    norms = []
    for t in times:
        f = from_sine_coefficients(phi.grid, phi.geometry, y * np.exp(-1j * t * mu))
        bm = f.boundary_mass()
        if bm > boundary_tolerance:
            raise BoundaryMassExceeded(t, bm, boundary_tolerance)
        norms.append(lp_norm(f, q))
    norms = np.asarray(norms)
    fit = stats.linregress(np.log(times), np.log(norms))
    bound = -3.0 * (1.0 / p - 0.5) + 0.1
    return DecayFit(float(fit.slope), float(fit.intercept), times, norms, p, bound)


# ---------------------------------------------------------
# Littlewood-Paley based checks
# ---------------------------------------------------------
def _lp_sup(f: RadialField, n_grid: np.ndarray) -> tuple:
    """max over N in n_grid and the nodes of N^{-1/2} |P_N f|, with the maximizing N."""
    y = sine_coefficients(f)
    mu = f.grid.lam ** 2 + f.geometry.rho2
    inv_w = f.grid.inv_weight(f.geometry)
    best, best_n = 0.0, float(n_grid[0])
    for N in n_grid:
        g = from_sine_coefficients(f.grid, f.geometry, littlewood_paley_multiplier(N, mu) * y)
        val = float(np.max(np.abs(g.h) * inv_w)) / np.sqrt(N)
        if val > best:
            best, best_n = val, float(N)
    return best, best_n


def default_scale_grid(grid: RadialGrid, n_min: float = 1.0, per_octave: int = 8) -> np.ndarray:
    n_max = max(n_min * 2, grid.lam[-1] / 4.0)
    count = int(np.ceil(np.log2(n_max / n_min) * per_octave)) + 1
    return np.geomspace(n_min, n_max, count)


def refined_sobolev_check(f: RadialField, n_grid: Optional[np.ndarray] = None) -> dict:
    """lhs = ||f||_6, rhs = ||grad f||^{1/3} (sup_N N^{-1/2} |P_N f|)^{2/3} (constant 1)."""
    n_grid = default_scale_grid(f.grid) if n_grid is None else np.asarray(n_grid)
    lhs = lp_norm(f, 6.0)
    sup, n_star = _lp_sup(f, n_grid)
    rhs = h1_norm(f) ** (1.0 / 3.0) * sup ** (2.0 / 3.0)
    ratio = 0.0 if rhs == 0 else lhs / rhs
    return verdict("refined_sobolev", lhs, rhs, ratio, True, n_star=n_star)


def corpus_constant(rows: List[dict], check: str, frozen: Optional[float] = None,
                    ceiling: Optional[float] = None) -> dict:
    """Fit one constant C = max lhs/rhs over a corpus and test lhs <= C rhs."""
    ratios = [r["lhs"] / r["rhs"] if r["rhs"] > 0 else 0.0 for r in rows]
    constant = max(ratios) if ratios else 0.0
    bound = constant if frozen is None else frozen
    passed = all(r["lhs"] <= bound * r["rhs"] * (1 + 1e-12) for r in rows)
    if ceiling is not None:
        passed = passed and constant <= ceiling
    return verdict(check, max((r["lhs"] for r in rows), default=0.0),
                   max((r["rhs"] for r in rows), default=0.0), constant, passed, ratios=ratios)


def sobolev_embedding_check(fields: Sequence[RadialField]) -> dict:
    """||f||_6 <= C ||f||_{H^1} with one C, refit on interleaved halves to judge stability."""
    rows = [{"lhs": lp_norm(f, 6.0), "rhs": h1_norm(f)} for f in fields]
    out = corpus_constant(rows, "sobolev_embedding")
    halves = [corpus_constant(rows[0::2], "half")["constant"], corpus_constant(rows[1::2], "half")["constant"]]
    spread = abs(halves[0] - halves[1]) / max(halves) if max(halves) > 0 else 0.0
    out.update(half_constants=halves, stability=spread)
    out["pass"] = bool(out["pass"] and spread <= 0.1)
    return out


def local_smoothing_check(psi: RadialField, N: float, K: float, n_times: int = 33) -> float:
    """||grad P_K e^{it Delta} psi||_{L^2(B(0, 1/N) x (-N^-2, N^-2))} by quadrature."""
    if K < N or N < 1:
        raise ValueError("need K >= N >= 1")
    times = np.linspace(-1.0 / N ** 2, 1.0 / N ** 2, n_times)
    y = sine_coefficients(psi)
    mu = psi.grid.lam ** 2 + psi.geometry.rho2
    pk = littlewood_paley_multiplier(K, mu)
    ball = psi.r <= 1.0 / N
    dens = []
    for t in times:
        g = from_sine_coefficients(psi.grid, psi.geometry, y * pk * np.exp(-1j * t * mu))
        dens.append(4.0 * np.pi * psi.grid.dr * np.sum(np.abs(_wu_r(g)[ball]) ** 2))
    return float(np.sqrt(integrate.trapezoid(dens, times)))


def local_smoothing_scan(psi: RadialField, N: float, Ks: Sequence[float], n_times: int = 33) -> dict:
    if h1_norm(psi) > 1 + 1e-12:
        raise ValueError("local smoothing expects ||psi||_{H^1} <= 1")
    Ks = sorted(Ks)
    values = [local_smoothing_check(psi, N, K, n_times) for K in Ks]
    bounds = [(N * K) ** -0.5 for K in Ks]
    constant = max(v / b for v, b in zip(values, bounds))
    ratios = [values[i + 1] / values[i] if values[i] > 0 else 0.0 for i in range(len(values) - 1)]
    # doubling K shrinks the bound by 2^{-1/2}; allow a factor 2 above that
    steps_ok = all(r <= np.sqrt(2.0) for r in ratios)
    return verdict("local_smoothing", max(values), max(bounds), constant, steps_ok,
                   N=float(N), K=list(map(float, Ks)), values=values, doubling_ratios=ratios)


def kernel_decay_check(N: float, grid: RadialGrid, r_cut: float = 30.0) -> dict:
    """|P_N(r)| <= C N^3 (1 + N r)^{-5} e^{-4r}: fitted C and spectral-vs-closed-form error."""
    r = np.linspace(0.0, r_cut, 3001)
    k = littlewood_paley_kernel(N, r)
    with np.errstate(divide="ignore"):
        log_ratio = np.log(np.abs(k)) - 3 * np.log(N) + 5 * np.log1p(N * r) + 4 * r
    ratio = np.exp(log_ratio)
    constant = float(np.max(ratio))
    spectral = littlewood_paley_kernel_spectral(N, grid)
    inside = grid.r <= min(r_cut, 0.5 * grid.r_max)
    closed = littlewood_paley_kernel(N, grid.r[inside])
    err = float(np.max(np.abs(spectral.u[inside].real - closed)) / np.max(np.abs(closed)))
    decays = bool(ratio[-1] <= 1e-3 * constant)
    return verdict("kernel_decay", float(np.max(np.abs(k))), N ** 3, constant, decays,
                   N=float(N), spectral_error=err)


# ---------------------------------------------------------
# Space-time norms
# ---------------------------------------------------------
def _time_integral(times: np.ndarray, values: np.ndarray) -> float:
    return float(integrate.trapezoid(values, times)) if len(times) > 1 else 0.0


def strichartz_accumulators(traj: "Trajectory") -> Dict[str, float]:
    """Z = ||u||_{L^10_{t,x}}, ||u||_{L^2_t L^6_x}, ||grad u||_{L^10_t L^{30/13}_x} and the
    dual norm ||grad(u|u|^4)||_{L^2_t L^{6/5}_x} on the recorded times."""
    times = traj.times
    fields = traj.fields
    z = sum(r.z_increment for r in traj.diagnostics) if traj.diagnostics else _time_integral(
        times, np.array([weighted_power_sum(f.h, 10.0, f.grid, f.geometry) for f in fields]))
    l6 = np.array([lp_norm(f, 6.0) for f in fields])
    grad = np.array([weighted_power_sum(_wu_r(f), 30.0 / 13.0, f.grid, f.geometry) ** (13.0 / 30.0)
                     for f in fields])
    return {
        "Z": z ** 0.1,
        "L2L6": _time_integral(times, l6 ** 2) ** 0.5,
        "L10L30_13_grad": _time_integral(times, grad ** 10) ** 0.1,
        "N1": nonlinearity_dual_norm(times, fields),
    }


def nonlinearity_dual_norm(times: np.ndarray, fields: Sequence[RadialField]) -> float:
    vals = []
    for f in fields:
        d = _wu_r(f)
        u = f.u
        # w * d/dr(u |u|^4) = 3 |u|^4 (w u_r) + 2 |u|^2 u^2 conj(w u_r)
        a = 3.0 * np.abs(u) ** 4 * d + 2.0 * np.abs(u) ** 2 * u * u * np.conj(d)
        vals.append(weighted_power_sum(a, 1.2, f.grid, f.geometry) ** (2.0 / 1.2))
    return _time_integral(np.asarray(times), np.asarray(vals)) ** 0.5


def linear_l2l6(phi: RadialField, times: np.ndarray) -> float:
    """||e^{it Delta} phi||_{L^2_t L^6_x} over the given time nodes (trapezoid)."""
    y = sine_coefficients(phi)
    mu = phi.grid.lam ** 2 + phi.geometry.rho2
    vals = [lp_norm(from_sine_coefficients(phi.grid, phi.geometry, y * np.exp(-1j * t * mu)), 6.0) ** 2
            for t in times]
    return _time_integral(np.asarray(times), np.asarray(vals)) ** 0.5
