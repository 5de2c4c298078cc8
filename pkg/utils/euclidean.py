"""
Euclidean comparison: hyperbolic solutions of rescaled data against the
rescaled, truncated and transplanted Euclidean solution, the truncation
error of eta(x/R) v, and the extinction of Strichartz tails of rescaled
linear waves.

Rescaled variables: a Euclidean solution v(x, tau) is compared with the
hyperbolic solution at time t = tau / N^2 through
V_{R,N}(r, t) = N^{1/2} (eta(./R) v)(N sinh r, N^2 t).
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Dict, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from scipy import integrate, stats

from utils.diagnostics import verdict
from utils.errors import GridMismatch, TimeOutOfRange
from utils.field import (
    EnergyReport,
    compute_energy,
    cutoff,
    gradient_lp_norm,
    h1_norm,
    mass,
    regularize,
    rescaled_profile,
    transplant,
)
from utils.grid import Geometry, RadialField, RadialGrid
from utils.propagator import SolverConfig, Trajectory, euclid_evolve, evolve, linear_solution
from utils.radial_transform import apply_symbol

log = logging.getLogger(__name__)

DEFAULT_N_LIST = (4.0, 8.0, 16.0, 32.0)
DEFAULT_T1_LIST = (1.0, 2.0, 4.0, 8.0)
DEFAULT_R_LIST = (5.0, 10.0, 20.0)
# the hyperbolic grid reaches rho = N sinh r_max = 2.5 R
EXTENT_FACTOR = 2.5

SCALING_COLUMNS = ["N", "sup_H1_dist", "strichartz_dist", "relative_H1_dist", "hyperbolic_r_max", "n"]


def _require_euclidean(phi):
    if phi.geometry is not Geometry.EUCLIDEAN:
        raise GridMismatch(f"expected a Euclidean profile, got {phi.geometry.value}")


def euclidean_energy(phi: RadialField) -> EnergyReport:
    """E1 on R^3: |grad phi|^2 / 2 + |phi|^6 / 6."""
    _require_euclidean(phi)
    return compute_energy(phi)


# ---------------------------------------------------------
# V_{R,N}
# ---------------------------------------------------------
@dataclass
class VRNSampler:
    """Samples V_{R,N}(., t) on a hyperbolic grid at hyperbolic times t."""

    trajectory: Trajectory
    R: float
    N: float
    grid: RadialGrid
    time_tolerance: float = 1e-9

    @property
    def reversible(self) -> bool:
        # real data: v(-tau) = conj v(tau)
        v0 = self.trajectory.fields[0]
        return bool(np.allclose(v0.h.imag, 0.0))

    @property
    def t_max(self) -> float:
        return float(self.trajectory.times[-1]) / self.N ** 2

    def euclidean_state(self, tau: float) -> RadialField:
        times = self.trajectory.times
        fields = self.trajectory.fields
        if tau < 0 and self.reversible:
            return self.euclidean_state(-tau).conj()
        tol = self.time_tolerance * max(1.0, float(times[-1]))
        if tau < times[0] - tol or tau > times[-1] + tol:
            raise TimeOutOfRange(
                f"tau={tau:.6g} outside the Euclidean trajectory [{times[0]:.6g}, {times[-1]:.6g}]"
            )
        k = int(np.clip(np.searchsorted(times, tau), 0, len(times) - 1))
        if abs(times[k] - tau) <= tol:
            return fields[k]
        if k > 0 and abs(times[k - 1] - tau) <= tol:
            return fields[k - 1]
        # between two snapshots: linear in tau
        theta = (tau - times[k - 1]) / (times[k] - times[k - 1])
        return fields[k - 1] * (1.0 - theta) + fields[k] * theta

    def __call__(self, t: float) -> RadialField:
        v = self.euclidean_state(self.N ** 2 * t)
        R = self.R if np.isfinite(self.R) else None
        return transplant(v, self.N, self.grid, R)


def build_vrn(v: Trajectory, R: float, N: float, grid: RadialGrid) -> VRNSampler:
    if not v.snapshots:
        raise TimeOutOfRange("Euclidean trajectory is empty")
    _require_euclidean(v.fields[0])
    if not N > 0:
        raise ValueError(f"N must be positive, got {N}")
    if not R > 0:
        raise ValueError(f"R must be positive, got {R}")
    return VRNSampler(v, float(R), float(N), grid)


def hyperbolic_grid_for(phi: RadialField, R: float, N: float, n: int) -> RadialGrid:
    extent = min(EXTENT_FACTOR * R, phi.grid.r_max)
    return RadialGrid(float(np.arcsinh(extent / N)), n)


# ---------------------------------------------------------
# Scaling limit
# ---------------------------------------------------------
def scaling_limit_row(phi: RadialField, N: float, T0: float = 1.0, R: float = 10.0,
                      nonlinear: bool = True, steps: int = 200, record_every: int = 4,
                      n_hyperbolic: int = 4096, boundary_tolerance: float = 1e-8) -> Dict[str, float]:
    """One N of the scaling-limit experiment: U_N against V_{R,N} on t in [0, T0 / N^2]."""
    q = regularize(phi, N)
    euclid_cfg = SolverConfig(dt=T0 / steps, t_end=T0, geometry=Geometry.EUCLIDEAN,
                              nonlinearity_on=nonlinear, record_every=record_every,
                              boundary_tolerance=boundary_tolerance)
    v = euclid_evolve(q, euclid_cfg)

    grid = hyperbolic_grid_for(phi, R, N, n_hyperbolic)
    f_N = transplant(q, N, grid)
    hyper_cfg = SolverConfig(dt=T0 / (steps * N ** 2), t_end=T0 / N ** 2,
                             geometry=Geometry.HYPERBOLIC, nonlinearity_on=nonlinear,
                             record_every=record_every, boundary_tolerance=boundary_tolerance)
    U = evolve(f_N, hyper_cfg)
    V = build_vrn(v, R, N, grid)

    times = U.times
    h1, w16 = [], []
    for t, u in U.snapshots:
        d = u - V(t)
        h1.append(h1_norm(d))
        w16.append(gradient_lp_norm(d, 6.0) ** 2)
    sup_h1 = float(np.max(h1))
    strich = float(integrate.trapezoid(w16, times)) ** 0.5 if len(times) > 1 else 0.0
    scale = h1_norm(f_N)
    log.debug("N=%g: sup H1 %.3e, L2 W16 %.3e (grid r_max=%.4g, n=%d)",
              N, sup_h1, strich, grid.r_max, grid.n)
    return {
        "N": float(N),
        "sup_H1_dist": sup_h1,
        "strichartz_dist": strich,
        "relative_H1_dist": sup_h1 / scale if scale > 0 else 0.0,
        "hyperbolic_r_max": grid.r_max,
        "n": grid.n,
    }


def scaling_limit_experiment(phi: RadialField, T0: float = 1.0, R: float = 10.0,
                             N_list: Sequence[float] = DEFAULT_N_LIST, nonlinear: bool = True,
                             steps: int = 200, record_every: int = 4, n_hyperbolic: int = 4096,
                             boundary_tolerance: float = 1e-8, max_energy: float = 1.0) -> pd.DataFrame:
    """Distances between U_N and V_{R,N} for each N in N_list (ascending)."""
    _require_euclidean(phi)
    N_list = [float(N) for N in N_list]
    if any(b <= a for a, b in zip(N_list, N_list[1:])):
        raise ValueError(f"N_list must be strictly ascending, got {N_list}")
    energy = euclidean_energy(phi).energy
    if energy > max_energy:
        raise ValueError(f"E1(phi) = {energy:.4g} exceeds {max_energy:g}")

    rows = [
        scaling_limit_row(phi, N, T0, R, nonlinear, steps, record_every, n_hyperbolic, boundary_tolerance)
        for N in N_list
    ]
    return pd.DataFrame(rows, columns=SCALING_COLUMNS)


def scaling_verdict(table: pd.DataFrame, eps: float, column: str = "sup_H1_dist") -> dict:
    """Non-increasing in N with the last value at most eps."""
    vals = table[column].to_numpy(dtype=float)
    if vals.size == 0:
        return verdict("scaling_limit", 0.0, eps, None, True, monotone=True, column=column)
    slack = 1e-12 * max(1.0, float(np.max(vals)))
    monotone = bool(np.all(np.diff(vals) <= slack))
    final = float(vals[-1])
    if not monotone:
        log.warning("scaling-limit distances are not monotone: %s", np.array2string(vals, precision=3))
    return verdict("scaling_limit", final, eps, None, monotone and final <= eps,
                   monotone=monotone, column=column, values=[float(x) for x in vals])


# ---------------------------------------------------------
# Truncation error e_R
# ---------------------------------------------------------
def _laplacian(f: RadialField) -> RadialField:
    return apply_symbol(f, lambda mu: -mu)


def cutoff_error(v: Trajectory, R: float) -> Dict[str, float]:
    """e_R = Delta(eta v) - eta Delta v along a linear Euclidean trajectory, in L1_t L2_x."""
    _require_euclidean(v.fields[0])
    times = v.times
    l2, grad = [], []
    for f in v.fields:
        eta = cutoff(f.r / R)
        lap = _laplacian(f)
        e = _laplacian(f.with_h(eta * f.h)) - lap.with_h(eta * lap.h)
        l2.append(np.sqrt(mass(e)))
        grad.append(h1_norm(e))
    quad = (lambda y: float(integrate.trapezoid(y, times))) if len(times) > 1 else (lambda y: 0.0)
    return {"R": float(R), "e_L1L2": quad(l2), "grad_e_L1L2": quad(grad)}


def cutoff_error_scan(v: Trajectory, R_list: Sequence[float] = DEFAULT_R_LIST,
                      floor: float = 1e-12) -> Tuple[pd.DataFrame, dict]:
    """cutoff_error over ascending R; each doubling of R must at least halve the error."""
    table = pd.DataFrame([cutoff_error(v, R) for R in R_list], columns=["R", "e_L1L2", "grad_e_L1L2"])
    vals = table["grad_e_L1L2"].to_numpy()
    halving = bool(np.all(vals[1:] <= 0.5 * vals[:-1] + floor))
    return table, verdict("cutoff_error", float(vals[-1]) if vals.size else 0.0,
                          float(vals[0]) if vals.size else 0.0, None, halving)


# ---------------------------------------------------------
# Strichartz extinction
# ---------------------------------------------------------
def _admissible_rate(p: float, q: float) -> float:
    if not np.isclose(2.0 / p + 3.0 / q, 1.5):
        raise ValueError(f"(p, q) = ({p}, {q}) is not admissible: 2/p + 3/q != 3/2")
    # large-tau decay of ||grad e^{it Delta} psi||_{L^q}^p in rescaled time
    return p * 3.0 * (0.5 - 1.0 / q)


def extinction_grid(psi: RadialField, N: float, tau_max: float, resolution: float = 0.05) -> RadialGrid:
    """Hyperbolic grid wide enough for tau <= tau_max with N dr <= resolution."""
    r_max = max(6.0 * tau_max / N, float(np.arcsinh(psi.grid.r_max / N)))
    n = int(2 ** np.ceil(np.log2(r_max * N / resolution)))
    return RadialGrid(r_max, max(n, 16))


def strichartz_tail(psi: RadialField, N: float, p: float, q: float,
                    T1_list: Sequence[float] = DEFAULT_T1_LIST, tau_max: float = 100.0,
                    n_tau: int = 64, grid: Optional[RadialGrid] = None,
                    boundary_tolerance: float = 1e-8) -> pd.DataFrame:
    """||grad e^{it Delta} T_N psi||_{L^p_t L^q_x} over |t| >= T1 / N^2 for each T1."""
    _require_euclidean(psi)
    s = _admissible_rate(p, q)
    grid = grid or extinction_grid(psi, N, tau_max)
    psi_N = rescaled_profile(psi, N, grid)

    T1 = np.sort(np.asarray(T1_list, dtype=float))
    taus = np.unique(np.concatenate([np.geomspace(T1[0], tau_max, n_tau), T1]))
    reversible = bool(np.allclose(psi.h.imag, 0.0))
    sides = [psi_N] if reversible else [psi_N, psi_N.conj()]

    g = np.zeros_like(taus)
    boundary = 0.0
    for side in sides:
        states = linear_solution(side, taus / N ** 2)
        g += np.array([gradient_lp_norm(f, q) ** p for f in states])
        boundary = max(boundary, states[-1].boundary_mass())
    if reversible:
        g *= 2.0
    if boundary > boundary_tolerance:
        log.warning("N=%g: boundary mass %.2e at tau=%g; tail is underestimated", N, boundary, tau_max)

    rows = []
    for t1 in T1:
        keep = taus >= t1
        body = float(integrate.trapezoid(g[keep], taus[keep]))
        tail = g[-1] * tau_max / (s - 1.0) if s > 1.0 else 0.0
        # dt = dtau / N^2
        rows.append({"N": float(N), "T1": float(t1), "tail_norm": ((body + tail) / N ** 2) ** (1.0 / p),
                     "boundary_mass": boundary})
    return pd.DataFrame(rows)


def strichartz_extinction(psi: RadialField, N_list: Sequence[float] = (32.0, 64.0), p: float = 10.0,
                          q: float = 30.0 / 13.0, T1_list: Sequence[float] = DEFAULT_T1_LIST,
                          tau_max: float = 100.0, n_tau: int = 64, grid: Optional[RadialGrid] = None,
                          tolerance: float = 0.15, invariance: float = 0.05) -> Tuple[pd.DataFrame, dict]:
    """Tail norms per (N, T1), the fitted T1-exponent and the N-invariance of the tail profile."""
    frames = [strichartz_tail(psi, N, p, q, T1_list, tau_max, n_tau, grid) for N in N_list]
    table = pd.concat(frames, ignore_index=True)

    exponents = {}
    for N, part in table.groupby("N"):
        tails = part["tail_norm"].to_numpy()
        if np.all(tails > 0):
            exponents[float(N)] = float(stats.linregress(np.log(part["T1"]), np.log(tails)).slope)

    profiles = [f["tail_norm"].to_numpy() for f in frames]
    drift = 0.0
    for a, b in zip(profiles, profiles[1:]):
        ref = np.maximum(np.abs(a), 1e-300)
        drift = max(drift, float(np.max(np.abs(b - a) / ref)) if np.any(a > 0) else 0.0)

    target = -1.0 / p
    if not exponents:
        # zero data: nothing to fit
        return table, verdict("strichartz_extinction", 0.0, target, None, True,
                              exponents={}, invariance_drift=drift)
    mean_exp = float(np.mean(list(exponents.values())))
    fits = all(abs(e - target) <= tolerance for e in exponents.values())
    passed = fits and drift <= invariance
    return table, verdict("strichartz_extinction", mean_exp, target, None, passed,
                          exponents={str(k): v for k, v in exponents.items()}, invariance_drift=drift)
