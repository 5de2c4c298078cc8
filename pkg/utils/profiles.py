"""
Frames, the concentration functional and greedy profile extraction for
sequences of radial fields on H^3.

Radial mode: translations are the identity, so a frame is a sequence of
scales and times. Weak limits are replaced by averaging the localized
pieces of the last half of the sequence.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from scipy import optimize

from utils.diagnostics import default_scale_grid, verdict
from utils.errors import GridMismatch, LengthMismatch, NoConcentration
from utils.field import (
    compute_energy,
    default_transplant_grid,
    h1_inner,
    h1_norm,
    kinetic_energy,
    lp_norm,
    pullback,
    rescaled_profile,
    time_translate,
)
from utils.geometry import IDENTITY, ORIGIN, GroupElement, apply_isometry, distance
from utils.grid import Geometry, RadialField, RadialGrid
from utils.radial_transform import (
    apply_symbol,
    from_sine_coefficients,
    heat_kernel_field,
    littlewood_paley_multiplier,
    schrodinger_flow,
    sine_coefficients,
)

log = logging.getLogger(__name__)

EQUIVALENCE_BOUND = 10.0
EUCLIDEAN_SCALE_RATIO = 4.0
PROFILE_CUTOFF_RADIUS = 8.0
DECOUPLING_TOLERANCE = 0.05
# ||grad profile|| >= c delta_threshold
PROFILE_ENERGY_CONSTANT = 0.25


class FrameKind(str, Enum):
    EUCLIDEAN = "euclidean"
    HYPERBOLIC = "hyperbolic"


@dataclass(eq=False)
class Frame:
    kind: FrameKind
    scales: np.ndarray
    times: np.ndarray
    translations: Tuple[GroupElement, ...] = ()
    # concentration radius r*_k, reported only
    radii: Optional[np.ndarray] = None

    def __post_init__(self):
        kind = FrameKind(self.kind)
        scales = np.asarray(self.scales, dtype=float).reshape(-1)
        times = np.asarray(self.times, dtype=float).reshape(-1)
        if scales.size != times.size:
            raise LengthMismatch(f"{scales.size} scales but {times.size} times")
        translations = tuple(self.translations) or (IDENTITY,) * scales.size
        if len(translations) != scales.size:
            raise LengthMismatch(f"{len(translations)} translations for {scales.size} scales")
        if not (np.all(np.isfinite(scales)) and np.all(np.isfinite(times))):
            raise ValueError("frame entries must be finite")
        if kind is FrameKind.HYPERBOLIC and not np.allclose(scales, 1.0):
            raise ValueError("hyperbolic frames have unit scales")
        if kind is FrameKind.EUCLIDEAN and (np.any(scales < 1) or np.any(np.diff(scales) <= 0)):
            raise ValueError("Euclidean frame scales must be >= 1 and strictly increasing")
        self.kind = kind
        self.scales = scales
        self.times = times
        self.translations = translations

    def __len__(self) -> int:
        return self.scales.size

    def centres(self) -> list:
        return [apply_isometry(h, ORIGIN) for h in self.translations]

    def to_dict(self) -> dict:
        return {
            "kind": self.kind.value,
            "scales": [float(x) for x in self.scales],
            "times": [float(x) for x in self.times],
            "radii": None if self.radii is None else [float(x) for x in self.radii],
        }


# ---------------------------------------------------------
# Frame equivalence
# ---------------------------------------------------------
def frame_separation(a: Frame, b: Frame) -> np.ndarray:
    """|ln(N/N')| + Nbar^2 |t - t'| + Nbar d(h 0, h' 0) per k, Nbar = sqrt(N N')."""
    if len(a) != len(b):
        raise LengthMismatch(f"frames of length {len(a)} and {len(b)}")
    nbar = np.sqrt(a.scales * b.scales)
    d = np.array([distance(p, q) for p, q in zip(a.centres(), b.centres())])
    return np.abs(np.log(a.scales / b.scales)) + nbar ** 2 * np.abs(a.times - b.times) + nbar * d


def frames_equivalent(a: Frame, b: Frame, bound: float = EQUIVALENCE_BOUND) -> bool:
    """Bounded separation: max_k below bound and no sustained growth over k."""
    s = frame_separation(a, b)
    if s.size == 0:
        return True
    if s.size == 1:
        return bool(s[0] <= bound)
    slope = np.polyfit(np.arange(s.size, dtype=float), s, 1)[0]
    return bool(np.max(s) <= bound and slope <= 0.1 * bound / s.size)


# ---------------------------------------------------------
# Concentration functional
# ---------------------------------------------------------
@dataclass
class ConcentrationPoint:
    value: float
    N: float
    t: float
    r: float

    def as_tuple(self) -> Tuple[float, Tuple[float, float, float]]:
        return self.value, (self.N, self.t, self.r)


class _Concentration:
    """N^{-1/2} |P_N e^{it Delta} g| evaluated from cached sine coefficients."""

    def __init__(self, g: RadialField):
        self.g = g
        self.y = sine_coefficients(g)
        self.mu = g.grid.lam ** 2 + g.geometry.rho2
        self.inv_w = g.grid.inv_weight(g.geometry)

    def profile(self, N: float, t: float) -> np.ndarray:
        m = littlewood_paley_multiplier(N, self.mu) * np.exp(-1j * t * self.mu)
        h = from_sine_coefficients(self.g.grid, self.g.geometry, m * self.y).h
        return np.abs(h) * self.inv_w / np.sqrt(N)

    def at(self, N: float, t: float) -> Tuple[float, float]:
        a = self.profile(N, t)
        j = int(np.argmax(a))
        return float(a[j]), float(self.g.r[j])


def default_time_grid(N: float, span: float = 2.0, count: int = 9) -> np.ndarray:
    """Times on the natural scale N^{-2} of a bump at frequency N."""
    return np.linspace(-span, span, count) / N ** 2


def concentration_delta(g: RadialField, N_grid: Optional[Sequence[float]] = None,
                        t_grid: Optional[Sequence[float]] = None, refine: bool = True,
                        per_octave: int = 4) -> ConcentrationPoint:
    """max over (N, t, r) of N^{-1/2} |P_N e^{it Delta} g|(r) and where it is attained.

    t_grid = None uses default_time_grid(N) for each N. With refine, the best
    grid point is polished by bounded scalar searches in log N and then t.
    """
    N_grid = default_scale_grid(g.grid, 1.0, per_octave) if N_grid is None else np.asarray(N_grid, float)
    if np.any(N_grid < 1):
        raise ValueError("concentration scales must be >= 1")
    c = _Concentration(g)
    best = ConcentrationPoint(0.0, float(N_grid[0]), 0.0, float(g.r[0]))
    best_i = 0
    for i, N in enumerate(N_grid):
        times = default_time_grid(N) if t_grid is None else np.asarray(t_grid, float)
        for t in times:
            value, r = c.at(N, t)
            if value > best.value:
                best, best_i = ConcentrationPoint(value, float(N), float(t), r), i
    if not refine or best.value == 0.0:
        return best

    lo = np.log(N_grid[max(best_i - 1, 0)])
    hi = np.log(N_grid[min(best_i + 1, len(N_grid) - 1)])
    N1 = best.N
    if hi > lo:
        res = optimize.minimize_scalar(lambda s: -c.at(np.exp(s), best.t)[0], bounds=(lo, hi),
                                       method="bounded", options={"xatol": 1e-4})
        N1 = float(np.exp(res.x))
    times = default_time_grid(best.N) if t_grid is None else np.asarray(t_grid, float)
    step = float(np.min(np.diff(np.unique(times)))) if np.unique(times).size > 1 else 1.0 / N1 ** 2
    res = optimize.minimize_scalar(lambda t: -c.at(N1, t)[0], bounds=(best.t - step, best.t + step),
                                   method="bounded", options={"xatol": 1e-6 / N1 ** 2})
    value, r = c.at(N1, float(res.x))
    if value >= best.value:
        return ConcentrationPoint(value, N1, float(res.x), r)
    log.debug("refinement did not improve the grid maximum %.6g (got %.6g)", best.value, value)
    return best


def _tail(k: int) -> slice:
    return slice(k - int(math.ceil(k / 2)), k)


def _check_sequence(seq):
    if not seq:
        raise NoConcentration("empty sequence")
    g0 = seq[0]
    if g0.geometry is not Geometry.HYPERBOLIC:
        raise GridMismatch("profile extraction works on hyperbolic fields")
    for g in seq[1:]:
        g0._check(g)


def sequence_delta(seq: Sequence[RadialField], **kwargs) -> float:
    """Finite-sequence surrogate of limsup_k delta(g_k): the max over the last half."""
    if not seq:
        return 0.0
    return max(concentration_delta(g, **kwargs).value for g in seq[_tail(len(seq))])


# ---------------------------------------------------------
# Embedding profiles along frames
# ---------------------------------------------------------
def embed(frame: Frame, profile: RadialField, k: int, grid: RadialGrid) -> RadialField:
    """Pi_{t_k} profile (hyperbolic frame) or Pi_{t_k} T_{N_k} profile (Euclidean frame)."""
    if frame.kind is FrameKind.HYPERBOLIC:
        return time_translate(profile, frame.times[k])
    return time_translate(rescaled_profile(profile, frame.scales[k], grid), frame.times[k])


def _low_pass(n_ref: float):
    def symbol(mu):
        lam = np.sqrt(np.maximum(mu - 1.0, 0.0))
        return np.exp(-(lam / (8.0 * n_ref)) ** 8)
    return symbol


def _high_pass(N: float):
    def symbol(mu):
        lam = np.sqrt(np.maximum(mu - 1.0, 0.0))
        return 1.0 - np.exp(-(lam / (N / 8.0)) ** 8)
    return symbol


def _average(fields: Sequence[RadialField]) -> RadialField:
    return _sum(fields) * (1.0 / len(fields))


@dataclass
class Extraction:
    frame: Frame
    profile: RadialField
    remainder: List[RadialField]
    delta: float
    remainder_delta: float
    energy: float
    points: List[ConcentrationPoint] = field(default_factory=list)
    guarantees: list = field(default_factory=list)

    def __iter__(self):
        return iter((self.frame, self.profile, self.remainder))

    @property
    def holds(self) -> bool:
        return all(g["pass"] for g in self.guarantees)

    @property
    def recentring(self) -> dict:
        """Rescaled offsets N_k r*_k; offsets above 1 would call for recentring (not applied)."""
        offsets = [p.N * p.r for p in self.points]
        return {"offsets": offsets, "suggested": bool(offsets and max(offsets[_tail(len(offsets))]) > 1.0)}

    def summary(self) -> dict:
        return {
            "frame": self.frame.to_dict(),
            "geometry": self.profile.geometry.value,
            "delta": self.delta,
            "remainder_delta": self.remainder_delta,
            "energy": self.energy,
            "recentring": self.recentring,
            "guarantees": self.guarantees,
        }


def extraction_guarantees(remainder_delta, energy, delta_threshold, c=PROFILE_ENERGY_CONSTANT) -> list:
    """The remainder stops concentrating at the extracted frame and the profile is not negligible."""
    grad = math.sqrt(max(energy, 0.0))
    return [
        verdict("remainder_delta_at_frame", remainder_delta, delta_threshold, None,
                remainder_delta < delta_threshold),
        verdict("profile_energy_floor", grad, delta_threshold, c, grad >= c * delta_threshold),
    ]


def extract_profile(seq: Sequence[RadialField], delta_threshold: float,
                    N_grid: Optional[Sequence[float]] = None, t_grid: Optional[Sequence[float]] = None,
                    euclidean_ratio: float = EUCLIDEAN_SCALE_RATIO, R: float = PROFILE_CUTOFF_RADIUS,
                    euclid_grid: Optional[RadialGrid] = None) -> Extraction:
    """Locate the dominant concentration of seq, extract its profile and subtract it."""
    _check_sequence(seq)
    grid = seq[0].grid
    points = [concentration_delta(g, N_grid, t_grid) for g in seq]
    tail = _tail(len(seq))
    delta = max(p.value for p in points[tail])
    if delta < delta_threshold:
        raise NoConcentration(f"sequence concentration {delta:.4g} is below {delta_threshold:.4g}")

    k = np.arange(len(seq), dtype=float)
    detected = np.array([p.N for p in points])
    times = np.array([p.t for p in points])
    radii = np.array([p.r for p in points])
    growth = np.polyfit(k, np.log(detected), 1) if len(seq) > 1 else np.array([0.0, np.log(detected[0])])
    euclidean = len(seq) > 1 and np.exp(growth[0] * (len(seq) - 1)) >= euclidean_ratio

    if euclidean:
        scales = np.exp(np.polyval(growth, k))
        scales = scales / min(1.0, float(scales[0]))
        frame = Frame(FrameKind.EUCLIDEAN, scales, times, radii=radii)
        egrid = euclid_grid or RadialGrid(2.5 * R, 2048)
        pieces = [
            pullback(apply_symbol(schrodinger_flow(times[j], seq[j]), _high_pass(scales[j])), scales[j], egrid, R)
            for j in range(len(seq))[tail]
        ]
    else:
        frame = Frame(FrameKind.HYPERBOLIC, np.ones(len(seq)), times, radii=radii)
        n_ref = float(np.max(detected[tail]))
        pieces = [apply_symbol(schrodinger_flow(times[j], seq[j]), _low_pass(n_ref))
                  for j in range(len(seq))[tail]]
    profile = _average(pieces)
    remainder = [g - embed(frame, profile, j, grid) for j, g in enumerate(seq)]

    rem_delta = 0.0
    for j in range(len(seq))[tail]:
        rem_delta = max(rem_delta, _Concentration(remainder[j]).at(points[j].N, points[j].t)[0])
    energy = kinetic_energy(profile)
    log.debug("extracted %s profile: delta %.4g -> %.4g at frame, energy %.4g",
              frame.kind.value, delta, rem_delta, energy)
    guarantees = extraction_guarantees(rem_delta, energy, delta_threshold)
    for g in guarantees:
        if not g["pass"]:
            log.warning("%s failed for the %s profile: %.4g vs %.4g", g["check"], frame.kind.value, g["lhs"], g["rhs"])
    return Extraction(frame, profile, remainder, delta, rem_delta, energy, points, guarantees)


# ---------------------------------------------------------
# Full decomposition
# ---------------------------------------------------------
@dataclass
class ProfileDecomposition:
    extractions: List[Extraction]
    remainder: List[RadialField]
    grid: RadialGrid
    deltas: List[float] = field(default_factory=list)
    monotone: bool = True

    def __len__(self) -> int:
        return len(self.extractions)

    @property
    def profiles(self) -> List[Tuple[Frame, RadialField]]:
        return [(e.frame, e.profile) for e in self.extractions]

    @property
    def energies(self) -> List[float]:
        return [e.energy for e in self.extractions]

    def embedded(self, j: int, k: int) -> RadialField:
        e = self.extractions[j]
        return embed(e.frame, e.profile, k, self.grid)

    def summary(self) -> dict:
        return {
            "count": len(self),
            "deltas": self.deltas,
            "monotone": self.monotone,
            "profiles": [e.summary() for e in self.extractions],
        }

    def guarantee_check(self) -> dict:
        """Every extraction round met its remainder and energy guarantees."""
        failed = [f"{j}:{g['check']}" for j, e in enumerate(self.extractions) for g in e.guarantees if not g["pass"]]
        return verdict("extraction_guarantees", len(failed), 0, None, not failed, failed=failed)


def profile_budget(seq: Sequence[RadialField], delta_threshold: float, C: float = 4.0) -> int:
    """ceil(C E / delta^2) with E = sup_k ||grad g_k||^2."""
    energy = max((kinetic_energy(g) for g in seq), default=0.0)
    return int(math.ceil(C * energy / delta_threshold ** 2))


def full_decomposition(seq: Sequence[RadialField], delta_threshold: float, J_max: int = 8,
                       **kwargs) -> ProfileDecomposition:
    """Extract profiles until the remainder stops concentrating or J_max is reached."""
    current = list(seq)
    grid = seq[0].grid if seq else None
    extractions = []
    deltas = []
    monotone = True
    for _ in range(J_max):
        try:
            ex = extract_profile(current, delta_threshold, **kwargs)
        except NoConcentration:
            break
        if deltas and ex.delta >= deltas[-1]:
            log.warning("remainder concentration did not decrease (%.4g >= %.4g); stopping",
                        ex.delta, deltas[-1])
            monotone = False
            break
        deltas.append(ex.delta)
        extractions.append(ex)
        current = ex.remainder
    kw = {k: kwargs[k] for k in ("N_grid", "t_grid") if k in kwargs}
    deltas.append(sequence_delta(current, **kw))
    if len(deltas) > 1 and deltas[-1] >= deltas[-2]:
        monotone = False
    return ProfileDecomposition(extractions, current, grid, deltas, monotone)


# ---------------------------------------------------------
# Decoupling
# ---------------------------------------------------------
def _l3_product(a: RadialField, b: RadialField) -> float:
    h = a.h * b.h * a.grid.inv_weight(a.geometry)
    return lp_norm(a.with_h(h), 3.0)


def decoupling_audit(dec: ProfileDecomposition, seq: Sequence[RadialField],
                     tolerance: float = DECOUPLING_TOLERANCE) -> Tuple[pd.DataFrame, dict]:
    """Per-k energy residuals of the decomposition and cross terms between profiles."""
    if len(dec.remainder) != len(seq):
        raise LengthMismatch(f"decomposition has {len(dec.remainder)} remainders for {len(seq)} elements")
    rows = []
    J = len(dec)
    for k, f in enumerate(seq):
        pieces = [dec.embedded(j, k) for j in range(J)]
        total = kinetic_energy(f)
        parts = sum(kinetic_energy(p) for p in pieces)
        rest = kinetic_energy(dec.remainder[k])
        e1 = compute_energy(f).energy
        e1_parts = sum(compute_energy(p).energy for p in pieces)
        e1_rest = compute_energy(dec.remainder[k]).energy
        row = {
            "k": k,
            "energy": total,
            "profile_energy": parts,
            "remainder_energy": rest,
            "residual": abs(total - parts - rest) / total if total > 0 else 0.0,
            "e1_residual": abs(e1 - e1_parts - e1_rest) / e1 if e1 > 0 else 0.0,
        }
        cross, l3 = 0.0, 0.0
        for a in range(J):
            for b in range(a + 1, J):
                na, nb = h1_norm(pieces[a]), h1_norm(pieces[b])
                if na > 0 and nb > 0:
                    cross = max(cross, abs(h1_inner(pieces[a], pieces[b])) / (na * nb))
                l3 = max(l3, _l3_product(pieces[a], pieces[b]))
        row.update(cross_h1=cross, cross_l3=l3)
        rows.append(row)
    table = pd.DataFrame(rows)

    equivalent = [
        (a, b) for a in range(J) for b in range(a + 1, J)
        if frames_equivalent(dec.extractions[a].frame, dec.extractions[b].frame)
    ]
    last = float(table["residual"].iloc[-1]) if len(table) else 0.0
    return table, verdict("decoupling", last, tolerance, None, last <= tolerance,
                          equivalent_pairs=equivalent,
                          final_cross_h1=float(table["cross_h1"].iloc[-1]) if len(table) else 0.0)


# ---------------------------------------------------------
# Synthetic sequences
# ---------------------------------------------------------
def dyadic_scales(K: int = 6, start: int = 2) -> np.ndarray:
    """N_k = 2^{k + start - 1}, k = 1..K."""
    return 2.0 ** (np.arange(1, K + 1) + start - 1)


def hyperbolic_sequence(psi: RadialField, times: Sequence[float]) -> List[RadialField]:
    """Pi_{t_k} psi = e^{-i t_k Delta} psi."""
    return [time_translate(psi, t) for t in times]


def euclidean_sequence(phi: RadialField, scales: Sequence[float], grid: RadialGrid) -> List[RadialField]:
    """T_{N_k} phi on a common hyperbolic grid."""
    return [rescaled_profile(phi, N, grid) for N in scales]


def superpose(*sequences: Sequence[RadialField]) -> List[RadialField]:
    lengths = {len(s) for s in sequences}
    if len(lengths) != 1:
        raise LengthMismatch(f"sequences of lengths {sorted(lengths)}")
    return [_sum(items) for items in zip(*sequences)]


def _sum(items: Sequence[RadialField]) -> RadialField:
    total = items[0]
    for f in items[1:]:
        total = total + f
    return total


def heat_profile_convergence(N_list: Sequence[float], euclid_grid: Optional[RadialGrid] = None,
                             n: Optional[int] = None) -> Tuple[pd.DataFrame, dict]:
    """||N^{-5/2} e^{N^{-2} Delta} delta_0 - T_N G||_{H^1} for G = (4 pi)^{-3/2} e^{-|x|^2/4}."""
    egrid = euclid_grid or RadialGrid(30.0, 4096)
    G = RadialField.from_values(egrid, Geometry.EUCLIDEAN,
                                lambda r: (4.0 * np.pi) ** -1.5 * np.exp(-r ** 2 / 4.0))
    rows = []
    for N in N_list:
        grid = default_transplant_grid(G, N)
        if n is not None:
            grid = RadialGrid(grid.r_max, n)
        target = rescaled_profile(G, N, grid)
        kernel = heat_kernel_field(1.0 / N ** 2, grid) * N ** -2.5
        dist = h1_norm(kernel - target)
        ref = h1_norm(target)
        rows.append({"N": float(N), "h1_distance": dist, "relative": dist / ref if ref > 0 else 0.0})
    table = pd.DataFrame(rows)
    vals = table["relative"].to_numpy()
    decreasing = bool(np.all(np.diff(vals) < 0))
    return table, verdict("heat_profile_convergence", float(vals[-1]), float(vals[0]), None, decreasing)
