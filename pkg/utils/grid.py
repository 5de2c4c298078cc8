"""
Value types shared by the transform, field and propagator modules.

A radial function u on H^3 (or R^3) is stored through its reduced profile
h = w(r) * u(r), with w = sinh r on H^3 and w = r on R^3, sampled at the
interior nodes r_j = j * dr of a Dirichlet grid on [0, r_max].
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from functools import cached_property
from typing import Callable, Union

import numpy as np

from utils.errors import GridMismatch

# the outer 5% of the nodes is watched for mass reaching the box edge
BOUNDARY_FRACTION = 0.05


class Geometry(str, Enum):
    HYPERBOLIC = "hyperbolic"
    EUCLIDEAN = "euclidean"

    @property
    def rho2(self) -> float:
        """Bottom of the spectrum: rho^2 = 1 on H^3, 0 on R^3."""
        return 1.0 if self is Geometry.HYPERBOLIC else 0.0


@dataclass(frozen=True)
class RadialGrid:
    r_max: float
    n: int

    def __post_init__(self):
        if not (self.r_max > 0 and np.isfinite(self.r_max)):
            raise ValueError(f"r_max must be positive, got {self.r_max}")
        if int(self.n) != self.n or self.n < 16:
            raise ValueError(f"n must be an integer >= 16, got {self.n}")
        object.__setattr__(self, "r_max", float(self.r_max))
        object.__setattr__(self, "n", int(self.n))

    @property
    def dr(self) -> float:
        return self.r_max / (self.n + 1)

    @cached_property
    def r(self) -> np.ndarray:
        return self.dr * np.arange(1, self.n + 1)

    @cached_property
    def lam(self) -> np.ndarray:
        """Dual grid lambda_m = m pi / r_max, m = 1..n."""
        return np.pi * np.arange(1, self.n + 1) / self.r_max

    @property
    def dlam(self) -> float:
        return np.pi / self.r_max

    @cached_property
    def outer_mask(self) -> np.ndarray:
        start = int(np.ceil((1.0 - BOUNDARY_FRACTION) * self.n))
        mask = np.zeros(self.n, dtype=bool)
        mask[min(start, self.n - 1):] = True
        return mask

    def log_weight(self, geometry: Geometry) -> np.ndarray:
        r = self.r
        if geometry is Geometry.EUCLIDEAN:
            return np.log(r)
        # log sinh r without overflow for large r
        return r + np.log1p(-np.exp(-2.0 * r)) - np.log(2.0)

    def weight(self, geometry: Geometry) -> np.ndarray:
        return np.exp(self.log_weight(geometry))

    def inv_weight(self, geometry: Geometry) -> np.ndarray:
        return np.exp(-self.log_weight(geometry))

    def log_derivative(self, geometry: Geometry) -> np.ndarray:
        """w'/w: coth r on H^3, 1/r on R^3."""
        if geometry is Geometry.EUCLIDEAN:
            return 1.0 / self.r
        return 1.0 / np.tanh(self.r)

    def matches(self, other: "RadialGrid") -> bool:
        return self.n == other.n and np.isclose(self.r_max, other.r_max, rtol=1e-12)

    def require_match(self, other):
        if not self.matches(other):
            raise GridMismatch(
                f"grid (r_max={other.r_max}, n={other.n}) does not match "
                f"(r_max={self.r_max}, n={self.n})"
            )


@dataclass(eq=False)
class RadialField:
    grid: RadialGrid
    geometry: Geometry
    h: np.ndarray

    def __post_init__(self):
        h = np.asarray(self.h, dtype=complex).reshape(-1)
        if h.size != self.grid.n:
            raise GridMismatch(f"profile has {h.size} samples, grid has {self.grid.n}")
        self.h = h
        self.geometry = Geometry(self.geometry)

    # -----------------------------------------------------
    # Construction
    # -----------------------------------------------------
    @classmethod
    def zeros(cls, grid: RadialGrid, geometry: Geometry = Geometry.HYPERBOLIC) -> "RadialField":
        return cls(grid, geometry, np.zeros(grid.n, dtype=complex))

    @classmethod
    def from_values(cls, grid: RadialGrid, geometry: Geometry,
                    u: Union[np.ndarray, Callable[[np.ndarray], np.ndarray]]) -> "RadialField":
        """Build a field from u sampled on the grid (array or callable of r)."""
        geometry = Geometry(geometry)
        values = np.asarray(u(grid.r) if callable(u) else u, dtype=complex)
        # sinh overflows past r ~ 710; samples that vanish there stay zero
        with np.errstate(over="ignore", invalid="ignore"):
            h = grid.weight(geometry) * values
        return cls(grid, geometry, np.where(values == 0, 0.0, h))

    def with_h(self, h: np.ndarray) -> "RadialField":
        return RadialField(self.grid, self.geometry, h)

    # -----------------------------------------------------
    # Views
    # -----------------------------------------------------
    @property
    def u(self) -> np.ndarray:
        return self.h * self.grid.inv_weight(self.geometry)

    @property
    def r(self) -> np.ndarray:
        return self.grid.r

    def is_finite(self) -> bool:
        return bool(np.all(np.isfinite(self.h)))

    def boundary_mass(self) -> float:
        """Relative mass carried by the outer 5% of the grid."""
        total = np.sum(np.abs(self.h) ** 2)
        if total == 0:
            return 0.0
        return float(np.sum(np.abs(self.h[self.grid.outer_mask]) ** 2) / total)

    # -----------------------------------------------------
    # Arithmetic
    # -----------------------------------------------------
    def _check(self, other):
        self.grid.require_match(other.grid)
        if self.geometry is not other.geometry:
            raise GridMismatch("cannot combine hyperbolic and Euclidean fields")

    def __add__(self, other: "RadialField") -> "RadialField":
        self._check(other)
        return self.with_h(self.h + other.h)

    def __sub__(self, other: "RadialField") -> "RadialField":
        self._check(other)
        return self.with_h(self.h - other.h)

    def __mul__(self, c: complex) -> "RadialField":
        return self.with_h(c * self.h)

    __rmul__ = __mul__

    def __neg__(self) -> "RadialField":
        return self.with_h(-self.h)

    def conj(self) -> "RadialField":
        return self.with_h(np.conj(self.h))


@dataclass(eq=False)
class SpectralField:
    """Transform coefficients f~(lambda_m) on the dual grid of a RadialGrid."""

    grid: RadialGrid
    geometry: Geometry
    coeffs: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=complex).reshape(-1)
        if c.size != self.grid.n:
            raise GridMismatch(f"spectrum has {c.size} modes, grid has {self.grid.n}")
        self.coeffs = c
        self.geometry = Geometry(self.geometry)

    @property
    def lam(self) -> np.ndarray:
        return self.grid.lam

    def symbol(self) -> np.ndarray:
        """lambda^2 + rho^2 on the dual grid."""
        return self.grid.lam ** 2 + self.geometry.rho2
