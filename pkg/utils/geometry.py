"""
Hyperboloid model of H^3.

Points live on {x in R^4 : [x,x] = 1, x^0 > 0} with the Minkowski form
[x,y] = x0*y0 - x1*y1 - x2*y2 - x3*y3. Isometries are 4x4 matrices in
SO(3,1) with positive (0,0) entry. Every function here is pure.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import integrate
from scipy.spatial.transform import Rotation

from utils.errors import InvalidGroupElement

MINKOWSKI = np.diag([1.0, -1.0, -1.0, -1.0])
GROUP_TOLERANCE = 1e-8


@dataclass(eq=False)
class Point:
    x: np.ndarray

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float).reshape(4)
        self.x = x

    @property
    def radius(self) -> float:
        return distance(ORIGIN, self)


@dataclass(eq=False)
class GroupElement:
    m: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.m, dtype=float).reshape(4, 4)
        self.m = m

    def __matmul__(self, other: "GroupElement") -> "GroupElement":
        return compose(self, other)


ORIGIN = Point(np.array([1.0, 0.0, 0.0, 0.0]))
IDENTITY = GroupElement(np.eye(4))


# ---------------------------------------------------------
# Minkowski form and distance
# ---------------------------------------------------------
def minkowski_form(x, y) -> float:
    x = x.x if isinstance(x, Point) else np.asarray(x, dtype=float)
    y = y.x if isinstance(y, Point) else np.asarray(y, dtype=float)
    return float(x[0] * y[0] - x[1] * y[1] - x[2] * y[2] - x[3] * y[3])


def distance(p: Point, q: Point) -> float:
    # clamp guards coincident points against round-off below 1
    return float(np.arccosh(max(1.0, minkowski_form(p, q))))


def point_from_radius(r: float, direction=(1.0, 0.0, 0.0)) -> Point:
    """Point at hyperbolic distance r from the origin along a unit direction."""
    w = np.asarray(direction, dtype=float)
    w = w / np.linalg.norm(w)
    return Point(np.concatenate([[np.cosh(r)], np.sinh(r) * w]))


# ---------------------------------------------------------
# Group elements
# ---------------------------------------------------------
def group_defect(g: GroupElement) -> float:
    """Deviation of m^T I m from I and of det m from 1, relative to m00^2.

    Entries of an element at distance s from K are bounded by cosh s, so
    round-off in the Gram matrix scales with m00^2.
    """
    m = g.m
    gram = m.T @ MINKOWSKI @ m - MINKOWSKI
    scale = max(1.0, abs(m[0, 0])) ** 2
    return float(max(np.max(np.abs(gram)), abs(np.linalg.det(m) - 1.0)) / scale)


def validate_group_element(g: GroupElement, tol: float = GROUP_TOLERANCE) -> GroupElement:
    defect = group_defect(g)
    if not np.all(np.isfinite(g.m)) or defect > tol or g.m[0, 0] <= 0:
        raise InvalidGroupElement(f"matrix is not in SO(3,1)+ (defect {defect:.2e})")
    return g


def boost(s: float) -> GroupElement:
    """The one-parameter subgroup a_s acting in the (x0, x1) plane."""
    c, sh = np.cosh(s), np.sinh(s)
    m = np.eye(4)
    m[0, 0] = m[1, 1] = c
    m[0, 1] = m[1, 0] = sh
    return GroupElement(m)


def rotation(r: np.ndarray) -> GroupElement:
    """Embed a 3x3 rotation as an element of K = SO(3)."""
    m = np.eye(4)
    m[1:, 1:] = np.asarray(r, dtype=float)
    return GroupElement(m)


def random_rotation(rng: np.random.Generator) -> GroupElement:
    return rotation(Rotation.random(random_state=rng).as_matrix())


def random_group_element(rng: np.random.Generator, s_max: float = 3.0) -> GroupElement:
    s = rng.uniform(0.0, s_max)
    return compose(compose(random_rotation(rng), boost(s)), random_rotation(rng))


def compose(g: GroupElement, h: GroupElement) -> GroupElement:
    return GroupElement(g.m @ h.m)


def inverse(g: GroupElement) -> GroupElement:
    # for Lorentz matrices m^{-1} = I m^T I
    return GroupElement(MINKOWSKI @ g.m.T @ MINKOWSKI)


def boost_to(p) -> GroupElement:
    """The pure boost (symmetric, positive) sending the origin to p."""
    x = p.x if isinstance(p, Point) else np.asarray(p, dtype=float)
    m = np.empty((4, 4))
    m[0, 0] = x[0]
    m[0, 1:] = m[1:, 0] = x[1:]
    m[1:, 1:] = np.eye(3) + np.outer(x[1:], x[1:]) / (1.0 + x[0])
    return GroupElement(m)


def reorthonormalize(g: GroupElement) -> GroupElement:
    """Nearest element of the form b(p) k: removes accumulated drift.

    p is the image of the origin put back on the hyperboloid; the rotation
    k is read off without inverting the boost and projected onto SO(3).
    """
    m = g.m
    x = m[1:, 0]
    rho = np.linalg.norm(x)
    b = boost_to(np.concatenate([[np.sqrt(1.0 + rho * rho)], x]))
    if rho < 1e-12:
        r = m[1:, 1:]
    else:
        # b is the identity on x-perp and m[0, 1:] = x^T r
        w = x / rho
        r = m[1:, 1:] - np.outer(w, w @ m[1:, 1:]) + np.outer(w, m[0, 1:] / rho)
    u, _, vt = np.linalg.svd(r)
    if np.linalg.det(u @ vt) < 0:
        u[:, -1] = -u[:, -1]
    return compose(b, rotation(u @ vt))


def apply_isometry(g: GroupElement, p: Point) -> Point:
    validate_group_element(g)
    y = g.m @ p.x
    norm2 = minkowski_form(y, y)
    if norm2 <= 0:
        raise InvalidGroupElement("image left the hyperboloid")
    # rescale by [y,y]^{-1/2} to stay on the sheet
    return Point(y / np.sqrt(norm2))


def cartan_abs(g: GroupElement) -> float:
    """The A+ component s of g = k1 a_s k2, i.e. d(0, g.0)."""
    return float(np.arccosh(max(1.0, g.m[0, 0])))


# ---------------------------------------------------------
# Charts
# ---------------------------------------------------------
def chart_psi(h: GroupElement, v) -> Point:
    v = np.asarray(v, dtype=float).reshape(3)
    x = np.concatenate([[np.sqrt(1.0 + v @ v)], v])
    return Point(h.m @ x)


def chart_psi_inv(h: GroupElement, p: Point) -> np.ndarray:
    return (inverse(h).m @ p.x)[1:]


def measure_weight(v) -> float:
    """Density of dmu in the chart coordinates: (1 + |v|^2)^{-1/2}."""
    v = np.asarray(v, dtype=float)
    return float((1.0 + np.sum(v * v)) ** -0.5)


def iwasawa_chart(v1: float, v2: float, s: float) -> Point:
    """Horospherical coordinates: the image of (v1, v2) under the unipotent
    subgroup followed by the boost a_s, applied to the origin."""
    q = 0.5 * np.exp(-s) * (v1 * v1 + v2 * v2)
    return Point(
        np.array(
            [np.cosh(s) + q, np.sinh(s) + q, np.exp(-s) * v1, np.exp(-s) * v2]
        )
    )


# ---------------------------------------------------------
# Radial quadrature
# ---------------------------------------------------------
def integrate_radial(f: Callable[[float], float], r_max: float) -> float:
    """Integral of a radial function over the ball B(0, r_max), dmu = 4 pi sinh^2 r dr."""
    val, _ = integrate.quad(lambda r: 4 * np.pi * np.sinh(r) ** 2 * f(r), 0.0, r_max, limit=200)
    return val


def integrate_radial_via_chart(f: Callable[[float], float], r_max: float) -> float:
    """Same integral computed in the chart Psi_I, where |v| = sinh r."""
    v_max = np.sinh(r_max)

    def integrand(rho):
        return 4 * np.pi * rho * rho * measure_weight([rho, 0.0, 0.0]) * f(np.arcsinh(rho))

    val, _ = integrate.quad(integrand, 0.0, v_max, limit=200)
    return val
