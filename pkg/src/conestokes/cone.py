"""Circular cone geometry, wall distance and cutoff families."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .jets import Jet

__all__ = [
    "CircularCone",
    "CutoffFamily",
    "boundary_distance",
    "tangential_split",
    "cutoff",
    "cutoff_jet",
    "smoothstep",
    "SphericalJets",
    "spherical_jets",
    "DYADIC_C1",
    "DYADIC_C2",
]


def _default_delta(theta0: float) -> float:
    d = 0.3 * min(theta0, math.pi - theta0) / theta0
    if theta0 < math.pi / 2:
        # the layer must stay away from the axis, where the distance is not smooth
        d = min(d, 0.9 * math.sin(theta0))
    return d


@dataclass(frozen=True)
class CircularCone:
    """Cone {x : angle(x, e3) < theta0} with a boundary layer {nu < delta |x|}."""

    theta0: float
    delta: Optional[float] = None

    def __post_init__(self):
        t = self.theta0
        if not (math.isfinite(t) and 0.0 < t < math.pi):
            raise ValueError("theta0 must lie in (0, pi)")
        if self.delta is None:
            object.__setattr__(self, "delta", _default_delta(t))
        d = self.delta
        if not (math.isfinite(d) and 0.0 < d < 1.0):
            raise ValueError("delta must lie in (0, 1)")
        if t < math.pi / 2 and math.asin(d) >= t:
            raise ValueError("boundary layer would reach the axis; decrease delta")

    @property
    def layer_angle(self) -> float:
        """Angular width of the layer {sin(theta0 - theta) < delta}."""
        return math.asin(self.delta)

    def contains(self, theta) -> np.ndarray:
        return np.asarray(theta) < self.theta0

    def in_layer(self, theta) -> np.ndarray:
        th = np.asarray(theta)
        return (th < self.theta0) & (self.theta0 - th < self.layer_angle)


# ----------------------------------------------------------------------------
# distance to the lateral boundary
# ----------------------------------------------------------------------------


def _cart_frame(theta, phi):
    st, ct, sp, cp = np.sin(theta), np.cos(theta), np.sin(phi), np.cos(phi)
    e_r = np.array([st * cp, st * sp, ct])
    e_t = np.array([ct * cp, ct * sp, -st])
    return e_r, e_t


def boundary_distance(cone: CircularCone, point) -> tuple[float, np.ndarray]:
    """Distance ``nu`` from the point (r, theta, phi) to the boundary, and its gradient."""
    r, theta, phi = (float(v) for v in point)
    if not (r > 0 and 0.0 <= theta < cone.theta0):
        raise ValueError("point is not inside the cone")
    e_r, e_t = _cart_frame(theta, phi)
    a = cone.theta0 - theta
    if a < math.pi / 2:
        nu = r * math.sin(a)
        grad = math.sin(a) * e_r - math.cos(a) * e_t
    else:
        nu = r
        grad = e_r
    return nu, grad


def tangential_split(cone: CircularCone, point, v) -> tuple[complex, np.ndarray]:
    """Split ``v`` into its component along grad(nu) and the orthogonal remainder."""
    r, theta, phi = (float(x) for x in point)
    if not (r > 0 and cone.in_layer(theta)):
        raise ValueError("point is outside the boundary layer")
    _, g = boundary_distance(cone, point)
    v = np.asarray(v)
    vn = np.dot(v, g)
    return vn, v - vn * g


# ----------------------------------------------------------------------------
# cutoffs
# ----------------------------------------------------------------------------


def smoothstep(t):
    """Quintic C^2 step, 0 for t <= 0 and 1 for t >= 1, with two derivatives."""
    t = np.clip(np.asarray(t, dtype=float), 0.0, 1.0)
    s0 = t**3 * (10.0 - 15.0 * t + 6.0 * t * t)
    s1 = 30.0 * t * t * (1.0 - t) ** 2
    s2 = 60.0 * t * (1.0 - t) * (1.0 - 2.0 * t)
    return s0, s1, s2


# sup |S'| and sup |S''| of the quintic step
_S1MAX = 15.0 / 8.0
_S2MAX = 10.0 / math.sqrt(3.0)

# frozen constants in |d^j/dr^j zeta_nu| <= C_j 2^{-j nu}
DYADIC_C1 = 2.0 * _S1MAX / math.log(2.0)
DYADIC_C2 = 4.0 * (_S2MAX / math.log(2.0) ** 2 + _S1MAX / math.log(2.0))


@dataclass(frozen=True)
class CutoffFamily:
    """One member of a cutoff family.

    kind: ``"dyadic"`` (parameter ``nu``), ``"inner"`` (``eps``), ``"outer"``
    (``N``) or ``"layer"`` (``delta``; argument is nu/r).
    """

    kind: str
    nu: int = 0
    eps: float = 0.25
    N: float = 8.0
    delta: float = 0.3

    def __post_init__(self):
        if self.kind not in ("dyadic", "inner", "outer", "layer"):
            raise ValueError(f"unknown cutoff kind {self.kind!r}")
        if self.kind == "inner" and not (0.0 < self.eps < 0.5):
            raise ValueError("inner window needs 0 < eps < 1/2")
        if self.kind == "outer" and not (self.N > 2.0):
            raise ValueError("outer window needs N > 2")
        if self.kind == "layer" and not (0.0 < self.delta < 1.0):
            raise ValueError("layer cutoff needs 0 < delta < 1")


def _ramp_up(x, a, b):
    """S((x-a)/(b-a)) with x-derivatives."""
    L = b - a
    s0, s1, s2 = smoothstep((x - a) / L)
    return s0, s1 / L, s2 / L**2


def cutoff(family: CutoffFamily, t) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Value and first two derivatives of the cutoff at ``t`` (radius, or nu/r for layers)."""
    x = np.asarray(t, dtype=float)
    k = family.kind
    if k == "dyadic":
        if np.any(x <= 0):
            raise ValueError("dyadic cutoff needs r > 0")
        ln2 = math.log(2.0)
        u = np.log2(x) - family.nu
        up0, up1, up2 = smoothstep(u + 1.0)
        dn0, dn1, dn2 = smoothstep(u)
        left = u <= 0.0
        p0 = np.where(left, up0, 1.0 - dn0)
        p1 = np.where(left, up1, -dn1)
        p2 = np.where(left, up2, -dn2)
        d1 = p1 / (x * ln2)
        d2 = p2 / (x * ln2) ** 2 - p1 / (x * x * ln2)
        return p0, d1, d2
    if k == "inner":
        e = family.eps
        a0, a1, a2 = _ramp_up(x, e / 2.0, e)
        b0, b1, b2 = _ramp_up(x, 1.0, 2.0)
        return a0 * (1.0 - b0), a1 * (1.0 - b0) - a0 * b1, a2 * (1.0 - b0) - 2 * a1 * b1 - a0 * b2
    if k == "outer":
        N = family.N
        a0, a1, a2 = _ramp_up(x, 1.0, 2.0)
        b0, b1, b2 = _ramp_up(x, N, 2.0 * N)
        return a0 * (1.0 - b0), a1 * (1.0 - b0) - a0 * b1, a2 * (1.0 - b0) - 2 * a1 * b1 - a0 * b2
    d = family.delta
    b0, b1, b2 = _ramp_up(x, d / 2.0, d)
    return 1.0 - b0, -b1, -b2


def cutoff_jet(family: CutoffFamily, arg: Jet) -> Jet:
    v0, v1, v2 = cutoff(family, arg.val)
    return arg.compose(v0, v1, v2)


# ----------------------------------------------------------------------------
# spherical quantities as jets
# ----------------------------------------------------------------------------


class SphericalJets:
    """Lazily built jets of r, theta, phi-harmonics, frame vectors and wall distance."""

    def __init__(self, X, Y, Z):
        self.X, self.Y, self.Z = X, Y, Z
        self.rho2 = X * X + Y * Y
        self.rho = self.rho2.sqrt()
        self.r = (self.rho2 + Z * Z).sqrt()
        self.cos_t = Z / self.r
        self.sin_t = self.rho / self.r
        self._theta = None
        self._harm = {0: (Jet.const(1.0, X), Jet.const(0.0, X))}

    @property
    def theta(self) -> Jet:
        if self._theta is None:
            self._theta = self.cos_t.arccos()
        return self._theta

    def harmonic(self, m: int) -> tuple[Jet, Jet]:
        """(cos m phi, sin m phi)."""
        if m not in self._harm:
            c1, s1 = self.X / self.rho, self.Y / self.rho
            self._harm[1] = (c1, s1)
            k = max(self._harm)
            while k < m:
                ck, sk = self._harm[k]
                self._harm[k + 1] = (ck * c1 - sk * s1, sk * c1 + ck * s1)
                k += 1
        return self._harm[m]

    def frame(self):
        """Unit vectors e_r, e_theta, e_phi as tuples of jets."""
        r, rho = self.r, self.rho
        c1, s1 = self.harmonic(1)
        e_r = (self.X / r, self.Y / r, self.Z / r)
        e_t = (self.cos_t * c1, self.cos_t * s1, -self.sin_t)
        e_p = (-s1, c1, Jet.const(0.0, self.X))
        return e_r, e_t, e_p

    def wall_distance(self, theta0: float) -> Jet:
        """nu = sin(theta0) z - cos(theta0) rho, exact on the lateral-face side."""
        return math.sin(theta0) * self.Z - math.cos(theta0) * self.rho

    def wall_normal(self, theta0: float):
        """grad nu as jets (unit on the layer)."""
        c1, s1 = self.harmonic(1)
        ct = math.cos(theta0)
        return (-ct * c1, -ct * s1, Jet.const(math.sin(theta0), self.X))


def spherical_jets(X, Y, Z) -> SphericalJets:
    return SphericalJets(X, Y, Z)
