"""Neumann pencil of the Laplace-Beltrami operator on a spherical cap.

For the cap of half-angle theta0 and azimuthal mode m, mu is an eigenvalue
exactly when the axis-regular Legendre solution of degree mu has vanishing
theta-derivative at theta0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .cone import CircularCone, SphericalJets
from .jets import Jet
from .numerics import LegendreProfile, Root, bracket_and_refine, legendre_regular
from .spectra import PencilSpectrum, SpectralEntry

__all__ = [
    "NeumannEigen",
    "neumann_condition",
    "neumann_spectrum",
    "neumann_eigen",
    "mu2_plus",
    "mu2_plus_mode",
    "laplace_beltrami_residual",
]

DEFAULT_TOL = 1e-10


def neumann_condition(theta0: float, mu, m: int) -> np.ndarray:
    """theta-derivative at theta0 of the axis-regular solution, for each degree in ``mu``."""
    _, dy = legendre_regular(np.atleast_1d(np.asarray(mu, dtype=float)), m, theta0)
    return dy


@dataclass(frozen=True)
class NeumannEigen:
    mu: float
    m: int
    theta0: float
    bc_residual: float
    profile: LegendreProfile = field(repr=False, compare=False)

    def angular(self, theta, nderiv: int = 1):
        """Profile phi(theta) and its theta-derivatives (up to third order)."""
        return self.profile(theta, nderiv)

    def pressure_jet(self, sph: SphericalJets) -> Jet:
        """r^mu phi(theta) cos(m phi)."""
        th = sph.theta
        y = self.profile(th.val, 2)
        ang = th.compose(y[0], y[1], y[2])
        c, _ = sph.harmonic(self.m)
        return sph.r ** self.mu * ang * c

    def pressure_gradient_jets(self, sph: SphericalJets) -> tuple[Jet, Jet, Jet]:
        """Cartesian jets of grad(r^mu phi(theta) cos m phi), exact to second order."""
        th = sph.theta
        y = self.profile(th.val, 3)
        Y = th.compose(y[0], y[1], y[2])
        dY = th.compose(y[1], y[2], y[3])
        c, s = sph.harmonic(self.m)
        e_r, e_t, e_p = sph.frame()
        rp = sph.r ** (self.mu - 1.0)
        comps_r = self.mu * Y * c
        comps_t = dY * c
        out = [comps_r * e_r[i] + comps_t * e_t[i] for i in range(3)]
        if self.m:
            comps_p = -self.m * Y * s / sph.sin_t
            out = [out[i] + comps_p * e_p[i] for i in range(3)]
        return tuple(rp * o for o in out)


def _scan_step(theta0: float) -> float:
    return 0.02 * min(1.0, theta0)


def _mode_roots(theta0: float, m: int, window: Sequence[float], tol: float) -> list[Root]:
    lo, hi = float(window[0]), float(window[1])
    npts = max(8, int(math.ceil((hi - lo) / _scan_step(theta0))) + 1)
    grid = np.linspace(lo, hi, npts)
    vals = neumann_condition(theta0, grid, m)
    scalar = lambda mu: float(neumann_condition(theta0, mu, m)[0])  # noqa: E731
    # locate tightly so that the boundary value itself, not just the bracket, meets tol
    return bracket_and_refine(scalar, (lo, hi), npts, min(tol, 1e-14), values=vals)


def neumann_eigen(cone: CircularCone, mu: float, m: int) -> NeumannEigen:
    res = float(abs(neumann_condition(cone.theta0, mu, m)[0]))
    return NeumannEigen(mu, m, cone.theta0, res, LegendreProfile(mu, m, min(cone.theta0 * 1.05, math.pi - 1e-6)))


def neumann_spectrum(
    cone: CircularCone,
    m_max: int = 6,
    window: Sequence[float] = (-4.0, 2.0),
    tol: float = DEFAULT_TOL,
) -> PencilSpectrum:
    """All real Neumann eigenvalues in ``window`` for modes 0..m_max."""
    lo, hi = float(window[0]), float(window[1])
    if not (math.isfinite(lo) and math.isfinite(hi)) or hi <= lo:
        raise ValueError("window must be a bounded nonempty interval")
    pad = 1e-3
    entries, rejected = [], []
    for m in range(m_max + 1):
        for root in _mode_roots(cone.theta0, m, (lo - pad, hi + pad), tol):
            if not (lo - 1e-9 <= root.x <= hi + 1e-9):
                continue
            mult = "suspected_multiple" if root.kind != "simple" else "simple"
            e = SpectralEntry(float(root.x), m, mult, float(root.residual))
            accepted = root.residual <= tol
            (entries if accepted else rejected).append(e)
    entries.sort(key=lambda e: (e.value, e.m))
    return PencilSpectrum(
        kind="neumann",
        theta0=cone.theta0,
        window=(lo, hi),
        m_max=m_max,
        tol=tol,
        entries=tuple(entries),
        rejected=tuple(rejected),
        metadata={"scan_step": _scan_step(cone.theta0), "normalisation": "axis-regular, sin^m leading term"},
    )


def _first_positive(theta0: float, m: int, tol: float, start: float = 1e-3) -> float:
    """Smallest root above ``start`` of the mode-m condition, searching outward."""
    lo, width = start, 4.0
    while lo < 400.0:
        hi = lo + width
        roots = [r for r in _mode_roots(theta0, m, (lo, hi), tol) if r.x > start]
        if roots:
            return roots[0].x
        lo, width = hi, width * 2
    return math.inf


def mu2_plus_mode(cone: CircularCone, tol: float = DEFAULT_TOL, m_cap: int = 40) -> tuple[float, int]:
    """(mu2+, m) for the smallest positive Neumann eigenvalue over all modes.

    Modes are visited in increasing m; the search stops once two consecutive
    modes produce nothing below the current candidate plus one.
    """
    best, best_m = math.inf, -1
    quiet = 0
    for m in range(m_cap + 1):
        v = _first_positive(cone.theta0, m, tol)
        if v < best + 1.0:
            if v < best:
                best, best_m = v, m
            quiet = 0
        else:
            quiet += 1
        if quiet >= 2:
            break
    return best, best_m


def mu2_plus(cone: CircularCone, tol: float = DEFAULT_TOL, m_cap: int = 40) -> float:
    """Smallest positive Neumann eigenvalue over all modes."""
    return mu2_plus_mode(cone, tol, m_cap)[0]


def laplace_beltrami_residual(eig: NeumannEigen, thetas, phis, h: float = 1e-4) -> np.ndarray:
    """Relative residual of -Lap_S(Y) - mu(mu+1) Y for Y = phi(theta) cos(m phi).

    theta-derivatives by central differences; the azimuthal factor is differentiated exactly.
    """
    th = np.asarray(thetas, dtype=float)
    ph = np.asarray(phis, dtype=float)

    def Y(t, p):
        return eig.profile(t, 1)[0] * np.cos(eig.m * p)

    s = np.sin(th)
    d_t = (Y(th + h, ph) - Y(th - h, ph)) / (2 * h)
    d_tt = (Y(th + h, ph) - 2 * Y(th, ph) + Y(th - h, ph)) / h**2
    d_pp = -(eig.m**2) * Y(th, ph)
    lap = d_tt + np.cos(th) / s * d_t + d_pp / s**2
    kappa = eig.mu * (eig.mu + 1.0)
    y = Y(th, ph)
    scale = np.max(np.abs(eig.profile(np.linspace(1e-3, eig.theta0, 200), 1)[0])) * max(1.0, abs(kappa))
    return np.abs(-lap - kappa * y) / scale
