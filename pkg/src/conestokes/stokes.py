"""Dirichlet Stokes pencil on a spherical cap.

Substituting u = r^lam (U_r cos m phi, U_t cos m phi, W sin m phi) in the
spherical frame and p = r^(lam-1) P cos m phi into the stationary Stokes
system gives a boundary value problem in theta that is quadratic in lam. For
m = 0 the azimuthal component is taken independent of phi (swirl).

The theta-problem is discretised by Chebyshev collocation in x = cos(theta)
on [cos(theta0), 1]. Regularity on the axis is built into the unknowns:

* m >= 1: U_r = s^m a, P = s^m d, U_t - W = s^(m-1) b, U_t + W = s^(m+1) c
* m = 0:  U_r = a, P = d, U_t = s b, W = s c

with s = sin(theta), a, b, c polynomials of degree N and d of degree N-1.
The three momentum rows and the divergence row are collocated at N interior
Chebyshev-Gauss points and the Dirichlet rows a = b = c = 0 are imposed at
x = cos(theta0). Every eigenpair is re-checked against the 3D equations by
finite differences (:func:`fd_residual`).
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Optional, Sequence

import numpy as np
from numpy.polynomial import chebyshev as C

from .cone import CircularCone, SphericalJets, spherical_jets
from .jets import Jet, coordinates
from .numerics import Root, SignedLogDet, bracket_and_refine, lu_signed_logdet
from .spectra import PencilSpectrum, SpectralEntry

__all__ = [
    "StokesPencil",
    "StokesProfile",
    "StokesEigen",
    "stokes_pencil",
    "stokes_det",
    "stokes_spectrum",
    "lambda1_plus",
    "stokes_eigenvector",
    "stokes_eigenspace",
    "fd_residual",
    "eigenspace_projection_residual",
    "DEFAULT_RESOLUTION",
]

DEFAULT_RESOLUTION = 64
NULL_TOL = 1e-8
FD_TOL = 1e-4


# ----------------------------------------------------------------------------
# assembly
# ----------------------------------------------------------------------------


def _cheb_mats(N: int, x0: float, x: np.ndarray):
    """Values and x-derivatives (orders 0..2) of T_0..T_N on [x0, 1] at ``x``."""
    xi = (2.0 * x - (1.0 + x0)) / (1.0 - x0)
    sc = 2.0 / (1.0 - x0)
    eye = np.eye(N + 1)
    V0 = C.chebvander(xi, N)
    V1 = np.stack([C.chebval(xi, C.chebder(eye[k])) for k in range(N + 1)], axis=-1) * sc
    V2 = np.stack([C.chebval(xi, C.chebder(eye[k], 2)) for k in range(N + 1)], axis=-1) * sc**2
    return V0, V1, V2


def _powered(k: int, x, s, V0, V1, V2):
    """F = s^k h and its first two theta-derivatives, as matrices acting on h's coefficients."""
    x = x[:, None]
    s = s[:, None]
    F = s**k * V0
    F1 = k * s ** (k - 1) * x * V0 - s ** (k + 1) * V1
    F2 = k * (k * x * x - 1.0) * s ** (k - 2) * V0 - (2 * k + 1) * x * s**k * V1 + s ** (k + 2) * V2
    return F, F1, F2


def _powers(m: int):
    """Exponents of sin(theta) in front of (a, b, c, d)."""
    if m == 0:
        return 0, 1, 1, 0
    return m, m - 1, m + 1, m


def _components(m, x, s, V, Vd, embed):
    """Theta-profiles (value, d/dtheta, d2/dtheta2) of U_r, U_t, W, P as matrices."""
    ka, kb, kc, kd = _powers(m)
    A = [embed(M, 0) for M in _powered(ka, x, s, *V)]
    B = [embed(M, 1) for M in _powered(kb, x, s, *V)]
    Cc = [embed(M, 2) for M in _powered(kc, x, s, *V)]
    P = [embed(M, 3) for M in _powered(kd, x, s, *Vd)]
    if m == 0:
        Ut, W = B, Cc
    else:
        Ut = [(b + c) / 2.0 for b, c in zip(B, Cc)]
        W = [(c - b) / 2.0 for b, c in zip(B, Cc)]
    return A, Ut, W, P


@dataclass(frozen=True)
class StokesPencil:
    """Assembled collocation pencil A(lam) = A0 + lam A1 + lam^2 A2 for one mode."""

    theta0: float
    m: int
    N: int
    A0: np.ndarray = field(repr=False)
    A1: np.ndarray = field(repr=False)
    A2: np.ndarray = field(repr=False)

    @property
    def size(self) -> int:
        return self.A0.shape[0]

    def matrix(self, lam: float) -> np.ndarray:
        return self.A0 + lam * (self.A1 + lam * self.A2)

    def logdet(self, lam: float) -> SignedLogDet:
        return lu_signed_logdet(self.matrix(lam))


@lru_cache(maxsize=256)
def _assemble(theta0: float, m: int, N: int) -> StokesPencil:
    if N < 4:
        raise ValueError("resolution too small")
    x0 = math.cos(theta0)
    xi = np.cos(np.pi * (np.arange(N) + 0.5) / N)
    x = 0.5 * (1.0 + x0) + 0.5 * (1.0 - x0) * xi
    s = np.sqrt(1.0 - x * x)
    cot = (x / s)[:, None]
    S = s[:, None]
    V = _cheb_mats(N, x0, x)
    Vd = tuple(v[:, :N] for v in V)
    n = N + 1
    offsets = (0, n, 2 * n, 3 * n)
    total = 3 * n + N

    def embed(M, slot):
        out = np.zeros((M.shape[0], total))
        out[:, offsets[slot] : offsets[slot] + M.shape[1]] = M
        return out

    Ur, Ut, W, P = _components(m, x, s, V, Vd, embed)
    mm = float(m * m)

    def lap_rest(F):
        # L F = lam(lam+1) F + F'' + cot F' - m^2 F / s^2
        return F[2] + cot * F[1] - mm * F[0] / S**2

    rows = []
    # radial momentum
    rows.append(
        (
            -lap_rest(Ur) + 2 * Ur[0] + 2 * (Ut[1] + cot * Ut[0]) + 2 * m * W[0] / S - P[0],
            -Ur[0] + P[0],
            -Ur[0],
        )
    )
    # polar momentum
    rows.append((-lap_rest(Ut) + Ut[0] / S**2 - 2 * Ur[1] + 2 * m * cot * W[0] / S + P[1], -Ut[0], -Ut[0]))
    # azimuthal momentum
    rows.append(
        (
            -lap_rest(W) + W[0] / S**2 + 2 * m * Ur[0] / S + 2 * m * cot * Ut[0] / S - m * P[0] / S,
            -W[0],
            -W[0],
        )
    )
    # divergence
    div0 = 2 * Ur[0] + Ut[1] + cot * Ut[0] + m * W[0] / S
    rows.append((div0, Ur[0], np.zeros_like(div0)))
    bc = np.zeros((3, total))
    t_end = C.chebvander(np.array([-1.0]), N)[0]
    for j in range(3):
        bc[j, offsets[j] : offsets[j] + n] = t_end
    A0 = np.vstack([r[0] for r in rows] + [bc])
    A1 = np.vstack([r[1] for r in rows] + [np.zeros_like(bc)])
    A2 = np.vstack([r[2] for r in rows] + [np.zeros_like(bc)])
    for A in (A0, A1, A2):
        A.setflags(write=False)
    return StokesPencil(theta0, m, N, A0, A1, A2)


def stokes_pencil(cone: CircularCone, m: int, resolution: int = DEFAULT_RESOLUTION) -> StokesPencil:
    if int(m) != m or m < 0:
        raise ValueError("m must be a nonnegative integer")
    if resolution < 16:
        raise ValueError("resolution must be >= 16")
    return _assemble(float(cone.theta0), int(m), int(resolution))


def stokes_det(cone: CircularCone, lam: float, m: int, resolution: int = DEFAULT_RESOLUTION) -> SignedLogDet:
    """Signed log-determinant of the discretised pencil at real ``lam``."""
    if not math.isfinite(lam):
        raise ValueError("lambda must be finite")
    return stokes_pencil(cone, m, resolution).logdet(lam)


# ----------------------------------------------------------------------------
# eigen-profiles and 3D fields
# ----------------------------------------------------------------------------


@dataclass(frozen=True)
class StokesProfile:
    """Angular profiles of an eigenvector, evaluated from its collocation coefficients."""

    theta0: float
    m: int
    N: int
    coeffs: np.ndarray = field(repr=False)

    def components(self, theta, nderiv: int = 2) -> dict[str, list[np.ndarray]]:
        th = np.atleast_1d(np.asarray(theta, dtype=float))
        shape = th.shape
        t = th.ravel()
        x = np.cos(t)
        s = np.sin(t)
        x0 = math.cos(self.theta0)
        xi = (2.0 * x - (1.0 + x0)) / (1.0 - x0)
        sc = 2.0 / (1.0 - x0)
        n = self.N + 1
        cf = self.coeffs
        blocks = (cf[:n], cf[n : 2 * n], cf[2 * n : 3 * n], cf[3 * n :])

        def vals(c):
            return (
                C.chebval(xi, c)[:, None],
                C.chebval(xi, C.chebder(c))[:, None] * sc,
                C.chebval(xi, C.chebder(c, 2))[:, None] * sc**2,
            )

        ka, kb, kc, kd = _powers(self.m)
        A, B, Cc, P = (
            [M[:, 0] for M in _powered(k, x, s, *vals(c))] for k, c in zip((ka, kb, kc, kd), blocks)
        )
        if self.m == 0:
            Ut, W = B, Cc
        else:
            Ut = [(b + c) / 2.0 for b, c in zip(B, Cc)]
            W = [(c - b) / 2.0 for b, c in zip(B, Cc)]
        out = {}
        for name, F in (("u_r", A), ("u_theta", Ut), ("u_phi", W), ("p", P)):
            out[name] = [f.reshape(shape) for f in F[: nderiv + 1]]
        return out


@dataclass(frozen=True)
class StokesEigen:
    lam: float
    m: int
    theta0: float
    profile: StokesProfile = field(repr=False)
    multiplicity_flag: str = "simple"
    discrete_residual: float = 0.0
    nullity: int = 1

    def u0(self, theta):
        """Velocity profile (u_r, u_theta, u_phi) and theta-derivatives."""
        c = self.profile.components(theta, 1)
        return c["u_r"], c["u_theta"], c["u_phi"]

    def p0(self, theta):
        return self.profile.components(theta, 1)["p"]

    def dirichlet_residual(self) -> float:
        c = self.profile.components(np.array([self.theta0]), 0)
        return float(max(abs(c["u_r"][0][0]), abs(c["u_theta"][0][0]), abs(c["u_phi"][0][0])))

    def scale(self) -> tuple[float, float]:
        th = np.linspace(1e-4, self.theta0, 400)
        c = self.profile.components(th, 0)
        umax = float(np.max(np.sqrt(c["u_r"][0] ** 2 + c["u_theta"][0] ** 2 + c["u_phi"][0] ** 2)))
        pmax = float(np.max(np.abs(c["p"][0])))
        return umax, pmax

    def angular_jets(self, sph: SphericalJets):
        th = sph.theta
        comp = self.profile.components(th.val, 2)
        return {k: th.compose(*v) for k, v in comp.items()}

    def velocity_jets(self, sph: SphericalJets, power: Optional[float] = None):
        """Cartesian jets of r^lam u0(omega) with the mode's phi-dependence."""
        lam = self.lam if power is None else power
        a = self.angular_jets(sph)
        e_r, e_t, e_p = sph.frame()
        c, s = sph.harmonic(self.m)
        rl = sph.r**lam
        if self.m == 0:
            fr, ft, fp = a["u_r"], a["u_theta"], a["u_phi"]
        else:
            fr, ft, fp = a["u_r"] * c, a["u_theta"] * c, a["u_phi"] * s
        return tuple(rl * (fr * e_r[i] + ft * e_t[i] + fp * e_p[i]) for i in range(3))

    def pressure_jet(self, sph: SphericalJets, power: Optional[float] = None) -> Jet:
        lam = self.lam if power is None else power
        a = self.angular_jets(sph)
        c, _ = sph.harmonic(self.m)
        return sph.r ** (lam - 1.0) * (a["p"] * c if self.m else a["p"])

    def fields_at(self, points):
        """Plain values (u (3,...), p (...)) at Cartesian points."""
        X = coordinates(points, order=0)
        sph = spherical_jets(*X)
        u = self.velocity_jets(sph)
        p = self.pressure_jet(sph)
        return np.stack([ui.val for ui in u]), p.val


def _null_vectors(P: StokesPencil, lam: float):
    A = P.matrix(lam)
    # equilibrate rows so singular values are comparable across row types
    w = 1.0 / np.maximum(np.linalg.norm(A, axis=1), 1e-300)
    As = A * w[:, None]
    _, sv, Vt = np.linalg.svd(As)
    rel = sv / sv[0]
    return rel, Vt


def _normalise(profile_coeffs, theta0, m, N):
    prof = StokesProfile(theta0, m, N, profile_coeffs)
    th = np.linspace(1e-4, theta0, 400)
    c = prof.components(th, 0)
    umag = np.sqrt(c["u_r"][0] ** 2 + c["u_theta"][0] ** 2 + c["u_phi"][0] ** 2)
    pmag = np.abs(c["p"][0])
    umax, pmax = float(np.max(umag)), float(np.max(pmag))
    if umax > 1e-6 * max(pmax, 1e-300):
        k = int(np.argmax(umag))
        comp = max(("u_r", "u_theta", "u_phi"), key=lambda nm: abs(c[nm][0][k]))
        scale = umax * math.copysign(1.0, c[comp][0][k])
    else:
        k = int(np.argmax(pmag))
        scale = pmax * math.copysign(1.0, c["p"][0][k])
    return profile_coeffs / scale


def stokes_eigenspace(
    cone: CircularCone, lam: float, m: int, resolution: int = DEFAULT_RESOLUTION, null_tol: float = NULL_TOL
) -> list[StokesEigen]:
    """All numerically null directions of the discretised pencil at ``lam``."""
    P = stokes_pencil(cone, m, resolution)
    rel, Vt = _null_vectors(P, lam)
    k = int(np.count_nonzero(rel < null_tol))
    if k == 0:
        raise ValueError(f"lambda={lam} is not an eigenvalue for m={m} (smallest relative singular value {rel[-1]:.3e})")
    flag = "simple" if k == 1 else "suspected_multiple"
    out = []
    for j in range(k):
        v = _normalise(Vt[-1 - j], cone.theta0, m, resolution)
        out.append(
            StokesEigen(float(lam), int(m), cone.theta0, StokesProfile(cone.theta0, m, resolution, v), flag, float(rel[-1 - j]), k)
        )
    return out


def stokes_eigenvector(
    cone: CircularCone, lam: float, m: int, resolution: int = DEFAULT_RESOLUTION, multiplicity: Optional[str] = None
) -> StokesEigen:
    """Null vector of the discretised pencil (smallest singular direction), normalised.

    Normalisation: max |u0| = 1 with a positive largest component; when the
    velocity vanishes identically (pure pressure mode) max |p0| = 1 instead.
    """
    eig = stokes_eigenspace(cone, lam, m, resolution)[0]
    if multiplicity == "suspected_multiple" and eig.multiplicity_flag == "simple":
        eig = StokesEigen(eig.lam, eig.m, eig.theta0, eig.profile, "suspected_multiple", eig.discrete_residual, eig.nullity)
    return eig


# ----------------------------------------------------------------------------
# independent 3D residual check
# ----------------------------------------------------------------------------


def _random_interior(cone: CircularCone, n: int, seed: int, r_range=(0.5, 2.0), margin: float = 0.02):
    rng = np.random.default_rng(seed)
    r = rng.uniform(*r_range, n)
    ct = rng.uniform(math.cos(cone.theta0 - margin), math.cos(margin), n)
    st = np.sqrt(1 - ct * ct)
    ph = rng.uniform(0, 2 * math.pi, n)
    return np.array([r * st * np.cos(ph), r * st * np.sin(ph), r * ct])


def fd_residual(eig: StokesEigen, cone: CircularCone, n_points: int = 100, seed: int = 0, rel_h: float = 1e-3):
    """Max relative residuals of -Lap v + grad q and div v by central differences.

    v = r^lam u0 and q = r^(lam-1) p0 are evaluated pointwise only; the
    residuals are scaled by |x|^(lam-2) (momentum) and |x|^(lam-1)
    (divergence) times the profile magnitude.
    """
    pts = _random_interior(cone, n_points, seed)
    r = np.linalg.norm(pts, axis=0)
    h = rel_h * r
    umax, pmax = eig.scale()
    mag = umax + pmax
    lap = np.zeros((3, n_points))
    gq = np.zeros((3, n_points))
    div = np.zeros(n_points)
    u_c, _ = eig.fields_at(pts)
    for i in range(3):
        e = np.zeros((3, 1))
        e[i] = 1.0
        up, qp = eig.fields_at(pts + h * e)
        um, qm = eig.fields_at(pts - h * e)
        lap += (up - 2 * u_c + um) / h**2
        gq[i] = (qp - qm) / (2 * h)
        div += (up[i] - um[i]) / (2 * h)
    mom = np.linalg.norm(-lap + gq, axis=0) / (r ** (eig.lam - 2.0) * mag)
    dv = np.abs(div) / (r ** (eig.lam - 1.0) * mag)
    return float(np.max(mom)), float(np.max(dv))


# ----------------------------------------------------------------------------
# spectrum
# ----------------------------------------------------------------------------

_SCAN_STEP = 0.01
_PAD = 0.0137
_ANCHORS = (-2.0, 1.0)


def _scan_mode(theta0: float, delta: float, m: int, resolution: int, window, tol: float):
    cone = CircularCone(theta0, delta)
    P = stokes_pencil(cone, m, resolution)
    lo, hi = window[0] - _PAD, window[1] + _PAD
    npts = int(math.ceil((hi - lo) / _SCAN_STEP)) + 1
    grid = np.linspace(lo, hi, npts)
    lds = [P.logdet(l) for l in grid]
    finite = [d.log_magnitude for d in lds if d.sign != 0]
    L0 = max(finite) if finite else 0.0
    vals = np.array([d.sign * math.exp(d.log_magnitude - L0) if d.sign else 0.0 for d in lds])

    def f(l):
        d = P.logdet(l)
        return d.sign * math.exp(d.log_magnitude - L0) if d.sign else 0.0

    roots = bracket_and_refine(f, (lo, hi), npts, tol, values=vals)
    out = []
    for rt in roots:
        if not (window[0] - 1e-9 <= rt.x <= window[1] + 1e-9):
            continue
        rel, _ = _null_vectors(P, rt.x)
        out.append((rt.x, rt.kind, float(rel[-1]), int(np.count_nonzero(rel < NULL_TOL))))
    # 1 and -2 are eigenvalues for every cone; a split double root next to them
    # can be refined to just outside the window, so test them directly.
    for a in _ANCHORS:
        if not window[0] - 1e-12 <= a <= window[1] + 1e-12 or any(abs(r[0] - a) < 1e-6 for r in out):
            continue
        rel, _ = _null_vectors(P, a)
        if rel[-1] < NULL_TOL:
            out.append((a, "anchor", float(rel[-1]), int(np.count_nonzero(rel < NULL_TOL))))
    out.sort(key=lambda r: r[0])
    return m, out


def stokes_spectrum(
    cone: CircularCone,
    m_max: int = 6,
    window: Sequence[float] = (-2.0, 1.6),
    tol: float = 1e-12,
    resolution: int = DEFAULT_RESOLUTION,
    workers: int = 1,
    validate: bool = True,
    fd_points: int = 100,
    seed: int = 0,
) -> PencilSpectrum:
    """Real eigenvalues of the Stokes pencil in ``window``, validated in 3D.

    A determinant root is accepted when the discrete null residual is below
    1e-8 and the finite-difference residual of the reconstructed 3D field is
    below 1e-4; otherwise it is listed under ``rejected``.
    """
    lo, hi = float(window[0]), float(window[1])
    if not (-2.0 - 1e-12 <= lo < hi <= 1.6 + 1e-12):
        raise ValueError("window must lie inside [-2, 1.6]")
    tasks = [(cone.theta0, cone.delta, m, resolution, (lo, hi), tol) for m in range(m_max + 1)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            results = list(ex.map(_scan_mode_star, tasks))
    else:
        results = [_scan_mode(*t) for t in tasks]
    results.sort(key=lambda t: t[0])
    entries, rejected = [], []
    worst_fd = 0.0
    for m, roots in results:
        for lam, kind, null_res, nullity in roots:
            mult = "suspected_multiple" if (kind not in ("simple", "anchor") or nullity > 1) else "simple"
            ok = null_res < NULL_TOL
            fd = math.nan
            if ok and validate:
                eig = stokes_eigenvector(cone, lam, m, resolution, mult)
                fd = max(fd_residual(eig, cone, fd_points, seed))
                ok = fd <= FD_TOL
                worst_fd = max(worst_fd, fd)
            e = SpectralEntry(float(lam), int(m), mult, float(null_res))
            (entries if ok else rejected).append(e)
    entries.sort(key=lambda e: (e.value, e.m))
    return PencilSpectrum(
        kind="stokes",
        theta0=cone.theta0,
        window=(lo, hi),
        m_max=m_max,
        tol=tol,
        entries=tuple(entries),
        rejected=tuple(rejected),
        metadata={
            "resolution": resolution,
            "scan_step": _SCAN_STEP,
            "real_axis_only": True,
            "note": "complex eigenvalues are not searched; realness is only guaranteed for -2 <= Re lam <= 1",
            "max_fd_residual": worst_fd if validate else None,
        },
    )


def _scan_mode_star(args):
    return _scan_mode(*args)


def lambda1_plus(
    cone: CircularCone, resolution: int = DEFAULT_RESOLUTION, m_max: int = 6, workers: int = 1
) -> float:
    """Smallest positive eigenvalue; lam = 1 is always present so the result is <= 1."""
    spec = stokes_spectrum(cone, m_max, (1e-3, 1.0), resolution=resolution, workers=workers, validate=False)
    pos = [v for v in spec.values() if v > 1e-6]
    return min(pos) if pos else 1.0


def eigenspace_projection_residual(
    cone: CircularCone,
    lam: float,
    target,
    m_max: int = 3,
    resolution: int = DEFAULT_RESOLUTION,
    n_points: int = 200,
    seed: int = 0,
) -> float:
    """Relative least-squares distance of a field to the eigenspace at ``lam``.

    ``target(points)`` returns (u (3, n), p (n)). The eigenspace is spanned
    by the null vectors of every mode up to ``m_max``, in both the cos and
    the sin azimuthal orientation.
    """
    pts = _random_interior(cone, n_points, seed)
    cols = []
    for m in range(m_max + 1):
        try:
            basis = stokes_eigenspace(cone, lam, m, resolution)
        except ValueError:
            continue
        for eig in basis:
            for rot in ((0.0,) if m == 0 else (0.0, math.pi / (2 * m))):
                c, s = math.cos(rot), math.sin(rot)
                R = np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])
                u, p = eig.fields_at(R.T @ pts)
                cols.append(np.concatenate([(R @ u).ravel(), p]))
    tu, tp = target(pts)
    b = np.concatenate([np.asarray(tu, float).ravel(), np.asarray(tp, float)])
    if not cols:
        return 1.0
    A = np.stack(cols, axis=1)
    coef, *_ = np.linalg.lstsq(A, b, rcond=None)
    return float(np.linalg.norm(A @ coef - b) / np.linalg.norm(b))
