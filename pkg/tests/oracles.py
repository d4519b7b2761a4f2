"""Independent reference computations used by the test suite.

None of these import the package under test; each is a separate route to
the same number (high precision special functions, a Galerkin
discretisation, symbolic algebra or brute-force geometry).
"""

from __future__ import annotations

import math

import mpmath as mp
import numpy as np
import sympy as sp


def ferrers(degree: float, order: int, theta: float, dps: int = 30) -> tuple[float, float]:
    """P_degree^order(cos theta) and its theta-derivative at high precision."""
    with mp.workdps(dps):
        x = mp.cos(theta)
        v = mp.legenp(degree, order, x, type=2)
        d = mp.diff(lambda t: mp.legenp(degree, order, mp.cos(t), type=2), theta)
        return float(v), float(d)


def hypergeometric_legendre(degree: float, theta: float) -> float:
    """P_degree(cos theta) = 2F1(-degree, degree + 1; 1; sin^2(theta/2)) by direct series."""
    with mp.workdps(40):
        return float(mp.hyp2f1(-degree, degree + 1, 1, mp.sin(mp.mpf(theta) / 2) ** 2))


def neumann_galerkin(theta0: float, m: int, degree: int = 40) -> np.ndarray:
    """Eigenvalues kappa = mu(mu+1) of the Legendre operator on (cos theta0, 1).

    Rayleigh-Ritz with trial functions (1 - x^2)^(m/2) x^j, natural (Neumann)
    condition at x = cos theta0, regularity at x = 1 built into the basis.
    The basis is orthonormalised in the mass inner product before solving.
    """
    a = math.cos(theta0)
    xg, wg = np.polynomial.legendre.leggauss(degree + 40)
    x = 0.5 * (1 - a) * xg + 0.5 * (1 + a)
    w = 0.5 * (1 - a) * wg
    t = (2 * x - (1 + a)) / (1 - a)
    V = np.polynomial.legendre.legvander(t, degree)
    dV = np.stack([np.polynomial.legendre.legval(t, np.polynomial.legendre.legder(np.eye(degree + 1)[j])) for j in range(degree + 1)], 1)
    dV *= 2 / (1 - a)
    s2 = 1 - x * x
    h = s2 ** (m / 2)
    dh = -m * x * s2 ** (m / 2 - 1) if m else np.zeros_like(x)
    B = h[:, None] * V
    dB = dh[:, None] * V + h[:, None] * dV
    K = (dB * (s2 * w)[:, None]).T @ dB
    if m:
        K += (B * (m * m / s2 * w)[:, None]).T @ B
    M = (B * w[:, None]).T @ B
    L = np.linalg.cholesky(M)
    Li = np.linalg.inv(L)
    return np.sort(np.linalg.eigvalsh(Li @ K @ Li.T))


def kappa_to_mu(kappa: float) -> float:
    return 0.5 * (-1.0 + math.sqrt(1.0 + 4.0 * kappa))


def mu2_plus_galerkin(theta0: float, m_max: int = 4) -> float:
    cands = []
    for m in range(m_max + 1):
        ev = neumann_galerkin(theta0, m)
        ev = ev[ev > 1e-8]
        cands.append(kappa_to_mu(ev[0]))
    return min(cands)


def logdet_extended(A: np.ndarray, dps: int = 60) -> tuple[int, float]:
    """(sign, log|det|) via an mpmath LU at extended precision."""
    with mp.workdps(dps):
        M = mp.matrix(A.tolist())
        d = mp.det(M)
        return int(mp.sign(d)), float(mp.log(abs(d)))


def brute_force_distance(theta0: float, point_cart: np.ndarray, n_t: int = 4000, n_phi: int = 721) -> float:
    """Distance to the lateral cone surface by minimising over a fine mesh and refining locally."""
    p = np.asarray(point_cart, float)
    r = np.linalg.norm(p)
    ts = np.linspace(0.0, 3.0 * r, n_t)
    ph = np.linspace(0.0, 2 * math.pi, n_phi)
    T, PH = np.meshgrid(ts, ph, indexing="ij")
    S = np.stack([T * math.sin(theta0) * np.cos(PH), T * math.sin(theta0) * np.sin(PH), T * math.cos(theta0) * np.ones_like(PH)])
    d = np.linalg.norm(S - p[:, None, None], axis=0)
    i, j = np.unravel_index(np.argmin(d), d.shape)
    t0, f0 = ts[i], ph[j]
    from scipy.optimize import minimize

    def dist(z):
        t, f = z
        q = np.array([t * math.sin(theta0) * math.cos(f), t * math.sin(theta0) * math.sin(f), t * math.cos(theta0)])
        return float(np.linalg.norm(q - p))

    res = minimize(dist, [t0, f0], method="Nelder-Mead", options={"xatol": 1e-12, "fatol": 1e-14, "maxiter": 4000})
    return min(res.fun, float(np.linalg.norm(p)))


def layer_polynomials_symbolic(k: int, sqrt_s):
    """Polynomial p, q solving p' - a p = nu^k and q'' - 2 a q' = -nu^k, q(0) = 0."""
    nu = sp.symbols("nu")
    a = sp.nsimplify(sqrt_s) if not isinstance(sqrt_s, sp.Basic) else sqrt_s
    pc = sp.symbols(f"p0:{k + 1}")
    qc = sp.symbols(f"q1:{k + 2}")
    p = sum(c * nu**j for j, c in enumerate(pc))
    q = sum(c * nu ** (j + 1) for j, c in enumerate(qc))
    eqs = sp.Poly(sp.diff(p, nu) - a * p - nu**k, nu).all_coeffs()
    eqs += sp.Poly(sp.diff(q, nu, 2) - 2 * a * sp.diff(q, nu) + nu**k, nu).all_coeffs()
    sol = sp.solve(eqs, list(pc) + list(qc), dict=True)[0]
    P_ = sp.Poly(p.subs(sol), nu)
    Q_ = sp.Poly(q.subs(sol), nu)
    return [complex(c) for c in reversed(P_.all_coeffs())], [complex(c) for c in reversed(Q_.all_coeffs())]


def temporal_l2_symbolic(expr_str: str) -> float:
    t = sp.symbols("t", positive=True)
    e = sp.sympify(expr_str, locals={"t": t})
    return float(sp.integrate(e**2, (t, 0, sp.oo)))


def exp_parseval_frequency(gamma: float) -> float:
    """(1/2pi) int_R |1/(gamma + 1 + i tau)|^2 dtau in closed form."""
    return 1.0 / (2.0 * (1.0 + gamma))
