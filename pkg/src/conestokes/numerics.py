"""Numerical primitives shared by the pencil solvers and the norm quadrature.

Legendre functions of real degree are obtained by integrating the associated
Legendre equation in the polar angle, starting from the hypergeometric
(Frobenius) expansion of the solution that is regular on the axis.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np
from scipy.integrate import solve_ivp
from scipy.linalg import LinAlgWarning, lu_factor
from scipy.optimize import brentq, minimize_scalar

__all__ = [
    "LegendreValue",
    "SignedLogDet",
    "ComplexLogDet",
    "Root",
    "ScanBudgetExceeded",
    "legendre_p",
    "legendre_regular",
    "legendre_normalization",
    "LegendreProfile",
    "bracket_and_refine",
    "gauss_nodes",
    "lu_signed_logdet",
    "dsum",
]

_SERIES_THETA = 0.25
_RTOL = 1e-13
_MIN_SERIES_ORDER = 10


@dataclass(frozen=True)
class LegendreValue:
    value: float
    theta_derivative: float


@dataclass(frozen=True)
class SignedLogDet:
    sign: int
    log_magnitude: float

    def value(self) -> float:
        return self.sign * math.exp(self.log_magnitude) if self.sign else 0.0


@dataclass(frozen=True)
class ComplexLogDet:
    phase: complex
    log_magnitude: float


@dataclass(frozen=True)
class Root:
    """A refined root. ``kind`` is ``"simple"`` or ``"suspected_double"``."""

    x: float
    residual: float
    kind: str = "simple"
    bracket: tuple[float, float] = (math.nan, math.nan)


class ScanBudgetExceeded(RuntimeError):
    """Raised when a scan runs out of function evaluations; carries partial roots."""

    def __init__(self, message: str, partial: list[Root]):
        super().__init__(message)
        self.partial = partial


def dsum(values: Iterable[float]) -> float:
    """Correctly rounded sum, hence independent of grouping or worker layout."""
    if not isinstance(values, np.ndarray):
        values = list(values)
    return math.fsum(np.ravel(np.asarray(values, dtype=float)).tolist())


# ----------------------------------------------------------------------------
# Legendre functions
# ----------------------------------------------------------------------------


def _check_theta(theta: float) -> None:
    if not np.all(np.isfinite(theta)):
        raise ValueError("theta must be finite")
    if np.any(np.asarray(theta) <= 0.0) or np.any(np.asarray(theta) >= math.pi):
        raise ValueError("theta must lie in (0, pi)")


def _reflect(degree):
    d = np.asarray(degree, dtype=float)
    return np.where(d < -0.5, -1.0 - d, d)


def _series(nu, m: int, theta):
    """Regular solution sin^m(t) 2F1(m-nu, m+nu+1; m+1; sin^2(t/2)) and its t-derivative.

    ``nu`` and ``theta`` broadcast against each other.
    """
    nu, theta = np.broadcast_arrays(np.asarray(nu, dtype=float), np.asarray(theta, dtype=float))
    s, c = np.sin(theta), np.cos(theta)
    z = np.sin(0.5 * theta) ** 2
    a = m - nu
    b = m + nu + 1.0
    term = np.ones_like(z)
    F = np.ones_like(z)
    dF = np.zeros_like(z)
    n = 0
    while True:
        dF = dF + (n + 1.0) * term * (a + n) * (b + n) / ((m + 1.0 + n) * (n + 1.0))
        term = term * (a + n) * (b + n) / ((m + 1.0 + n) * (n + 1.0)) * z
        n += 1
        F = F + term
        if n >= _MIN_SERIES_ORDER and np.all(np.abs(term) <= 1e-18 * np.maximum(np.abs(F), 1e-300)):
            break
        if n > 400:
            raise RuntimeError("hypergeometric start-up series failed to converge")
    y = s**m * F
    dy = (m * s ** (m - 1) * c * F if m > 0 else 0.0) + s**m * dF * (0.5 * s)
    return y, dy


def _rhs_factory(nu: np.ndarray, m: int):
    kappa = nu * (nu + 1.0)
    k = nu.size

    def rhs(t, state):
        y = state[:k]
        dy = state[k:]
        s = math.sin(t)
        ddy = -math.cos(t) / s * dy - (kappa - m * m / (s * s)) * y
        return np.concatenate([dy, ddy])

    return rhs


def _higher(nu, m, theta, y, dy):
    """Second and third theta-derivatives from the ODE itself."""
    kappa = nu * (nu + 1.0)
    s = np.sin(theta)
    c = np.cos(theta)
    q = kappa - m * m / (s * s)
    d2 = -c / s * dy - q * y
    d3 = -c / s * d2 + dy / (s * s) - q * dy - 2.0 * m * m * c / s**3 * y
    return d2, d3


def legendre_regular(degrees, order: int, theta: float) -> tuple[np.ndarray, np.ndarray]:
    """Axis-regular solution normalised as sin^m(t) * (1 + O(t^2)) and its theta derivative.

    ``degrees`` may be an array; all degrees are integrated together in one ODE system.
    The normalisation is invariant under degree -> -1 - degree.
    """
    _check_theta(theta)
    if order < 0 or int(order) != order:
        raise ValueError("order must be a nonnegative integer")
    nu = np.atleast_1d(_reflect(degrees)).astype(float)
    if not np.all(np.isfinite(nu)):
        raise ValueError("degree must be finite")
    t0 = min(theta, _SERIES_THETA)
    y0, dy0 = _series(nu, order, t0)
    if theta <= t0:
        return y0, dy0
    scale = np.maximum(np.abs(y0), np.abs(dy0))
    sol = solve_ivp(
        _rhs_factory(nu, order),
        (t0, theta),
        np.concatenate([y0, dy0]),
        method="DOP853",
        rtol=_RTOL,
        atol=np.concatenate([scale, scale]) * 1e-16,
    )
    if not sol.success:
        raise RuntimeError(f"Legendre integration failed: {sol.message}")
    k = nu.size
    return sol.y[:k, -1], sol.y[k:, -1]


def legendre_normalization(degree: float, order: int) -> float:
    """Factor turning the axis-regular solution into the Ferrers function P_degree^order."""
    nu = float(_reflect(degree))
    prod = 1.0
    for j in range(-order + 1, order + 1):
        prod *= nu + j
    return (-1.0) ** order * prod / (2.0**order * math.factorial(order))


def legendre_p(degree: float, order: int, theta: float) -> LegendreValue:
    """Ferrers function P_degree^order(cos theta) and its theta-derivative (Condon-Shortley phase)."""
    if not (math.isfinite(degree) and math.isfinite(theta)):
        raise ValueError("non-finite input")
    y, dy = legendre_regular(degree, order, theta)
    c = legendre_normalization(degree, order)
    return LegendreValue(float(c * y[0]), float(c * dy[0]))


class LegendreProfile:
    """Dense evaluator of the axis-regular solution on (0, theta_max].

    Returns derivatives up to third order; orders two and three come from the ODE.
    """

    def __init__(self, degree: float, order: int, theta_max: float):
        _check_theta(theta_max)
        self.degree = float(_reflect(degree))
        self.order = int(order)
        self.theta_max = float(theta_max)
        self._nu = np.array([self.degree])
        self._t0 = min(theta_max, _SERIES_THETA)
        y0, dy0 = _series(self._nu, self.order, self._t0)
        self._sol = None
        if theta_max > self._t0:
            scale = max(abs(y0[0]), abs(dy0[0]))
            sol = solve_ivp(
                _rhs_factory(self._nu, self.order),
                (self._t0, theta_max),
                np.array([y0[0], dy0[0]]),
                method="DOP853",
                rtol=_RTOL,
                atol=scale * 1e-16,
                dense_output=True,
            )
            if not sol.success:
                raise RuntimeError(sol.message)
            self._sol = sol.sol

    def __call__(self, theta, nderiv: int = 1) -> list[np.ndarray]:
        th = np.asarray(theta, dtype=float)
        flat = th.ravel()
        y = np.empty_like(flat)
        dy = np.empty_like(flat)
        low = flat <= self._t0
        if np.any(low):
            y[low], dy[low] = _series(self.degree, self.order, flat[low])
        high = ~low
        if np.any(high):
            if np.any(flat[high] > self.theta_max * (1 + 1e-12)):
                raise ValueError("theta beyond the integrated range")
            st = self._sol(np.minimum(flat[high], self.theta_max))
            y[high], dy[high] = st[0], st[1]
        out = [y.reshape(th.shape), dy.reshape(th.shape)]
        if nderiv >= 2:
            d2, d3 = _higher(self.degree, self.order, th, out[0], out[1])
            out += [d2, d3][: nderiv - 1]
        return out[: nderiv + 1]


# ----------------------------------------------------------------------------
# Root finding
# ----------------------------------------------------------------------------


def bracket_and_refine(
    f: Callable[[float], float],
    window: Sequence[float],
    scan_points: int,
    tol: float,
    *,
    max_evals: int = 100_000,
    values: np.ndarray | None = None,
) -> list[Root]:
    """Find all roots of ``f`` in ``window`` by a uniform scan plus refinement.

    Sign changes are refined with Brent's method. A strict local minimum of
    ``|f|`` on the scan grid without a sign change is refined by bounded
    minimisation and reported as ``suspected_double`` when the minimum falls
    below ``sqrt(tol)`` relative to the larger neighbouring grid value.
    ``values`` may supply precomputed samples on the scan grid.
    """
    a, b = float(window[0]), float(window[1])
    if not (math.isfinite(a) and math.isfinite(b)) or b <= a:
        raise ValueError("degenerate window")
    if scan_points < 2:
        raise ValueError("scan_points must be >= 2")
    evals = [0]

    def F(x):
        evals[0] += 1
        if evals[0] > max_evals:
            raise _Budget()
        v = float(f(x))
        if not math.isfinite(v):
            raise ValueError(f"non-finite function value at {x}")
        return v

    xs = np.linspace(a, b, scan_points)
    roots: list[Root] = []
    try:
        fs = np.asarray(values, dtype=float) if values is not None else np.array([F(x) for x in xs])
        if fs.shape != xs.shape:
            raise ValueError("values must match the scan grid")
        sg = np.sign(fs)
        n = len(xs)
        for i in range(n):
            if fs[i] == 0.0:
                left = sg[i - 1] if i > 0 else 0
                right = sg[i + 1] if i < n - 1 else 0
                kind = "suspected_double" if (left != 0 and left == right) else "simple"
                roots.append(Root(float(xs[i]), 0.0, kind, (float(xs[i]), float(xs[i]))))
        for i in range(n - 1):
            if sg[i] * sg[i + 1] < 0:
                x = brentq(F, xs[i], xs[i + 1], xtol=tol, rtol=4 * np.finfo(float).eps, maxiter=500)
                roots.append(Root(float(x), abs(F(x)), "simple", (float(xs[i]), float(xs[i + 1]))))
        absf = np.abs(fs)
        for i in range(1, n - 1):
            if not (absf[i] < absf[i - 1] and absf[i] < absf[i + 1]):
                continue
            if sg[i] == 0 or sg[i - 1] != sg[i] or sg[i + 1] != sg[i]:
                continue
            res = minimize_scalar(
                lambda x: abs(F(x)),
                bounds=(xs[i - 1], xs[i + 1]),
                method="bounded",
                options={"xatol": tol, "maxiter": 500},
            )
            fmin = float(res.fun)
            scale = max(absf[i - 1], absf[i + 1])
            if fmin < math.sqrt(tol) * scale:
                roots.append(Root(float(res.x), fmin, "suspected_double", (float(xs[i - 1]), float(xs[i + 1]))))
    except _Budget:
        roots.sort(key=lambda r: r.x)
        raise ScanBudgetExceeded(f"scan budget of {max_evals} evaluations exhausted", roots) from None
    roots.sort(key=lambda r: r.x)
    return roots


class _Budget(Exception):
    pass


# ----------------------------------------------------------------------------
# Quadrature and determinants
# ----------------------------------------------------------------------------


def gauss_nodes(n: int, interval: Sequence[float] = (-1.0, 1.0)) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre nodes and weights on ``interval``; exact for degree <= 2n-1."""
    if int(n) != n or n < 1:
        raise ValueError("n must be a positive integer")
    a, b = float(interval[0]), float(interval[1])
    if not (math.isfinite(a) and math.isfinite(b)) or b <= a:
        raise ValueError("invalid interval")
    x, w = np.polynomial.legendre.leggauss(int(n))
    half = 0.5 * (b - a)
    return half * x + 0.5 * (a + b), half * w


def lu_signed_logdet(matrix) -> SignedLogDet | ComplexLogDet:
    """Log-determinant through partial-pivoting LU.

    Real input gives a :class:`SignedLogDet`; complex input a :class:`ComplexLogDet`.
    An exactly zero pivot yields sign (or phase) 0 and log magnitude ``-inf``.
    """
    A = np.asarray(matrix)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError("matrix must be square")
    cplx = np.iscomplexobj(A)
    if A.shape[0] == 0:
        return ComplexLogDet(1.0 + 0j, 0.0) if cplx else SignedLogDet(1, 0.0)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", LinAlgWarning)
        lu, piv = lu_factor(A, check_finite=True)
    d = np.diag(lu)
    swaps = int(np.count_nonzero(piv != np.arange(len(piv))))
    if np.any(d == 0):
        return ComplexLogDet(0j, -math.inf) if cplx else SignedLogDet(0, -math.inf)
    logmag = math.fsum(np.log(np.abs(d)))
    if cplx:
        phase = complex(np.prod(d / np.abs(d))) * (-1) ** swaps
        return ComplexLogDet(phase, logmag)
    sign = int(np.prod(np.sign(d))) * (-1) ** swaps
    return SignedLogDet(int(sign), logmag)
