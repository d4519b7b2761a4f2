"""Separable space-time fields, anisotropic weighted norms and the Laplace-side identity.

A temporal factor is a finite sum a(t) = sum_j c_j t^k_j exp(-z_j t) with
Re z_j > 0. The family is closed under differentiation and its Laplace
transform and all L2 integrals are available in closed form.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.integrate import quad

from .cone import CircularCone
from .fields import FieldEvaluator
from .norms import QuadratureSpec, v_norm
from .solvability import PencilData, regularity_shift_ok, time_domain_wellposed

__all__ = [
    "TemporalFactor",
    "SeparableTimeField",
    "CompatibilityError",
    "WNormReport",
    "ParsevalRow",
    "ParsevalReport",
    "w_norm",
    "parseval_check",
    "evolution_verdict",
    "PROFILES",
]


class CompatibilityError(ValueError):
    """Temporal factor does not vanish at t = 0 to the required order."""


@dataclass(frozen=True)
class TemporalFactor:
    """sum_j coeffs[j] * t**powers[j] * exp(-rates[j] * t)."""

    coeffs: tuple
    powers: tuple
    rates: tuple
    name: str = "a"

    def __post_init__(self):
        if not (len(self.coeffs) == len(self.powers) == len(self.rates)):
            raise ValueError("coefficient, power and rate lists must match")
        for k, z in zip(self.powers, self.rates):
            if int(k) != k or k < 0:
                raise ValueError("powers must be nonnegative integers")
            if not complex(z).real > 0:
                raise ValueError("rates need positive real part (square integrability)")

    # -- constructors -------------------------------------------------------
    @staticmethod
    def exp(a: float = 1.0) -> "TemporalFactor":
        return TemporalFactor((1.0,), (0,), (a,), f"exp(-{a:g}t)")

    @staticmethod
    def texp(a: float = 1.0) -> "TemporalFactor":
        return TemporalFactor((1.0,), (1,), (a,), f"t exp(-{a:g}t)")

    @staticmethod
    def damped_cos(a: float, w: float) -> "TemporalFactor":
        return TemporalFactor((0.5, 0.5), (0, 0), (complex(a, -w), complex(a, w)), f"exp(-{a:g}t)cos({w:g}t)")

    @staticmethod
    def damped_sin(a: float, w: float) -> "TemporalFactor":
        return TemporalFactor((-0.5j, 0.5j), (0, 0), (complex(a, -w), complex(a, w)), f"exp(-{a:g}t)sin({w:g}t)")

    # -- evaluation -------------------------------------------------------
    def terms(self):
        return zip(self.coeffs, self.powers, self.rates)

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        return sum(c * t**k * np.exp(-z * t) for c, k, z in self.terms())

    def at_zero(self) -> complex:
        return sum(c for c, k, _ in self.terms() if k == 0)

    def derivative(self) -> "TemporalFactor":
        cs, ks, zs = [], [], []
        for c, k, z in self.terms():
            if k > 0:
                cs.append(c * k)
                ks.append(k - 1)
                zs.append(z)
            cs.append(-c * z)
            ks.append(k)
            zs.append(z)
        return TemporalFactor(tuple(cs), tuple(ks), tuple(zs), f"d/dt {self.name}")

    def damped(self, gamma: float) -> "TemporalFactor":
        """exp(-gamma t) a(t)."""
        return TemporalFactor(self.coeffs, self.powers, tuple(z + gamma for z in self.rates), f"e^-{gamma:g}t {self.name}")

    def laplace(self, s):
        s = np.asarray(s, dtype=complex)
        return sum(c * math.factorial(k) / (s + z) ** (k + 1) for c, k, z in self.terms())

    def l2_squared(self) -> float:
        """int_0^inf |a(t)|^2 dt in closed form."""
        tot = 0.0
        for ci, ki, zi in self.terms():
            for cj, kj, zj in self.terms():
                n = ki + kj
                tot += ci * np.conj(cj) * math.factorial(n) / (zi + np.conj(zj)) ** (n + 1)
        return float(np.real(tot))

    def is_real(self, samples: int = 64) -> bool:
        t = np.linspace(0.0, 10.0, samples)
        v = np.asarray(self(t))
        return bool(np.max(np.abs(np.imag(v))) <= 1e-14 * max(1.0, float(np.max(np.abs(v)))))

    def numeric_laplace(self, s: complex) -> complex:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            re = quad(lambda t: np.real(self(t) * np.exp(-s * t)), 0, np.inf, epsabs=0, epsrel=1e-13, limit=400)[0]
            im = quad(lambda t: np.imag(self(t) * np.exp(-s * t)), 0, np.inf, epsabs=0, epsrel=1e-13, limit=400)[0]
        return complex(re, im)


PROFILES = {"exp": TemporalFactor.exp, "texp": TemporalFactor.texp}


@dataclass(frozen=True)
class SeparableTimeField:
    spatial: FieldEvaluator
    temporal: TemporalFactor
    name: str = "u"


# ----------------------------------------------------------------------------
# norms
# ----------------------------------------------------------------------------


@dataclass(frozen=True)
class WNormReport:
    value: float
    beta: float
    l: int
    temporal_integrals: tuple
    spatial_squared: tuple

    @property
    def squared(self) -> float:
        return self.value**2


def _spatial_squares(field_: SeparableTimeField, cone, beta, l, window, spec):
    return tuple(v_norm(field_.spatial, cone, beta, 2 * l - 2 * k, window, spec).value ** 2 for k in range(l + 1))


def w_norm(
    field_: SeparableTimeField,
    cone: CircularCone,
    beta: float,
    l: int,
    window=(0, 1),
    spec: QuadratureSpec = QuadratureSpec(),
) -> WNormReport:
    """(sum_k ||a^(k)||^2_{L2} ||phi||^2_{V^{2l-2k}_beta})^(1/2) for u = phi(x) a(t)."""
    if l not in (0, 1):
        raise ValueError("l must be 0 or 1")
    temporal, a = [], field_.temporal
    for _ in range(l + 1):
        temporal.append(a.l2_squared())
        a = a.derivative()
    spatial = _spatial_squares(field_, cone, beta, l, window, spec)
    tot = math.fsum(t * s for t, s in zip(temporal, spatial))
    return WNormReport(math.sqrt(max(tot, 0.0)), beta, l, tuple(temporal), spatial)


@dataclass(frozen=True)
class ParsevalRow:
    gamma: float
    frequency_side: float
    temporal_side: float
    defect: float
    damped_temporal: float
    damped_defect: float
    truncation_error: float
    tau_max: float

    def csv(self) -> list:
        return [self.gamma, self.frequency_side, self.temporal_side, self.defect, self.damped_temporal,
                self.damped_defect, self.truncation_error, self.tau_max]


@dataclass(frozen=True)
class ParsevalReport:
    rows: tuple
    beta: float
    l: int
    monotone: bool
    even_asymmetry: float
    metadata: dict = field(default_factory=dict)


def _frequency_integral(integrand, rel_tol: float, max_octaves: int, even: bool):
    """(1/2pi) int_R integrand(tau) dtau by octaves [2^j, 2^(j+1)] until the last one is negligible."""
    opts = dict(epsabs=0.0, epsrel=1e-13, limit=400)
    sides = (1.0,) if even else (1.0, -1.0)
    mult = 2.0 if even else 1.0

    def piece(a, b):
        return mult * math.fsum(quad(lambda t: integrand(sg * t), a, b, **opts)[0] for sg in sides)

    total = piece(0.0, 1.0)
    last = total
    hi = 1.0
    for _ in range(max_octaves):
        last = piece(hi, 2.0 * hi)
        total += last
        hi *= 2.0
        if abs(last) <= rel_tol * abs(total):
            break
    return total / (2 * math.pi), abs(last) / (2 * math.pi), hi


def parseval_check(
    field_: SeparableTimeField,
    cone: CircularCone,
    beta: float,
    l: int,
    gamma_grid: Sequence[float] = (1e-1, 1e-2, 1e-3),
    window=(0, 1),
    spec: QuadratureSpec = QuadratureSpec(),
    tau_rel_tol: float = 1e-9,
    max_octaves: int = 80,
) -> ParsevalReport:
    """Frequency side (1/2pi) int sum_k |s|^2k |a~(s)|^2 ||phi||^2_{V^{2l-2k}} dtau on Re s = gamma.

    ``defect`` compares it with the undamped temporal norm (the gamma -> 0
    limit); ``damped_defect`` compares it with the exact damped norm
    int exp(-2 gamma t) (...) dt, which it must equal for every gamma.
    """
    if l not in (0, 1):
        raise ValueError("l must be 0 or 1")
    a = field_.temporal
    if l == 1 and abs(a.at_zero()) > 1e-14:
        raise CompatibilityError("temporal factor must vanish at t = 0 (zero initial condition u(x, 0) = 0)")
    if any(not g > 0 for g in gamma_grid):
        raise ValueError("gamma values must be positive")
    spatial = _spatial_squares(field_, cone, beta, l, window, spec)
    derivs = [a]
    for _ in range(l):
        derivs.append(derivs[-1].derivative())
    temporal_side = math.fsum(d.l2_squared() * s for d, s in zip(derivs, spatial))
    even = a.is_real()
    asym = 0.0
    rows = []
    for g in gamma_grid:

        def integrand(tau, g=g):
            s = complex(g, tau)
            A = abs(complex(a.laplace(s))) ** 2
            return sum(abs(s) ** (2 * k) * A * spatial[k] for k in range(l + 1))

        if even:
            for tau in (0.3, 1.7, 11.0):
                v1, v2 = integrand(tau), integrand(-tau)
                asym = max(asym, abs(v1 - v2) / max(abs(v1), 1e-300))
        freq, trunc, tmax = _frequency_integral(integrand, tau_rel_tol, max_octaves, even)
        damped = math.fsum(d.damped(g).l2_squared() * s for d, s in zip(derivs, spatial))
        scale = temporal_side if temporal_side > 0 else 0.0
        defect = abs(freq - temporal_side) / scale if scale else abs(freq - temporal_side)
        dd = abs(freq - damped) / damped if damped > 0 else abs(freq - damped)
        rows.append(ParsevalRow(g, freq, temporal_side, defect, damped, dd, trunc, tmax))
    order = sorted(rows, key=lambda r: -r.gamma)
    mono = all(b.defect < a_.defect for a_, b in zip(order[:-1], order[1:])) or temporal_side == 0.0
    return ParsevalReport(tuple(rows), beta, l, mono, asym, {"profile": a.name})


# ----------------------------------------------------------------------------
# evolution problem
# ----------------------------------------------------------------------------


def _mean(field_: FieldEvaluator, cone, window, spec) -> tuple[float, float]:
    """(int_K phi dx, int_K |phi| dx) over the window."""
    from .norms import _dyad_grid, _dyads

    tot, ab = [], []
    c = spec.radial_scale
    for nu in _dyads(window):
        pts, W, _ = _dyad_grid(cone, c * 2.0**nu, c * 2.0 ** (nu + 1), spec)
        v = field_.eval(pts)[0]
        tot.append(float(np.real(np.sum(W * v))))
        ab.append(float(np.sum(W * np.abs(v))))
    return math.fsum(tot), math.fsum(ab)


def evolution_verdict(
    beta: float,
    pencil: PencilData,
    f: Optional[SeparableTimeField],
    g: Optional[SeparableTimeField],
    cone: CircularCone,
    window=(0, 1),
    spec: QuadratureSpec = QuadratureSpec(),
    gamma: Optional[float] = None,
    mean_tol: float = 1e-8,
) -> dict:
    """Well-posedness of the evolution problem for separable data, with the data norms it needs."""
    base = time_domain_wellposed(beta, pencil)
    norms = {}
    if f is not None:
        norms["f_L2_V0"] = math.sqrt(f.temporal.l2_squared()) * v_norm(f.spatial, cone, beta, 0, window, spec).value
    if g is not None:
        norms["g_L2_V1"] = math.sqrt(g.temporal.l2_squared()) * v_norm(g.spatial, cone, beta, 1, window, spec).value
        norms["dtg_L2_dual_upper"] = (
            math.sqrt(g.temporal.derivative().l2_squared()) * v_norm(g.spatial, cone, beta + 1, 0, window, spec).value
        )
    finite = all(math.isfinite(v) for v in norms.values())
    ok, reason = base.wellposed, base.justification
    if ok and base.compatibility and g is not None:
        m, m_abs = _mean(g.spatial, cone, window, spec)
        if abs(m) > mean_tol * max(m_abs, 1e-300):
            ok, reason = False, f"rejected: {base.compatibility} is required for beta > 1/2 (mean {m:.3e})"
    out = {
        "beta": beta,
        "wellposed": bool(ok and finite),
        "classification": base.classification,
        "data_spaces": base.data_spaces,
        "compatibility": base.compatibility,
        "justification": reason,
        "data_norms": norms,
        "data_norms_finite": finite,
        "pencil_digest": pencil.digest(),
    }
    if gamma is not None:
        shift = regularity_shift_ok(beta, gamma, pencil, mean_zero=base.compatibility is not None)
        target = time_domain_wellposed(gamma, pencil)
        out["upgrade"] = {
            "gamma": gamma,
            "allowed": bool(shift.allowed and target.wellposed),
            "justification": shift.justification if target.wellposed else "target weight not covered",
        }
    return out
