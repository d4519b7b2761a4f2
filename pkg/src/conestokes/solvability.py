"""Weight intervals and operator classification from pencil data.

For the operator A_beta (u, p) -> (s u - Lap u + grad p, -div u) between
weighted spaces, the critical weight lines are beta = 1/2 - lam for Stokes
eigenvalues lam and beta = -mu - 1/2 for Neumann eigenvalues mu. Between
those lines the operator type depends only on lambda1_plus and mu2_plus.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from typing import Optional

from .spectra import PencilSpectrum

__all__ = [
    "PencilData",
    "SolvabilityVerdict",
    "ShiftVerdict",
    "TimeDomainVerdict",
    "CLASSIFICATIONS",
    "LINE_TOL",
    "isomorphism_intervals",
    "classify_operator",
    "matching_rules",
    "regularity_shift_ok",
    "time_domain_wellposed",
    "pencil_data_for_cone",
]

LINE_TOL = 1e-7

CLASSIFICATIONS = (
    "Isomorphism",
    "IsomorphismOntoMeanZero",
    "InjectiveNotSurjective",
    "KernelNontrivial",
    "CokernelDimAtLeast2",
    "NotFredholm",
    "OutsideTheory",
)


@dataclass(frozen=True)
class PencilData:
    """The two pencil constants plus the eigenvalues used to detect critical lines.

    Without explicit spectra the minimal spectra implied by the constants are
    used: {lambda1+, -1-lambda1+, 1, -2} and {0, -1, mu2+, -1-mu2+}.
    """

    lambda1_plus: float
    mu2_plus: float
    neumann_spectrum: Optional[PencilSpectrum] = None
    stokes_spectrum: Optional[PencilSpectrum] = None
    metadata: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        l1, m2 = self.lambda1_plus, self.mu2_plus
        if not (math.isfinite(l1) and 0.0 < l1 <= 1.0 + 1e-9):
            raise ValueError("lambda1_plus must lie in (0, 1]")
        if not (math.isfinite(m2) and m2 > 0.0):
            raise ValueError("mu2_plus must be positive")
        if self.neumann_spectrum is not None:
            sp = self.neumann_spectrum
            if not (sp.contains(0.0) and sp.contains(-1.0)):
                raise ValueError("Neumann spectrum must contain 0 and -1")
        if self.stokes_spectrum is not None:
            sp = self.stokes_spectrum
            if not (sp.contains(1.0) and sp.contains(-2.0)):
                raise ValueError("Stokes spectrum must contain 1 and -2")

    def stokes_values(self) -> list[float]:
        if self.stokes_spectrum is None:
            vals = {self.lambda1_plus, -1.0 - self.lambda1_plus, 1.0, -2.0}
        else:
            # extend the scanned window by the symmetry lam -> -1 - lam
            base = self.stokes_spectrum.values()
            vals = set(base) | {-1.0 - v for v in base}
        return _dedupe(vals)

    def neumann_values(self) -> list[float]:
        if self.neumann_spectrum is None:
            vals = {0.0, -1.0, self.mu2_plus, -1.0 - self.mu2_plus}
        else:
            base = self.neumann_spectrum.values()
            vals = set(base) | {-1.0 - v for v in base}
        return _dedupe(vals)

    def digest(self) -> str:
        payload = json.dumps(
            {
                "lambda1_plus": round(self.lambda1_plus, 10),
                "mu2_plus": round(self.mu2_plus, 10),
                "stokes": [round(v, 10) for v in self.stokes_values()],
                "neumann": [round(v, 10) for v in self.neumann_values()],
                "line_tol": LINE_TOL,
            },
            sort_keys=True,
        )
        return hashlib.sha256(payload.encode()).hexdigest()[:16]

    def to_dict(self) -> dict:
        return {
            "lambda1_plus": self.lambda1_plus,
            "mu2_plus": self.mu2_plus,
            "stokes_eigenvalues": self.stokes_values(),
            "neumann_eigenvalues": self.neumann_values(),
            "digest": self.digest(),
            **({"metadata": self.metadata} if self.metadata else {}),
        }


def _dedupe(vals, tol: float = 1e-9) -> list[float]:
    out: list[float] = []
    for v in sorted(vals):
        if not out or v - out[-1] > tol:
            out.append(v)
    return out


@dataclass(frozen=True)
class SolvabilityVerdict:
    beta: float
    classification: str
    justification: str
    rule: int
    intervals: tuple
    pencil_digest: str

    def to_dict(self) -> dict:
        return {
            "beta": self.beta,
            "classification": self.classification,
            "justification": self.justification,
            "rule": self.rule,
            "intervals": [list(i) for i in self.intervals],
            "pencil_digest": self.pencil_digest,
        }


def isomorphism_intervals(pencil: PencilData):
    """((1/2 - lam1, 1/2), (1/2, min(mu2 + 1/2, lam1 + 3/2))); the second one onto mean-zero data."""
    l1, m2 = pencil.lambda1_plus, pencil.mu2_plus
    return (0.5 - l1, 0.5), (0.5, min(m2 + 0.5, l1 + 1.5))


def _on_line(beta: float, pencil: PencilData, tol: float) -> Optional[str]:
    for lam in pencil.stokes_values():
        if abs(0.5 - beta - lam) <= tol:
            return f"Stokes eigenvalue {lam:.10g} on the line Re lam = 1/2 - beta (log-divergent family)"
    for mu in pencil.neumann_values():
        if abs(-beta - 0.5 - mu) <= tol:
            extra = "; excluded beta = 1/2" if abs(mu + 1.0) <= tol else ""
            return f"Neumann eigenvalue {mu:.10g} equals -beta - 1/2 (boundary-layer family){extra}"
    return None


def matching_rules(beta: float, pencil: PencilData, tol: float = LINE_TOL) -> list[tuple[int, str, str]]:
    """Every rule whose hypothesis holds at ``beta``, as (rule, classification, justification).

    A weight within ``tol`` of a critical line counts as on the line, and
    the open-interval rules are then not consulted.
    """
    l1, m2 = pencil.lambda1_plus, pencil.mu2_plus
    line = _on_line(beta, pencil, tol)
    if line:
        return [(1, "NotFredholm", line)]
    out = []
    if 0.5 - l1 < beta < 0.5:
        out.append((2, "Isomorphism", "isomorphism for 1/2 - lambda1+ < beta < 1/2"))
    if 0.5 < beta < min(m2 + 0.5, l1 + 1.5):
        out.append((3, "IsomorphismOntoMeanZero", "isomorphism onto data with zero mean of g"))
    if -0.5 < beta < 0.5 - l1:
        out.append((4, "InjectiveNotSurjective", "injective (no kernel) with nontrivial adjoint kernel"))
    if l1 < m2 - 1.0:
        if l1 + 1.5 < beta < m2 + 0.5:
            out.append((5, "KernelNontrivial", "kernel built from the lambda1- eigenvector"))
        if -m2 - 0.5 < beta < 0.5 - l1:
            out.append((5, "InjectiveNotSurjective", "adjoint kernel contains a dual-weight kernel element; injective"))
    if l1 > m2 - 1.0 and m2 + 0.5 < beta < l1 + 1.5:
        note = ""
        if any(abs(mu - (m2 - 1.0)) <= tol for mu in pencil.neumann_values()):
            note = " (degenerate: mu2+ - 1 is itself a Neumann eigenvalue; logarithmic branch not covered)"
        out.append((6, "CokernelDimAtLeast2", "adjoint kernel of dimension >= 2" + note))
    if not out:
        out.append((7, "OutsideTheory", "no statement available for this weight"))
    return out


def classify_operator(beta: float, pencil: PencilData, tol: float = LINE_TOL) -> SolvabilityVerdict:
    """First matching rule wins; rule 1 (critical lines) has priority."""
    if not math.isfinite(beta):
        raise ValueError("beta must be finite")
    rule, cls, why = matching_rules(beta, pencil, tol)[0]
    return SolvabilityVerdict(beta, cls, why, rule, isomorphism_intervals(pencil), pencil.digest())


@dataclass(frozen=True)
class ShiftVerdict:
    allowed: bool
    justification: str

    def __iter__(self):
        return iter((self.allowed, self.justification))


def regularity_shift_ok(beta: float, gamma: float, pencil: PencilData, mean_zero: bool = False) -> ShiftVerdict:
    """Can a solution at weight beta be moved to weight gamma?"""
    if beta == gamma:
        raise ValueError("beta and gamma must differ")
    if beta < gamma:
        lo, hi = -gamma - 0.5, -beta - 0.5
        hit = [mu for mu in pencil.neumann_values() if lo - LINE_TOL <= mu <= hi + LINE_TOL]
        if not hit:
            return ShiftVerdict(True, f"case (i): no Neumann eigenvalue in [{lo:.6g}, {hi:.6g}]")
        reason = f"case (i) fails: Neumann eigenvalue {hit[0]:.6g} in [{lo:.6g}, {hi:.6g}]"
    else:
        lo, hi = -beta + 0.5, -gamma + 0.5
        hit = [lam for lam in pencil.stokes_values() if lo - LINE_TOL <= lam <= hi + LINE_TOL]
        if not hit:
            return ShiftVerdict(True, f"case (ii): no Stokes eigenvalue in [{lo:.6g}, {hi:.6g}]")
        reason = f"case (ii) fails: Stokes eigenvalue {hit[0]:.6g} in [{lo:.6g}, {hi:.6g}]"
    if mean_zero and -0.5 < beta < 0.5 < gamma < pencil.mu2_plus + 0.5:
        return ShiftVerdict(True, "mean-zero data: shift across beta = 1/2 up to mu2+ + 1/2")
    return ShiftVerdict(False, reason)


@dataclass(frozen=True)
class TimeDomainVerdict:
    wellposed: bool
    beta: float
    classification: str
    data_spaces: str
    compatibility: Optional[str]
    justification: str

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def time_domain_wellposed(beta: float, pencil: PencilData) -> TimeDomainVerdict:
    """Unique solvability of the evolution problem with zero initial data in W^{2,1}_beta."""
    v = classify_operator(beta, pencil)
    data = "f in L2(R+, V^0_beta), g in L2(R+, V^1_beta), d/dt g in L2(R+, (V^1_{-beta})*)"
    if v.classification == "Isomorphism":
        return TimeDomainVerdict(True, beta, v.classification, data, None, "unique solution; no compatibility condition")
    if v.classification == "IsomorphismOntoMeanZero":
        return TimeDomainVerdict(
            True, beta, v.classification, data, "int_K g(x, t) dx = 0 for almost all t", "unique solution for mean-zero g"
        )
    return TimeDomainVerdict(False, beta, v.classification, data, None, "not covered: " + v.justification)


def pencil_data_for_cone(cone, m_max: int = 6, resolution: int = 64, workers: int = 1) -> PencilData:
    """Compute both spectra for a cone and package them."""
    from .neumann import mu2_plus, neumann_spectrum
    from .stokes import stokes_spectrum

    ns = neumann_spectrum(cone, m_max=m_max, window=(-4.0, 2.0))
    ss = stokes_spectrum(cone, m_max=m_max, window=(-2.0, 1.6), resolution=resolution, workers=workers)
    pos = [v for v in ss.values() if v > 1e-6]
    l1 = min(pos) if pos else 1.0
    l1 = min(l1, 1.0)
    m2 = mu2_plus(cone)
    return PencilData(
        l1,
        m2,
        ns,
        ss,
        metadata={"theta0": cone.theta0, "stokes_coverage": [-2.6, 1.6], "neumann_coverage": [-4.0, 2.0]},
    )
