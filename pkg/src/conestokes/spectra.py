"""Container for real eigenvalues found by a pencil scan."""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from typing import Any


@dataclass(frozen=True)
class SpectralEntry:
    value: float
    m: int
    multiplicity: str = "simple"  # or "suspected_multiple"
    residual: float = 0.0


@dataclass(frozen=True)
class PencilSpectrum:
    """Eigenvalues of one pencil in a real window, grouped by azimuthal mode."""

    kind: str
    theta0: float
    window: tuple[float, float]
    m_max: int
    tol: float
    entries: tuple[SpectralEntry, ...]
    rejected: tuple[SpectralEntry, ...] = ()
    partial: bool = False
    metadata: dict = field(default_factory=dict)

    def values(self, merge_tol: float = 1e-7) -> list[float]:
        """Distinct eigenvalues, ascending; entries closer than ``merge_tol`` are merged."""
        out: list[float] = []
        for v in sorted(e.value for e in self.entries):
            if not out or v - out[-1] > merge_tol:
                out.append(v)
        return out

    def contains(self, x: float, tol: float = 1e-6) -> bool:
        return any(abs(e.value - x) <= tol for e in self.entries)

    def modes_of(self, x: float, tol: float = 1e-6) -> list[int]:
        return sorted({e.m for e in self.entries if abs(e.value - x) <= tol})

    def in_interval(self, lo: float, hi: float, tol: float = 0.0) -> list[float]:
        return [v for v in self.values() if lo - tol <= v <= hi + tol]

    def to_dict(self) -> dict[str, Any]:
        return {
            "kind": self.kind,
            "theta0": self.theta0,
            "window": list(self.window),
            "m_max": self.m_max,
            "tol": self.tol,
            "partial": self.partial,
            "entries": [
                {"value": e.value, "m": e.m, "multiplicity": e.multiplicity, "residual": e.residual}
                for e in self.entries
            ],
            "rejected": [{"value": e.value, "m": e.m, "residual": e.residual} for e in self.rejected],
            "metadata": self.metadata,
        }

    def digest(self) -> str:
        payload = json.dumps(
            {"kind": self.kind, "theta0": self.theta0, "tol": self.tol, "values": [round(v, 10) for v in self.values()]},
            sort_keys=True,
        )
        return hashlib.sha256(payload.encode()).hexdigest()[:16]


def symmetric_partner(value: float) -> float:
    """Both pencils are symmetric under lambda -> -1 - lambda."""
    return -1.0 - value


def finite_or_none(x: float):
    return x if math.isfinite(x) else None
