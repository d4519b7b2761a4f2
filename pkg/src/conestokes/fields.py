"""Sampled scalar and vector fields with derivatives up to second order."""

from __future__ import annotations

import math
from typing import Callable, Optional, Sequence

import numpy as np

from .jets import Jet, coordinates

__all__ = [
    "FieldEvaluator",
    "JetField",
    "FDField",
    "dilated",
    "multi_indices",
    "smooth_bump",
    "BUILTIN_FIELDS",
    "builtin_field",
]

CERTIFICATES = ("analytic-closed-form", "ODE-profile", "finite-difference-fallback")


def multi_indices(order: int) -> list[tuple[int, ...]]:
    """Multi-indices of the given order, each counted once (i <= j for order 2)."""
    if order == 0:
        return [()]
    if order == 1:
        return [(0,), (1,), (2,)]
    if order == 2:
        return [(i, j) for i in range(3) for j in range(i, 3)]
    raise ValueError("order must be 0, 1 or 2")


class FieldEvaluator:
    """Base class. Subclasses implement :meth:`jets`."""

    arity: int = 1
    certificate: str = "analytic-closed-form"
    name: str = "field"

    def jets(self, points, order: int = 2) -> tuple[Jet, ...]:
        raise NotImplementedError

    def eval(self, points) -> np.ndarray:
        """Values with shape (arity, ...)."""
        return np.stack([j.val for j in self.jets(points, 0)])

    def derivative(self, points, alpha: Sequence[int]) -> np.ndarray:
        """Partial derivative for a multi-index given as a tuple of axes, e.g. (0, 2)."""
        alpha = tuple(alpha)
        if len(alpha) > 2:
            raise ValueError("derivatives above second order are unavailable")
        J = self.jets(points, len(alpha))
        if not alpha:
            return np.stack([j.val for j in J])
        if len(alpha) == 1:
            return np.stack([j.grad[alpha[0]] for j in J])
        return np.stack([j.hess[alpha[0], alpha[1]] for j in J])

    def squared_derivatives(self, points, order: int) -> list[np.ndarray]:
        """sum_{|alpha| = k} |d^alpha u|^2 for k = 0..order."""
        J = self.jets(points, order)
        out = [sum(np.abs(j.val) ** 2 for j in J)]
        if order >= 1:
            out.append(sum(np.sum(np.abs(j.grad) ** 2, axis=0) for j in J))
        if order >= 2:
            tot = 0.0
            for j in J:
                for a, b in multi_indices(2):
                    tot = tot + np.abs(j.hess[a, b]) ** 2
            out.append(tot)
        return out

    def mixed_partial_asymmetry(self, points) -> float:
        worst = 0.0
        for j in self.jets(points, 2):
            h = j.hess
            scale = max(float(np.max(np.abs(h))), 1e-300)
            worst = max(worst, float(np.max(np.abs(h - np.swapaxes(h, 0, 1)))) / scale)
        return worst


class JetField(FieldEvaluator):
    """Field given by a function of the coordinate jets (X, Y, Z).

    ``needs`` is the number of derivative orders the function itself
    consumes (1 for a divergence, 2 for a Laplacian); such fields expose
    correspondingly fewer derivatives.
    """

    def __init__(
        self,
        fn: Callable,
        arity: int = 1,
        certificate: str = "analytic-closed-form",
        name: str = "jet",
        needs: int = 0,
    ):
        if arity not in (1, 3):
            raise ValueError("arity must be 1 or 3")
        if certificate not in CERTIFICATES:
            raise ValueError(f"unknown certificate {certificate!r}")
        self.fn, self.arity, self.certificate, self.name, self.needs = fn, arity, certificate, name, needs

    def jets(self, points, order: int = 2):
        if order + self.needs > 2:
            raise ValueError(f"derivative of order {order} unavailable for {self.name}")
        out = self.fn(*coordinates(points, order + self.needs))
        out = (out,) if isinstance(out, Jet) else tuple(out)
        if len(out) != self.arity:
            raise ValueError("field returned the wrong number of components")
        return tuple(o.truncate(order) for o in out)


class FDField(FieldEvaluator):
    """Field known only by values; derivatives by Richardson-extrapolated central differences."""

    certificate = "finite-difference-fallback"

    def __init__(self, fn: Callable, arity: int = 1, name: str = "fd", rel_step: float = 1e-4):
        self.fn, self.arity, self.name, self.rel_step = fn, arity, name, rel_step

    def _values(self, P):
        v = np.asarray(self.fn(P))
        return v[None] if self.arity == 1 and v.shape == P.shape[1:] else v

    def _central(self, P, h, order):
        f0 = self._values(P)
        g = h_ = None
        E = np.eye(3)
        sh = (3,) + (1,) * (P.ndim - 1)
        if order >= 1:
            g = np.stack(
                [(self._values(P + h * E[i].reshape(sh)) - self._values(P - h * E[i].reshape(sh))) / (2 * h) for i in range(3)],
                axis=1,
            )
        if order >= 2:
            h_ = np.empty((f0.shape[0], 3, 3) + f0.shape[1:], dtype=f0.dtype)
            for i in range(3):
                ei = E[i].reshape(sh)
                h_[:, i, i] = (self._values(P + h * ei) - 2 * f0 + self._values(P - h * ei)) / h**2
                for j in range(i + 1, 3):
                    ej = E[j].reshape(sh)
                    d = (
                        self._values(P + h * (ei + ej))
                        - self._values(P + h * (ei - ej))
                        - self._values(P - h * (ei - ej))
                        + self._values(P - h * (ei + ej))
                    ) / (4 * h * h)
                    h_[:, i, j] = h_[:, j, i] = d
        return f0, g, h_

    def jets(self, points, order: int = 2):
        P = np.asarray(points, dtype=float)
        h = self.rel_step * np.linalg.norm(P, axis=0)
        f0, g1, h1 = self._central(P, h, order)
        if order >= 1:
            _, g2, h2 = self._central(P, h / 2, order)
            g = (4 * g2 - g1) / 3
            H = (4 * h2 - h1) / 3 if order >= 2 else None
        return tuple(
            Jet(f0[c], None if order < 1 else g[c], None if order < 2 else H[c]) for c in range(f0.shape[0])
        )


class _Dilated(FieldEvaluator):
    def __init__(self, base: FieldEvaluator, a: float, amplitude: float):
        self.base, self.a, self.amplitude = base, float(a), amplitude
        self.arity, self.certificate = base.arity, base.certificate
        self.name = f"{base.name}(x*{a:g})"

    def jets(self, points, order: int = 2):
        a = self.a
        out = []
        for j in self.base.jets(self.a * np.asarray(points, dtype=float), order):
            out.append(
                Jet(
                    self.amplitude * j.val,
                    None if j.grad is None else self.amplitude * a * j.grad,
                    None if j.hess is None else self.amplitude * a * a * j.hess,
                )
            )
        return tuple(out)


def dilated(field: FieldEvaluator, a: float, amplitude: float = 1.0) -> FieldEvaluator:
    """x -> amplitude * field(a x)."""
    if not a > 0:
        raise ValueError("dilation factor must be positive")
    return _Dilated(field, a, amplitude)


def smooth_bump(t: Jet) -> Jet:
    """exp(-1/(1 - t^2)) on |t| < 1, zero elsewhere; C-infinity."""
    v = t.val
    inside = np.abs(v) < 1.0
    q = np.where(inside, 1.0 - v * v, 1.0)
    b = np.where(inside, np.exp(-1.0 / q), 0.0)
    g1 = -2.0 * v / q**2
    g2 = -2.0 / q**2 - 8.0 * v * v / q**3
    return t.compose(b, b * g1, b * (g2 + g1 * g1))


# ----------------------------------------------------------------------------
# builtin test fields
# ----------------------------------------------------------------------------

_CENTER = (0.3, 0.1, 0.8)


def _gauss(X, Y, Z):
    d2 = (X - _CENTER[0]) ** 2 + (Y - _CENTER[1]) ** 2 + (Z - _CENTER[2]) ** 2
    return (-d2).exp()


def _radial_bump(X, Y, Z):
    r = (X * X + Y * Y + Z * Z).sqrt()
    return smooth_bump((r - 1.5) / 0.5) * (1.0 + 0.3 * X * Z / (r * r))


def _one(X, Y, Z):
    return Jet.const(1.0, X)


BUILTIN_FIELDS = {
    "one": lambda: JetField(_one, 1, name="one"),
    "gauss": lambda: JetField(_gauss, 1, name="gauss"),
    "gauss-vec": lambda: JetField(lambda X, Y, Z: (Z * _gauss(X, Y, Z), X * _gauss(X, Y, Z), _gauss(X, Y, Z)), 3, name="gauss-vec"),
    "bump": lambda: JetField(_radial_bump, 1, name="bump"),
    "x3": lambda: JetField(lambda X, Y, Z: (Z, Jet.const(0.0, X), Jet.const(0.0, X)), 3, name="x3"),
}


def builtin_field(name: str) -> FieldEvaluator:
    try:
        return BUILTIN_FIELDS[name]()
    except KeyError:
        raise ValueError(f"unknown field {name!r}; choose from {sorted(BUILTIN_FIELDS)}") from None
