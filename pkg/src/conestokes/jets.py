"""Second-order forward-mode differentiation on numpy arrays.

A :class:`Jet` carries a value together with its gradient and Hessian with
respect to the three Cartesian coordinates. Jets of lower order simply drop
the missing parts; binary operations truncate to the smaller order.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np

__all__ = [
    "Jet",
    "coordinates",
    "as_jet",
    "vdot",
    "vscale",
    "vadd",
    "vsub",
    "divergence",
    "vector_laplacian",
    "gradient",
]


class Jet:
    __slots__ = ("val", "grad", "hess")
    __array_ufunc__ = None  # make ndarray * Jet dispatch to Jet.__rmul__

    def __init__(self, val, grad=None, hess=None):
        self.val = np.asarray(val)
        self.grad = grad
        self.hess = hess if grad is not None else None

    @property
    def order(self) -> int:
        if self.grad is None:
            return 0
        return 1 if self.hess is None else 2

    # -- construction helpers -------------------------------------------------
    @staticmethod
    def const(value, like: "Jet") -> "Jet":
        v = np.array(np.broadcast_to(np.asarray(value), like.val.shape), dtype=np.result_type(value, float))
        g = np.zeros((3,) + v.shape, dtype=v.dtype) if like.order >= 1 else None
        h = np.zeros((3, 3) + v.shape, dtype=v.dtype) if like.order >= 2 else None
        return Jet(v, g, h)

    def truncate(self, order: int) -> "Jet":
        if order >= self.order:
            return self
        if order == 0:
            return Jet(self.val)
        return Jet(self.val, self.grad)

    # -- arithmetic -------------------------------------------------------------
    def __neg__(self):
        return Jet(-self.val, None if self.grad is None else -self.grad, None if self.hess is None else -self.hess)

    def __add__(self, other):
        if isinstance(other, Jet):
            k = min(self.order, other.order)
            g = self.grad + other.grad if k >= 1 else None
            h = self.hess + other.hess if k >= 2 else None
            return Jet(self.val + other.val, g, h)
        return Jet(self.val + other, self.grad, self.hess)

    __radd__ = __add__

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, Jet):
            k = min(self.order, other.order)
            a, b = self.val, other.val
            g = h = None
            if k >= 1:
                g = a * other.grad + b * self.grad
            if k >= 2:
                ga, gb = self.grad, other.grad
                outer = ga[:, None] * gb[None, :]
                h = a * other.hess + b * self.hess + outer + np.swapaxes(outer, 0, 1)
            return Jet(a * b, g, h)
        o = np.asarray(other)
        return Jet(
            self.val * o,
            None if self.grad is None else self.grad * o,
            None if self.hess is None else self.hess * o,
        )

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Jet):
            return self * other.reciprocal()
        return self * (1.0 / np.asarray(other))

    def __rtruediv__(self, other):
        return self.reciprocal() * other

    def __pow__(self, p):
        if isinstance(p, Jet):
            raise TypeError("jet exponents are not supported")
        v = self.val
        if p == 2:
            return self * self
        return self.compose(v**p, p * v ** (p - 1), p * (p - 1) * v ** (p - 2) if self.order >= 2 else None)

    def reciprocal(self):
        v = self.val
        return self.compose(1.0 / v, -1.0 / v**2, 2.0 / v**3 if self.order >= 2 else None)

    # -- composition with univariate functions ----------------------------------
    def compose(self, f0, f1=None, f2=None) -> "Jet":
        """Chain rule for g(self) given g, g', g'' evaluated at ``self.val``."""
        f0 = np.asarray(f0)
        if self.order == 0:
            return Jet(f0)
        g = f1 * self.grad
        h = None
        if self.order >= 2:
            h = f1 * self.hess + f2 * (self.grad[:, None] * self.grad[None, :])
        return Jet(f0, g, h)

    def sqrt(self):
        r = np.sqrt(self.val)
        return self.compose(r, 0.5 / r, -0.25 / r**3 if self.order >= 2 else None)

    def exp(self):
        e = np.exp(self.val)
        return self.compose(e, e, e)

    def log(self):
        v = self.val
        return self.compose(np.log(v), 1.0 / v, -1.0 / v**2)

    def sin(self):
        return self.compose(np.sin(self.val), np.cos(self.val), -np.sin(self.val))

    def cos(self):
        return self.compose(np.cos(self.val), -np.sin(self.val), -np.cos(self.val))

    def arccos(self):
        t = self.val
        w = 1.0 - t * t
        return self.compose(np.arccos(t), -1.0 / np.sqrt(w), -t / w**1.5)

    @property
    def real(self):
        return Jet(
            np.real(self.val),
            None if self.grad is None else np.real(self.grad),
            None if self.hess is None else np.real(self.hess),
        )

    def conj(self):
        return Jet(
            np.conj(self.val),
            None if self.grad is None else np.conj(self.grad),
            None if self.hess is None else np.conj(self.hess),
        )

    # -- differentiation ------------------------------------------------------
    def partial(self, i: int) -> "Jet":
        if self.order == 0:
            raise ValueError("jet carries no derivative")
        return Jet(self.grad[i], None if self.hess is None else self.hess[i])

    def laplacian(self) -> "Jet":
        if self.order < 2:
            raise ValueError("Laplacian needs a second-order jet")
        return Jet(self.hess[0, 0] + self.hess[1, 1] + self.hess[2, 2])

    def __repr__(self) -> str:
        return f"Jet(order={self.order}, shape={self.val.shape})"


def as_jet(value, like: Jet) -> Jet:
    return value if isinstance(value, Jet) else Jet.const(value, like)


def coordinates(points, order: int = 2) -> tuple[Jet, Jet, Jet]:
    """Seed jets for the Cartesian coordinates of ``points`` (shape (3, ...))."""
    P = np.asarray(points, dtype=float)
    if P.shape[0] != 3:
        raise ValueError("points must have leading dimension 3")
    shape = P.shape[1:]
    out = []
    for i in range(3):
        g = h = None
        if order >= 1:
            g = np.zeros((3,) + shape)
            g[i] = 1.0
        if order >= 2:
            h = np.zeros((3, 3) + shape)
        out.append(Jet(P[i].copy(), g, h))
    return tuple(out)


def vdot(a: Sequence[Jet], b: Sequence[Jet]) -> Jet:
    return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]


def vscale(c, a: Sequence[Jet]) -> tuple:
    return tuple(c * ai for ai in a)


def vadd(a, b) -> tuple:
    return tuple(x + y for x, y in zip(a, b))


def vsub(a, b) -> tuple:
    return tuple(x - y for x, y in zip(a, b))


def gradient(f: Jet) -> tuple:
    return tuple(f.partial(i) for i in range(3))


def divergence(u: Sequence[Jet]) -> Jet:
    return u[0].partial(0) + u[1].partial(1) + u[2].partial(2)


def vector_laplacian(u: Sequence[Jet]) -> tuple:
    return tuple(c.laplacian() for c in u)
