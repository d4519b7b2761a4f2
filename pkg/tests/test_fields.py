import math

import numpy as np
import pytest

from conestokes.fields import FDField, JetField, builtin_field, dilated, multi_indices
from conestokes.jets import Jet, coordinates, divergence, vector_laplacian


def _pts(n=30, seed=0):
    rng = np.random.default_rng(seed)
    return rng.uniform(-1.5, 1.5, (3, n)) + np.array([[0.0], [0.0], [2.0]])


def _fd_grad(f, P, h=1e-6):
    return np.stack([(f(P + h * e[:, None]) - f(P - h * e[:, None])) / (2 * h) for e in np.eye(3)])


class TestJets:
    def test_product_rule(self):
        X, Y, Z = coordinates(_pts(), 2)
        J = (X * Y * Z).exp()
        f = lambda P: np.exp(P[0] * P[1] * P[2])  # noqa: E731
        assert np.allclose(J.grad, _fd_grad(f, _pts()), rtol=1e-7)

    def test_hessian_matches_fd(self):
        P = _pts()

        def jet(Q):
            X, Y, Z = coordinates(Q, 2)
            return X.sin() * (X * X + Y * Y + Z * Z).sqrt()

        J, h = jet(P), 1e-5
        for i in range(3):
            e = np.eye(3)[i][:, None]
            fd = (jet(P + h * e).grad - jet(P - h * e).grad) / (2 * h)
            assert np.allclose(J.hess[i], fd, rtol=1e-8, atol=1e-8)

    def test_divergence_and_laplacian(self):
        X, Y, Z = coordinates(_pts(), 2)
        u = (X * X, X * Y, Z)
        assert np.allclose(divergence(u).val, 2 * X.val + X.val + 1)
        lap = vector_laplacian(u)
        assert np.allclose(lap[0].val, 2) and np.allclose(lap[1].val, 0)

    def test_order_truncates(self):
        X, Y, Z = coordinates(_pts(), 1)
        assert (X * Y).order == 1 and (X * Y).hess is None

    def test_const_like(self):
        X, _, _ = coordinates(_pts(), 2)
        c = Jet.const(3.0, X)
        assert np.all(c.val == 3.0) and not c.grad.any() and not c.hess.any()


class TestFields:
    def test_multi_indices(self):
        assert len(multi_indices(2)) == 6 and multi_indices(0) == [()]
        with pytest.raises(ValueError):
            multi_indices(3)

    @pytest.mark.parametrize("name", ["one", "gauss", "gauss-vec", "bump", "x3"])
    def test_mixed_partials_symmetric(self, name):
        assert builtin_field(name).mixed_partial_asymmetry(_pts()) < 1e-8

    def test_unknown_builtin(self):
        with pytest.raises(ValueError):
            builtin_field("nope")

    def test_derivative_multi_index(self):
        P = _pts()
        g = builtin_field("gauss")
        fd = _fd_grad(lambda Q: g.eval(Q)[0], P)
        assert np.allclose(g.derivative(P, (1,))[0], fd[1], atol=1e-9)
        with pytest.raises(ValueError):
            g.derivative(P, (0, 1, 2))

    def test_fd_fallback_matches_analytic(self):
        g = builtin_field("gauss")
        fd = FDField(lambda P: g.eval(P)[0], name="gauss-fd")
        P = _pts(seed=4)
        a, b = g.jets(P, 2)[0], fd.jets(P, 2)[0]
        assert np.allclose(a.grad, b.grad, atol=1e-8)
        assert np.allclose(a.hess, b.hess, atol=1e-5)
        assert fd.certificate == "finite-difference-fallback"

    def test_needs_limits_available_order(self):
        f = JetField(lambda X, Y, Z: divergence((X * X, Y, Z)), needs=1, name="div")
        f.jets(_pts(), 1)
        with pytest.raises(ValueError):
            f.jets(_pts(), 2)

    def test_wrong_arity(self):
        f = JetField(lambda X, Y, Z: (X, Y), arity=3)
        with pytest.raises(ValueError):
            f.jets(_pts(), 0)

    def test_bad_certificate(self):
        with pytest.raises(ValueError):
            JetField(lambda X, Y, Z: X, certificate="trust-me")

    def test_dilation(self):
        g = builtin_field("gauss")
        a = 2.5
        d = dilated(g, a, amplitude=3.0)
        P = _pts()
        J, J0 = d.jets(P, 2)[0], g.jets(a * P, 2)[0]
        assert np.allclose(J.val, 3 * J0.val)
        assert np.allclose(J.hess, 3 * a * a * J0.hess)
        with pytest.raises(ValueError):
            dilated(g, -1.0)

    def test_bump_compact(self):
        b = builtin_field("bump")
        P = np.array([[0.0, 0.0, 0.0], [0.0, 0.0, 0.0], [0.9, 2.1, 1.5]])
        v = b.eval(P)[0]
        assert v[0] == 0.0 and v[1] == 0.0 and v[2] > 0

    def test_finite_away_from_vertex(self):
        for name in ("one", "gauss", "bump", "x3"):
            for part in builtin_field(name).squared_derivatives(_pts(200, 9), 2):
                assert np.all(np.isfinite(part))


def test_jet_sqrt_of_radius():
    P = _pts()
    X, Y, Z = coordinates(P, 2)
    r = (X * X + Y * Y + Z * Z).sqrt()
    lap = sum(r.hess[i, i] for i in range(3))
    assert np.allclose(lap, 2 / r.val)
    assert np.allclose(np.linalg.norm(r.grad, axis=0), 1.0)
    assert math.isclose(float(r.val[0]), float(np.linalg.norm(P[:, 0])))
