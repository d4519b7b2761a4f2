import math

import numpy as np
import pytest

from conestokes import CircularCone, JetField, PencilData, SeparableTimeField, TemporalFactor, builtin_field, parseval_check, v_norm, w_norm
from conestokes.transform import CompatibilityError, evolution_verdict

from oracles import exp_parseval_frequency, temporal_l2_symbolic

HALF = CircularCone(math.pi / 2)


def sep(name="one", temporal=None):
    return SeparableTimeField(builtin_field(name), temporal or TemporalFactor.exp())


class TestTemporalFactor:
    def test_laplace_matches_quadrature(self):
        rng = np.random.default_rng(11)
        a = TemporalFactor((1.0, -0.4, 0.7), (0, 1, 2), (1.0, 0.5, complex(0.8, 2.0)))
        for _ in range(10):
            s = complex(rng.uniform(0.05, 2.0), rng.uniform(-6, 6))
            assert abs(a.laplace(s) - a.numeric_laplace(s)) <= 1e-8 * max(1.0, abs(a.laplace(s)))

    @pytest.mark.parametrize(
        "factor,expr",
        [
            (TemporalFactor.exp(), "exp(-t)"),
            (TemporalFactor.texp(), "t*exp(-t)"),
            (TemporalFactor.texp().derivative(), "(1-t)*exp(-t)"),
            (TemporalFactor.damped_cos(0.5, 3.0), "exp(-t/2)*cos(3*t)"),
            (TemporalFactor.damped_sin(1.0, 2.0), "exp(-t)*sin(2*t)"),
        ],
    )
    def test_l2_against_symbolic(self, factor, expr):
        assert factor.l2_squared() == pytest.approx(temporal_l2_symbolic(expr), rel=1e-13)

    def test_damped_trig_real(self):
        a = TemporalFactor.damped_cos(0.5, 3.0)
        assert a.is_real()
        t = np.linspace(0, 5, 11)
        assert np.allclose(np.real(a(t)), np.exp(-0.5 * t) * np.cos(3 * t))

    def test_derivative_by_fd(self):
        a = TemporalFactor((1.0, 2.0), (2, 1), (1.5, 0.7))
        t, h = np.linspace(0.2, 4, 9), 1e-6
        fd = (a(t + h) - a(t - h)) / (2 * h)
        assert np.allclose(a.derivative()(t), fd, atol=1e-8)

    @pytest.mark.parametrize("bad", [dict(powers=(-1,)), dict(powers=(0.5,)), dict(rates=(0.0,)), dict(coeffs=(1.0, 2.0))])
    def test_rejections(self, bad):
        kw = dict(coeffs=(1.0,), powers=(0,), rates=(1.0,)) | bad
        with pytest.raises(ValueError):
            TemporalFactor(**kw)


class TestWNorm:
    def test_order_zero_example(self):
        rep = w_norm(sep(), HALF, 0.0, 0)
        assert rep.squared == pytest.approx(0.5 * 14 * math.pi / 3, rel=1e-13)

    def test_order_one_example(self):
        # k = 0: 1/2 * int r^-4 |1|^2 = pi / 2 ; k = 1: 1/2 * 14 pi / 3
        # r^-2 is not polynomial, so the radial Gauss rule is only accurate to ~1e-11
        rep = w_norm(sep(), HALF, 0.0, 1)
        assert rep.squared == pytest.approx(0.5 * (math.pi + 14 * math.pi / 3), rel=1e-10)

    def test_bad_order(self):
        with pytest.raises(ValueError):
            w_norm(sep(), HALF, 0.0, 2)


class TestParseval:
    @pytest.mark.parametrize("gamma", [1e-1, 1e-2, 1e-3])
    def test_exp_frequency_closed_form(self, gamma):
        rep = parseval_check(sep("gauss"), HALF, 0.0, 0, gamma_grid=(gamma,))
        row = rep.rows[0]
        spatial = v_norm(builtin_field("gauss"), HALF, 0.0, 0).squared
        assert row.frequency_side == pytest.approx(exp_parseval_frequency(gamma) * spatial, rel=1e-9)
        # the defect is a difference of nearly equal numbers: compare absolutely
        assert abs(row.defect - gamma / (1 + gamma)) < 1e-8
        assert row.damped_defect < 1e-8

    def test_defect_monotone(self):
        assert parseval_check(sep("gauss"), HALF, 0.0, 0).monotone

    def test_order_one_damped_identity(self):
        rep = parseval_check(sep("gauss", TemporalFactor.texp()), HALF, 1.0, 1, gamma_grid=(0.1, 0.01))
        assert all(r.damped_defect < 1e-8 for r in rep.rows)
        assert rep.monotone

    def test_order_one_needs_zero_initial_value(self):
        with pytest.raises(CompatibilityError):
            parseval_check(sep("gauss"), HALF, 1.0, 1)

    def test_even_integrand(self):
        rep = parseval_check(sep("gauss", TemporalFactor.damped_cos(1.0, 2.0)), HALF, 0.0, 0, gamma_grid=(0.1,))
        assert rep.even_asymmetry < 1e-12

    def test_non_positive_gamma(self):
        with pytest.raises(ValueError):
            parseval_check(sep(), HALF, 0.0, 0, gamma_grid=(0.0,))


class TestEvolution:
    P = PencilData(1.0, 1.0)

    def test_isomorphism_weight(self):
        out = evolution_verdict(0.0, self.P, sep("gauss"), sep("gauss", TemporalFactor.texp()), HALF)
        assert out["wellposed"] and out["data_norms_finite"]
        assert set(out["data_norms"]) == {"f_L2_V0", "g_L2_V1", "dtg_L2_dual_upper"}

    def test_mean_required_above_half(self):
        out = evolution_verdict(1.0, self.P, None, sep("gauss"), HALF)
        assert not out["wellposed"] and "mean" in out["justification"]

    def test_mean_zero_data_accepted(self):
        odd = SeparableTimeField(JetField(lambda X, Y, Z: X * (-(X * X + Y * Y + Z * Z)).exp(), name="odd"), TemporalFactor.exp())
        out = evolution_verdict(1.0, self.P, None, odd, HALF)
        assert out["wellposed"]

    def test_half_weight_rejected(self):
        assert not evolution_verdict(0.5, self.P, None, None, HALF)["wellposed"]

    def test_upgrade(self):
        out = evolution_verdict(0.0, self.P, None, None, HALF, gamma=0.4)
        assert out["upgrade"]["allowed"]
