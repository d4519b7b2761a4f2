import math

import numpy as np
import pytest

from conestokes import CircularCone, JetField, QuadratureSpec, builtin_field, dilated, e_norm, v_norm, x_norm_upper
from conestokes.jets import Jet
from conestokes.norms import (
    DYADIC_EQUIVALENCE_C,
    dyadic_equivalence_check,
    e_norm_equivalent,
    hardy_ratio,
    two_piece_norm,
    weighted_integral,
)

HALF = CircularCone(math.pi / 2)


def _cap(t0, power=0):
    """int over the cap of cos(theta)^power dOmega."""
    return 2 * math.pi * (1 - math.cos(t0) ** (power + 1)) / (power + 1)


def _radial(p, r0=1.0, r1=2.0):
    """int_r0^r1 r^p r^2 dr."""
    return (r1 ** (p + 3) - r0 ** (p + 3)) / (p + 3)


ZERO = JetField(lambda X, Y, Z: Jet.const(0.0, X), name="zero")


class TestClosedForms:
    def test_constant_field_half_sphere(self):
        assert v_norm(builtin_field("one"), HALF, 0.0, 0).value == pytest.approx(math.sqrt(14 * math.pi / 3), rel=1e-13)

    @pytest.mark.parametrize("beta", [-1.0, 0.0, 0.7])
    @pytest.mark.parametrize("t0", [0.4, 2.5])
    def test_constant_field_weighted(self, beta, t0):
        got = v_norm(builtin_field("one"), CircularCone(t0), beta, 0).squared
        assert got == pytest.approx(_cap(t0) * _radial(2 * beta), rel=1e-12)

    @pytest.mark.parametrize("t0", [0.9, 2.2])
    def test_linear_field_first_order(self, t0):
        got = v_norm(builtin_field("x3"), CircularCone(t0), 0.0, 1).squared
        ref = _radial(0) * (_cap(t0, 2) + _cap(t0))
        assert got == pytest.approx(ref, rel=1e-12)

    def test_e_norm_constant_example(self):
        assert e_norm(builtin_field("one"), HALF, 0.0, 1).squared == pytest.approx(2 * math.pi * (7 / 3 + 1), rel=1e-13)

    @pytest.mark.parametrize("beta", [-0.5, 0.0, 1.0])
    def test_e_norm_order_zero_doubles(self, beta):
        g = builtin_field("gauss")
        assert e_norm(g, HALF, beta, 0).squared == pytest.approx(2 * v_norm(g, HALF, beta, 0).squared, rel=1e-13)

    def test_x_norm_upper_zero_field(self):
        rep = x_norm_upper(ZERO, HALF, 0.3)
        assert rep.value == 0.0 and rep.label == "upper bound"

    def test_two_piece_switches_weight(self):
        one = builtin_field("one")
        got = two_piece_norm(one, HALF, 1.0, window=(-1, 1)).squared
        ref = _cap(math.pi / 2) * (_radial(2.0, 0.5, 1.0) + _radial(-2.0, 1.0, 2.0))
        assert got == pytest.approx(ref, rel=1e-12)

    def test_e_equivalent_order_zero(self):
        g = builtin_field("gauss")
        a = e_norm_equivalent(g, HALF, 0.2, 0).squared
        assert a == pytest.approx(e_norm(g, HALF, 0.2, 0).squared, rel=1e-13)


class TestStructure:
    def test_monotone_in_window(self):
        g = builtin_field("gauss")
        vals = [v_norm(g, HALF, 0.0, 1, window=(-w, w)).value for w in (1, 2, 3)]
        assert vals[0] < vals[1] < vals[2]

    def test_tail_indicator_small_for_decaying_field(self):
        g = builtin_field("gauss")
        assert v_norm(g, HALF, 0.0, 1, window=(-4, 4)).tail_indicator < 1e-6
        assert v_norm(builtin_field("one"), HALF, 0.0, 0, window=(-2, 2)).tail_indicator > 0.5

    def test_error_estimate_small(self):
        rep = v_norm(builtin_field("gauss"), HALF, 0.0, 2, window=(-2, 2), estimate_error=True)
        assert rep.error_estimate < 1e-8 * rep.value

    def test_radii_follow_scale(self):
        rep = v_norm(builtin_field("one"), HALF, 0.0, 0, window=(0, 2), spec=QuadratureSpec(radial_scale=0.5))
        assert rep.radii == (0.5, 2.0)

    @pytest.mark.parametrize("window", [(1, 1), (0.5, 2), (2, 1)])
    def test_bad_window(self, window):
        with pytest.raises(ValueError):
            v_norm(builtin_field("one"), HALF, 0.0, 0, window=window)

    def test_bad_order(self):
        with pytest.raises(ValueError):
            v_norm(builtin_field("one"), HALF, 0.0, 3)

    def test_bad_spec(self):
        with pytest.raises(ValueError):
            QuadratureSpec(n_r=0)
        with pytest.raises(ValueError):
            QuadratureSpec(radial_scale=-1)

    def test_per_dyad_sum(self):
        g = builtin_field("gauss")
        tot, per = weighted_integral(g, HALF, [lambda r: r**0], (-2, 2))
        assert len(per) == 4 and math.fsum(per) == tot

    def test_csv_row(self):
        rep = v_norm(builtin_field("one"), HALF, 0.0, 0)
        row = rep.csv_row("one")
        assert row[:4] == ["one", "V", 0.0, 0] and row[6] == rep.value


class TestDilation:
    @pytest.mark.parametrize("a", [0.25, 4.0])
    @pytest.mark.parametrize("l", [0, 1, 2])
    @pytest.mark.parametrize("beta", [-1.0, 0.0, 1.0])
    def test_v_norm_pulled_back_grid(self, a, l, beta):
        g = builtin_field("gauss")
        base = v_norm(g, HALF, beta, l, window=(-3, 3)).value
        got = v_norm(dilated(g, a), HALF, beta, l, window=(-3, 3), spec=QuadratureSpec(radial_scale=1 / a)).value
        assert got == pytest.approx(a ** (l - beta - 1.5) * base, rel=1e-12)

    @pytest.mark.parametrize("a", [0.25, 4.0])
    @pytest.mark.parametrize("l", [0, 2])
    def test_v_norm_independent_grid(self, a, l):
        # beta = l keeps the vertex weight integrable for a field with u(0) != 0
        g, beta = builtin_field("gauss"), float(l)
        base = v_norm(g, HALF, beta, l, window=(-8, 5)).value
        got = v_norm(dilated(g, a), HALF, beta, l, window=(-8, 5), spec=QuadratureSpec(16, 40, 40)).value
        assert got == pytest.approx(a ** (l - beta - 1.5) * base, rel=1e-6)

    @pytest.mark.parametrize("a", [0.25, 4.0])
    @pytest.mark.parametrize("l", [1, 2])
    def test_e_norm_per_term_law(self, a, l):
        g, beta = builtin_field("gauss"), 0.5
        spec = QuadratureSpec(radial_scale=1 / a)
        got = e_norm(dilated(g, a), HALF, beta, l, window=(-3, 3), spec=spec).squared
        A = [
            weighted_integral(g, HALF, [None] * k + [lambda r: r ** (2 * beta)], (-3, 3))[0]
            for k in range(l + 1)
        ]
        V2 = v_norm(g, HALF, beta, l, window=(-3, 3)).squared
        ref = math.fsum(a ** (2 * k - 2 * beta - 3) * A[k] for k in range(l + 1)) + a ** (2 * l - 2 * beta - 3) * V2
        assert got == pytest.approx(ref, rel=1e-12)


class TestDyadic:
    @pytest.mark.parametrize("beta", [-1.0, 0.0, 1.0])
    @pytest.mark.parametrize("l", [0, 1, 2])
    @pytest.mark.parametrize("kind", ["V", "E"])
    def test_localised_sum_equivalent(self, beta, l, kind):
        rep = dyadic_equivalence_check(builtin_field("bump"), HALF, beta, l, window=(-2, 3), kind=kind)
        assert rep.supported and rep.within
        assert 1 / DYADIC_EQUIVALENCE_C <= rep.ratio <= DYADIC_EQUIVALENCE_C

    def test_order_zero_is_sub_unit(self):
        # squares of a partition of unity sum to at most one
        rep = dyadic_equivalence_check(builtin_field("bump"), HALF, 0.0, 0, window=(-2, 3))
        assert 0.5 <= rep.ratio <= 1.0 + 1e-12

    def test_unsupported_field_flagged(self):
        rep = dyadic_equivalence_check(builtin_field("gauss"), HALF, 0.0, 1, window=(-1, 1))
        assert not rep.supported

    def test_zero_field(self):
        rep = dyadic_equivalence_check(ZERO, HALF, 0.0, 0, window=(-1, 2))
        assert rep.within and rep.ratio == 1.0


def test_hardy_ratio_finite():
    r = hardy_ratio(builtin_field("bump"), HALF, 0.0, window=(-1, 2))
    assert np.isfinite(r) and r > 0
