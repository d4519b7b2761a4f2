"""Property-based checks of invariants that hold for arbitrary inputs."""

import math

import numpy as np
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from conestokes import CircularCone, PencilData, TemporalFactor, builtin_field, classify_operator, isomorphism_intervals, v_norm
from conestokes.cone import CutoffFamily, boundary_distance, cutoff
from conestokes.numerics import dsum, legendre_p
from conestokes.solvability import LINE_TOL, matching_rules

lam1 = st.floats(1e-3, 1.0)
mu2 = st.floats(1e-3, 3.0)
beta = st.floats(-4.0, 4.0)
FAST = settings(max_examples=60, deadline=None)


@given(lam1, mu2, beta)
def test_single_classification(l1, m2, b):
    classes = {c for _, c, _ in matching_rules(b, PencilData(l1, m2))}
    assert len(classes) == 1


@given(lam1, mu2)
def test_intervals_meet_at_half(l1, m2):
    (a, b), (c, d) = isomorphism_intervals(PencilData(l1, m2))
    assert b == c == 0.5
    assert a == 0.5 - l1 and d == min(m2 + 0.5, l1 + 1.5)


@given(lam1, mu2, st.floats(0.0, 1.0, exclude_min=True, exclude_max=True))
def test_interior_of_first_interval_is_isomorphism(l1, m2, t):
    (a, b), _ = isomorphism_intervals(PencilData(l1, m2))
    x = a + t * (b - a)
    assume(a + LINE_TOL < x < b - LINE_TOL)
    assert classify_operator(x, PencilData(l1, m2)).classification == "Isomorphism"


@given(lam1, mu2, st.floats(-1.0, 1.0), st.sampled_from(["stokes", "neumann"]))
def test_tolerance_band_belongs_to_the_line(l1, m2, frac, kind):
    p = PencilData(l1, m2)
    lines = [0.5 - v for v in p.stokes_values()] if kind == "stokes" else [-v - 0.5 for v in p.neumann_values()]
    b = lines[0] + 0.9 * frac * LINE_TOL
    assert [r for r, _, _ in matching_rules(b, p)] == [1]


@given(st.floats(1e-3, 1e3), st.integers(-6, 6))
def test_dyadic_partition_of_unity(r, base):
    total = sum(float(cutoff(CutoffFamily("dyadic", nu=n), r)[0]) for n in range(base - 12, base + 13))
    assume(2.0 ** (base - 11) < r < 2.0 ** (base + 11))
    assert abs(total - 1.0) < 1e-12


@given(st.floats(0.1, 3.0), st.floats(0.05, 0.95), st.floats(0.0, 2 * math.pi), st.floats(0.1, 10.0), st.floats(0.5, 8.0))
def test_distance_is_homogeneous(t0, frac, ph, r, t):
    cone = CircularCone(t0)
    th = frac * t0
    nu1, g1 = boundary_distance(cone, (r, th, ph))
    nu2, g2 = boundary_distance(cone, (t * r, th, ph))
    assert math.isclose(nu2, t * nu1, rel_tol=1e-12)
    assert np.allclose(g1, g2, atol=1e-12)


@given(st.floats(-3.0, 3.0), st.integers(0, 4), st.floats(0.05, 3.0))
def test_legendre_degree_reflection(nu, m, theta):
    a = legendre_p(nu, m, theta)
    b = legendre_p(-1.0 - nu, m, theta)
    scale = max(1.0, abs(a.value))
    assert abs(a.value - b.value) <= 1e-10 * scale


@given(st.lists(st.floats(-1e12, 1e12), min_size=1, max_size=60), st.randoms())
def test_dsum_order_independent(vals, rnd):
    shuffled = list(vals)
    rnd.shuffle(shuffled)
    assert dsum(vals) == dsum(shuffled) == math.fsum(vals)


rates = st.floats(0.1, 5.0)


@given(rates, st.floats(0.01, 2.0))
def test_damping_reduces_l2(a, g):
    f = TemporalFactor((1.0, -0.5), (0, 1), (a, a + 0.3))
    assert 0 <= f.damped(g).l2_squared() <= f.l2_squared()


@given(rates, st.floats(0.05, 3.0), st.floats(-5, 5))
def test_laplace_of_derivative(a, gamma, tau):
    # L[a'](s) = s L[a](s) - a(0)
    f = TemporalFactor((1.0, 2.0), (1, 2), (a, a))
    s = complex(gamma, tau)
    assert abs(f.derivative().laplace(s) - (s * f.laplace(s) - f.at_zero())) <= 1e-10 * (1 + abs(s * f.laplace(s)))


@FAST
@given(st.floats(-1.0, 1.0), st.integers(0, 2), st.integers(-2, 1))
def test_norm_grows_with_window(b, l, lo):
    g = builtin_field("gauss")
    cone = CircularCone(math.pi / 2)
    small = v_norm(g, cone, b, l, (lo, lo + 1)).value
    big = v_norm(g, cone, b, l, (lo - 1, lo + 2)).value
    assert 0 < small < big
