import json
import math

import numpy as np
import pytest

from conestokes import CircularCone, neumann_spectrum
from conestokes.solvability import (
    CLASSIFICATIONS,
    PencilData,
    classify_operator,
    isomorphism_intervals,
    matching_rules,
    regularity_shift_ok,
    time_domain_wellposed,
)

from conftest import HALF, WIDE, cached_stokes


def pd(l1, m2):
    return PencilData(l1, m2)


class TestIntervals:
    @pytest.mark.parametrize(
        "l1,m2,first,second",
        [
            (1.0, 1.0, (-0.5, 0.5), (0.5, 1.5)),
            (1.0, 2.0, (-0.5, 0.5), (0.5, 2.5)),
            (0.6, 0.7, (-0.1, 0.5), (0.5, 1.2)),
        ],
    )
    def test_examples(self, l1, m2, first, second):
        a, b = isomorphism_intervals(pd(l1, m2))
        assert a == pytest.approx(first, abs=1e-15) and b == pytest.approx(second, abs=1e-15)

    def test_exact_half_sphere_values(self):
        assert isomorphism_intervals(pd(1.0, 1.0)) == ((-0.5, 0.5), (0.5, 1.5))

    @pytest.mark.parametrize("l1,m2", [(0.0, 1.0), (1.2, 1.0), (0.5, 0.0), (math.nan, 1.0)])
    def test_invalid_pencil(self, l1, m2):
        with pytest.raises(ValueError):
            PencilData(l1, m2)

    def test_spectrum_without_anchor_rejected(self):
        sp = neumann_spectrum(CircularCone(1.0), m_max=1, window=(0.1, 2))
        with pytest.raises(ValueError):
            PencilData(1.0, 1.0, neumann_spectrum=sp)


class TestClassify:
    @pytest.mark.parametrize("l1,m2", [(1.0, 1.0), (0.3, 2.5), (0.9, 0.4)])
    def test_half_is_not_fredholm(self, l1, m2):
        assert classify_operator(0.5, pd(l1, m2)).classification == "NotFredholm"

    @pytest.mark.parametrize(
        "beta,l1,m2,cls",
        [
            (0.0, 1.0, 1.0, "Isomorphism"),
            (-0.4, 0.8, 1.0, "InjectiveNotSurjective"),
            (1.0, 1.0, 1.0, "IsomorphismOntoMeanZero"),
            (2.0, 0.4, 2.5, "KernelNontrivial"),
            (-1.5, 0.4, 2.5, "InjectiveNotSurjective"),
            (1.2, 0.8, 0.6, "CokernelDimAtLeast2"),
            (-3.9, 1.0, 1.0, "OutsideTheory"),
        ],
    )
    def test_examples(self, beta, l1, m2, cls):
        v = classify_operator(beta, pd(l1, m2))
        assert v.classification == cls
        assert v.classification in CLASSIFICATIONS

    def test_disjoint_regions_random(self):
        rng = np.random.default_rng(2024)
        for _ in range(10_000):
            l1 = rng.uniform(1e-6, 1.0)
            m2 = rng.uniform(1e-6, 3.0)
            beta = rng.uniform(-4, 4)
            classes = {c for _, c, _ in matching_rules(beta, pd(l1, m2))}
            assert len(classes) == 1, (beta, l1, m2, classes)

    def test_endpoints_never_isomorphism(self):
        rng = np.random.default_rng(5)
        for _ in range(500):
            p = pd(rng.uniform(0.05, 1.0), rng.uniform(0.05, 3.0))
            for iv in isomorphism_intervals(p):
                for b in iv:
                    assert classify_operator(b, p).classification not in ("Isomorphism", "IsomorphismOntoMeanZero")

    @pytest.mark.parametrize("t0", [HALF, WIDE])
    def test_every_stored_eigenvalue_line_fires(self, t0):
        cone = CircularCone(t0)
        ss = cached_stokes(t0)
        ns = neumann_spectrum(cone, m_max=6, window=(-4, 2))
        l1 = min(v for v in ss.values() if v > 1e-6)
        from conestokes import mu2_plus

        p = PencilData(l1, mu2_plus(cone), ns, ss)
        for lam in p.stokes_values():
            assert classify_operator(0.5 - lam, p).rule == 1
        for mu in p.neumann_values():
            assert classify_operator(-mu - 0.5, p).rule == 1

    def test_degenerate_case_flagged(self):
        # mu2+ - 1 coincides with the Neumann eigenvalue 0 when mu2+ = 1
        v = classify_operator(1.55, pd(0.9, 1.0))
        assert v.classification == "CokernelDimAtLeast2" and "degenerate" in v.justification

    def test_non_finite_beta(self):
        with pytest.raises(ValueError):
            classify_operator(math.inf, pd(1, 1))

    def test_json_fields(self):
        d = json.loads(json.dumps(classify_operator(0.0, pd(1, 1)).to_dict()))
        assert {"beta", "classification", "justification", "intervals", "pencil_digest"} <= set(d)

    def test_digest_depends_on_pencil(self):
        assert pd(1, 1).digest() != pd(0.9, 1).digest()
        assert pd(1, 1).digest() == pd(1, 1).digest()


class TestShift:
    def test_case_one(self):
        v = regularity_shift_ok(0.0, 0.4, pd(1.0, 1.0))
        assert v.allowed and "case (i)" in v.justification

    def test_mean_zero(self):
        allowed, why = regularity_shift_ok(0.0, 1.0, pd(1.0, 1.0), mean_zero=True)
        assert allowed and "mean-zero" in why

    def test_blocked_by_minus_one(self):
        allowed, why = regularity_shift_ok(0.0, 1.0, pd(1.0, 1.0))
        assert not allowed and "-1" in why

    def test_case_two(self):
        assert regularity_shift_ok(0.4, 0.0, pd(1.0, 1.0)).allowed
        assert not regularity_shift_ok(0.4, -0.7, pd(1.0, 1.0)).allowed

    def test_equal_weights(self):
        with pytest.raises(ValueError):
            regularity_shift_ok(0.2, 0.2, pd(1, 1))


class TestTimeDomain:
    def test_isomorphism_weight(self):
        v = time_domain_wellposed(0.0, pd(1, 1))
        assert v.wellposed and v.compatibility is None

    def test_mean_zero_weight(self):
        v = time_domain_wellposed(1.0, pd(1, 1))
        assert v.wellposed and "almost all t" in v.compatibility

    def test_excluded_half(self):
        assert not time_domain_wellposed(0.5, pd(1, 1)).wellposed
