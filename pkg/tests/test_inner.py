import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from twzec.channel import ConfusionFamily, derive_confusion
from twzec.graphs import Graph
from twzec.inner import (
    DetectingSets,
    InnerPoint,
    best_sub_alphabet,
    detecting_sets,
    is_prime_power,
    linear_code_L,
    max_random_coding,
    random_coding_point,
    rate_hull,
    restricted_family,
)
from twzec.outer import ProductDistribution

from conftest import example3_family, random_channel


class TestDetectingSets:
    def test_example_channel(self, fam1):
        ds = detecting_sets(fam1)
        assert ds.d1 == (2,) and ds.d2 == ()
        assert ds.tau1 == 1 and ds.tau2 == 0

    def test_bmc(self, fam_bmc):
        ds = detecting_sets(fam_bmc)
        assert ds.d1 == (1,) and ds.d2 == (1,)

    def test_example3(self):
        ds = detecting_sets(example3_family())
        assert ds.d1 == (0, 1, 2)
        assert ds.d2 == (1,)

    def test_sorted_and_deduplicated(self):
        ds = DetectingSets(d1=(3, 1, 3), d2=())
        assert ds.d1 == (1, 3) and ds.tau1 == 2


class TestPrimePowers:
    def test_small_values(self):
        assert all(is_prime_power(q) for q in (2, 3, 4, 5, 7, 8, 9, 16, 27, 1024))
        assert not any(is_prime_power(q) for q in (1, 6, 10, 12, 100))


class TestRandomCodingPoint:
    def test_bmc_uniform(self, fam_bmc):
        d = ProductDistribution(p1=(0.5, 0.5), p2=(0.5, 0.5))
        pt = random_coding_point(fam_bmc, d)
        # collision-or-confusion sum is 1/2 * 1 + 1/2 * 1/2 = 3/4 per side
        expect = 0.5 * math.log2(4.0 / 3.0)
        assert abs(pt.r1 - expect) < 1e-12
        assert abs(pt.r2 - expect) < 1e-12
        assert pt.method == "random-coding"

    def test_example_channel_optimal_point(self, fam1):
        d = ProductDistribution(p1=(1 / 3, 0.0, 2 / 3), p2=(2 / 3, 1 / 3))
        pt = random_coding_point(fam1, d)
        assert abs(pt.r1 - 0.5 * math.log2(27.0 / 19.0)) < 1e-12
        assert abs(pt.r2 - 0.5 * math.log2(27.0 / 19.0)) < 1e-12

    def test_size_mismatch(self, fam1):
        with pytest.raises(ValueError):
            random_coding_point(fam1, ProductDistribution(p1=(1.0,), p2=(0.5, 0.5)))

    def test_negative_rates_clamped(self):
        pt = InnerPoint(r1=-0.3, r2=0.2, method="test")
        assert pt.r1 == 0.0 and pt.r2 == 0.2


class TestMaxRandomCoding:
    def test_example_channel_frozen_value(self, fam1):
        pt = max_random_coding(fam1, lam=0.5, effort="fast")
        assert abs((pt.r1 + pt.r2) - math.log2(27.0 / 19.0)) < 1e-6
        assert pt.parameters["converged"]
        assert abs(pt.parameters["weighted_value"] - 0.5 * (pt.r1 + pt.r2)) < 1e-9

    def test_sum_objective_matches_weighted(self, fam1):
        by_sum = max_random_coding(fam1, lam=None, effort="fast")
        by_half = max_random_coding(fam1, lam=0.5, effort="fast")
        assert abs((by_sum.r1 + by_sum.r2) - (by_half.r1 + by_half.r2)) < 1e-6

    @given(st.integers(0, 10_000))
    @settings(max_examples=15, deadline=None)
    def test_dominates_fixed_distributions(self, seed):
        rng = np.random.default_rng(seed)
        fam = derive_confusion(random_channel(rng))
        lam = float(rng.uniform(0, 1))
        best = max_random_coding(fam, lam=lam, effort="search")
        p1 = rng.random(fam.m1) + 0.05
        p2 = rng.random(fam.m2) + 0.05
        d = ProductDistribution(p1=tuple(p1 / p1.sum()), p2=tuple(p2 / p2.sum()))
        pt = random_coding_point(fam, d)
        assert (
            lam * pt.r1 + (1 - lam) * pt.r2
            <= lam * best.r1 + (1 - lam) * best.r2 + 1e-7
        )

    def test_validation(self, fam1):
        with pytest.raises(ValueError):
            max_random_coding(fam1, lam=1.2)
        with pytest.raises(ValueError):
            max_random_coding(fam1, effort="extreme")


class TestLinearCodeL:
    def test_binary_symmetric_frozen(self):
        value, (alpha, beta) = linear_code_L(0.5, 2, 2, 1, 1)
        assert abs(value - 0.5849625007211561) < 1e-12
        assert abs(alpha - 2 / 3) < 1e-9
        assert abs(beta - 2 / 3) < 1e-9

    def test_everything_detects(self):
        value, (alpha, beta) = linear_code_L(0.5, 4, 4, 4, 4)
        assert abs(value - 2.0) < 1e-12
        assert alpha == 1.0 and beta == 1.0

    def test_no_detectors_zero(self):
        value, _ = linear_code_L(0.5, 3, 3, 0, 0)
        assert abs(value) < 1e-12

    def test_closed_form_interior(self):
        # max over a of h(a) + a log2 tau + (1-a) log2(q - tau) + lin a
        # equals log2(tau * 2^(lin/w) + q - tau) per weight w
        lam, q1, q2, tau1, tau2 = 0.4, 4, 8, 2, 3
        f1 = lam * math.log2(tau1 * q2 ** ((1 - lam) / lam) + q1 - tau1)
        f2 = (1 - lam) * math.log2(tau2 * q1 ** (lam / (1 - lam)) + q2 - tau2)
        expect = f1 + f2 - lam * math.log2(q1) - (1 - lam) * math.log2(q2)
        value, _ = linear_code_L(lam, q1, q2, tau1, tau2)
        assert abs(value - expect) < 1e-9

    @given(
        st.sampled_from([2, 3, 4, 5, 8]),
        st.sampled_from([2, 3, 4, 5, 8]),
        st.floats(0.0, 1.0),
    )
    @settings(max_examples=60, deadline=None)
    def test_nonnegative_and_monotone_in_tau(self, q1, q2, lam):
        prev1 = -1.0
        for tau1 in range(q1 + 1):
            value, _ = linear_code_L(lam, q1, q2, tau1, q2 // 2)
            assert value >= -1e-12
            assert value >= prev1 - 1e-9
            prev1 = value

    def test_validation(self):
        with pytest.raises(ValueError):
            linear_code_L(1.5, 2, 2, 1, 1)
        with pytest.raises(ValueError):
            linear_code_L(0.5, 6, 2, 1, 1)
        with pytest.raises(ValueError):
            linear_code_L(0.5, 2, 2, 3, 1)


class TestBestSubAlphabet:
    def test_example_channel_balanced(self, fam1):
        pt = best_sub_alphabet(fam1, 0.5)
        assert abs((pt.r1 + pt.r2) - 1.1699250014423124) < 1e-9
        assert pt.parameters["q"] == (2, 2)
        assert pt.parameters["tau"] == (1, 1)
        assert abs(pt.parameters["alpha"] - 2 / 3) < 1e-9
        assert abs(pt.parameters["beta"] - 2 / 3) < 1e-9
        # the winner and its tie are the two restrictions that keep Alice's
        # detecting symbol while giving Bob one of his own
        assert pt.parameters["x1_sub"] == (0, 2)
        assert pt.parameters["x2_sub"] == (0, 1)
        assert ((1, 2), (0, 1)) in pt.parameters["ties"]

    def test_endpoints_feasible(self, fam1):
        for lam in (0.0, 0.25, 0.5, 0.75, 1.0):
            pt = best_sub_alphabet(fam1, lam)
            assert pt.r1 <= math.log2(3) + 1e-9
            assert pt.r2 <= 1.0 + 1e-9
        assert abs(best_sub_alphabet(fam1, 0.0).parameters["value"] - 1.0) < 1e-9
        assert abs(best_sub_alphabet(fam1, 1.0).parameters["value"] - 1.0) < 1e-9

    def test_detecting_counts_match_restriction(self, fam1):
        pt = best_sub_alphabet(fam1, 0.5)
        sub = restricted_family(fam1, pt.parameters["x1_sub"], pt.parameters["x2_sub"])
        ds = detecting_sets(sub)
        assert (ds.tau1, ds.tau2) == pt.parameters["tau"]

    def test_validation(self, fam1):
        with pytest.raises(ValueError):
            best_sub_alphabet(fam1, -0.1)


class TestRestrictedFamily:
    def test_example_channel_restriction(self, fam1):
        sub = restricted_family(fam1, (0, 2), (0, 1))
        assert sub.g == (Graph.complete(2), Graph.empty(2))
        assert sub.h == (Graph.empty(2), Graph.complete(2))
        assert sub.x1_labels == (0, 2)
        ds = detecting_sets(sub)
        assert ds.d1 == (1,) and ds.d2 == (0,)

    def test_order_is_preserved(self, fam1):
        sub = restricted_family(fam1, (2, 0), (0, 1))
        assert sub.g == (Graph.empty(2), Graph.complete(2))
        assert sub.x1_labels == (2, 0)

    @given(st.integers(0, 10_000))
    @settings(max_examples=25, deadline=None)
    def test_restriction_of_derived_equals_derived_of_restriction(self, seed):
        rng = np.random.default_rng(seed)
        q = random_channel(rng)
        fam = derive_confusion(q)
        sub1 = tuple(sorted(rng.choice(q.m1, size=max(1, q.m1 - 1), replace=False).tolist()))
        sub2 = tuple(sorted(rng.choice(q.m2, size=max(1, q.m2 - 1), replace=False).tolist()))
        sub = restricted_family(fam, sub1, sub2)
        direct = derive_confusion(
            type(q)(
                p=q.p[np.ix_(sub1, sub2)],
                x1_labels=tuple(q.x1_labels[i] for i in sub1),
                x2_labels=tuple(q.x2_labels[j] for j in sub2),
            )
        )
        assert sub.g == direct.g and sub.h == direct.h


class TestRateHull:
    def test_triangle(self):
        pts = [InnerPoint(1.0, 0.0, "a"), InnerPoint(0.0, 1.0, "b")]
        assert rate_hull(pts) == [(0.0, 0.0), (1.0, 0.0), (0.0, 1.0)]

    def test_dominated_point_ignored(self):
        pts = [(1.0, 0.0), (0.0, 1.0), (0.4, 0.4)]
        assert rate_hull(pts) == [(0.0, 0.0), (1.0, 0.0), (0.0, 1.0)]

    def test_square(self):
        pts = [(1.0, 1.0)]
        assert rate_hull(pts) == [(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)]

    def test_degenerate(self):
        assert rate_hull([]) == [(0.0, 0.0)]
        assert rate_hull([(0.0, 0.0)]) == [(0.0, 0.0)]
