import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from twzec.channel import canonical_channel, derive_confusion
from twzec.graphs import Graph
from twzec.oneshot import DualPair, is_dual_clique_pair
from twzec.outer import (
    LambdaBound,
    ProductDistribution,
    _batch_eps,
    assemble_outer_region,
    epsilon_lambda,
    epsilon_lambda_gradients,
    l_lambda,
    max_epsilon,
    max_neglog_l,
    maxmin_bound,
    minimize_over_q,
    minmax_bound,
    oneway_lp_bound,
    region_polygon,
)

from conftest import bmc_channel, example1_channel, random_channel


def interior_distribution(rng, m):
    v = rng.random(m) + 0.2
    return v / v.sum()


def naive_l(fam, p1, p2, lam):
    """Reference: scan every dual clique pair, not just the maximal ones."""
    best = 0.0
    for rs in range(1, fam.m1 + 1):
        for s_set in itertools.combinations(range(fam.m1), rs):
            for rt in range(1, fam.m2 + 1):
                for t_set in itertools.combinations(range(fam.m2), rt):
                    if not is_dual_clique_pair(fam, DualPair(s=s_set, t=t_set)):
                        continue
                    u = sum(p1[s] for s in s_set)
                    v = sum(p2[t] for t in t_set)
                    if u > 0 and v > 0:
                        best = max(best, u**lam * v ** (1.0 - lam))
    return best


class TestProductDistribution:
    def test_validation(self):
        with pytest.raises(ValueError):
            ProductDistribution(p1=(0.5, 0.6), p2=(1.0,))
        with pytest.raises(ValueError):
            ProductDistribution(p1=(1.2, -0.2), p2=(1.0,))
        d = ProductDistribution(p1=(0.25, 0.75), p2=(1.0,))
        a1, a2 = d.arrays()
        assert a1.tolist() == [0.25, 0.75]


class TestEpsilonLambda:
    def test_bmc_uniform_is_half(self, fam_bmc):
        q = bmc_channel()
        d = ProductDistribution(p1=(0.5, 0.5), p2=(0.5, 0.5))
        for lam in (0.0, 0.3, 0.5, 1.0):
            assert abs(epsilon_lambda(q, d, lam) - 0.5) < 1e-12

    def test_example_channel_directed_value(self):
        # p2 = (1, 0): conditioned on x2 = 0, Alice's symbols 0 and 2 are
        # perfectly resolved through y2 while symbol 1 splits evenly
        q = example1_channel(0.5)
        d = ProductDistribution(p1=(1 / 3, 1 / 3, 1 / 3), p2=(1.0, 0.0))
        assert abs(epsilon_lambda(q, d, 1.0) - 2.0 / 3.0) < 1e-12

    def test_lambda_range_checked(self):
        q = bmc_channel()
        d = ProductDistribution(p1=(0.5, 0.5), p2=(0.5, 0.5))
        with pytest.raises(ValueError):
            epsilon_lambda(q, d, 1.5)

    def test_linear_in_lambda(self):
        rng = np.random.default_rng(3)
        q = random_channel(rng)
        d = ProductDistribution(
            p1=tuple(interior_distribution(rng, q.m1)),
            p2=tuple(interior_distribution(rng, q.m2)),
        )
        e0 = epsilon_lambda(q, d, 0.0)
        e1 = epsilon_lambda(q, d, 1.0)
        for lam in (0.25, 0.5, 0.8):
            assert abs(epsilon_lambda(q, d, lam) - (lam * e1 + (1 - lam) * e0)) < 1e-12


class TestGradients:
    @given(st.integers(0, 10_000))
    @settings(max_examples=25, deadline=None)
    def test_matches_finite_differences(self, seed):
        rng = np.random.default_rng(seed)
        q = random_channel(rng)
        lam = float(rng.uniform(0.1, 0.9))
        p1 = interior_distribution(rng, q.m1)
        p2 = interior_distribution(rng, q.m2)
        d = ProductDistribution(p1=tuple(p1), p2=tuple(p2))
        g1, g2 = epsilon_lambda_gradients(q, d, lam)
        from twzec.channel import marginal_y1, marginal_y2

        w1, w2 = marginal_y1(q), marginal_y2(q)

        def f(a, b):
            val, _, _ = _batch_eps(a[None, :], b[None, :], w1, w2, lam)
            return float(val[0])

        h = 1e-5
        for i in range(q.m1):
            e = np.zeros(q.m1)
            e[i] = h
            fd = (f(p1 + e, p2) - f(p1 - e, p2)) / (2 * h)
            assert abs(fd - g1[i]) <= 1e-5 * max(1.0, abs(g1[i]))
        for j in range(q.m2):
            e = np.zeros(q.m2)
            e[j] = h
            fd = (f(p1, p2 + e) - f(p1, p2 - e)) / (2 * h)
            assert abs(fd - g2[j]) <= 1e-5 * max(1.0, abs(g2[j]))


class TestLLambda:
    def test_example_channel_uniform(self, fam1):
        d = ProductDistribution(p1=(1 / 3,) * 3, p2=(0.5, 0.5))
        # all five maximal pair masses tie at 1/sqrt(3) when lambda = 1/2
        assert abs(l_lambda(fam1, d, 0.5) - 3 ** (-0.5)) < 1e-12
        assert abs(l_lambda(fam1, d, 1.0) - 2 / 3) < 1e-12
        assert abs(l_lambda(fam1, d, 0.0) - 1.0) < 1e-12

    def test_zero_mass_pairs_drop_out(self, fam_bmc):
        d = ProductDistribution(p1=(0.0, 1.0), p2=(1.0, 0.0))
        # only ({0,1}, {0}) has both masses positive: 1^lam * 1^(1-lam)
        assert abs(l_lambda(fam_bmc, d, 0.0) - 1.0) < 1e-12
        d2 = ProductDistribution(p1=(0.0, 1.0), p2=(0.0, 1.0))
        # ({1}, {1}) survives with unit masses
        assert abs(l_lambda(fam_bmc, d2, 0.7) - 1.0) < 1e-12

    @given(st.integers(0, 10_000))
    @settings(max_examples=30, deadline=None)
    def test_matches_subset_scan(self, seed):
        rng = np.random.default_rng(seed)
        fam = derive_confusion(random_channel(rng))
        lam = float(rng.uniform(0, 1))
        p1 = interior_distribution(rng, fam.m1)
        p2 = interior_distribution(rng, fam.m2)
        d = ProductDistribution(p1=tuple(p1), p2=tuple(p2))
        assert abs(l_lambda(fam, d, lam) - naive_l(fam, p1, p2, lam)) < 1e-12


class TestMaximizers:
    def test_max_epsilon_dominates_uniform(self, fam_bmc):
        q = bmc_channel()
        val, d, residual = max_epsilon(q, 0.5)
        assert val >= 0.5 - 1e-12
        check = epsilon_lambda(q, ProductDistribution(p1=d.p1, p2=d.p2), 0.5)
        assert abs(check - val) < 1e-9
        assert residual < 1e-6
        # the symmetric stationary point a h(a) with a about 0.7035
        assert abs(val - 0.6174) < 2e-3

    def test_max_epsilon_deterministic(self):
        q = example1_channel(0.5)
        a = max_epsilon(q, 0.3, effort="fast")
        b = max_epsilon(q, 0.3, effort="fast")
        assert a[0] == b[0] and a[1] == b[1]

    def test_max_neglog_l_hits_subset_probe(self, fam1):
        val, d, _ = max_neglog_l(fam1, 0.5)
        # the uniform product ties all pairs at -log2 sqrt(1/3)
        assert val >= 0.5 * math.log2(3.0) - 1e-9
        check = l_lambda(fam1, ProductDistribution(p1=d.p1, p2=d.p2), 0.5)
        assert abs(-math.log2(check) - val) < 1e-9

    def test_effort_validation(self, fam_bmc):
        q = bmc_channel()
        with pytest.raises(KeyError):
            max_epsilon(q, 0.5, effort="extreme")


class TestBoundSuite:
    def test_maxmin_never_exceeds_minmax(self, fam1):
        q = example1_channel(0.5)
        for lam in (0.0, 0.5, 1.0):
            lo = maxmin_bound(q, fam1, lam, effort="fast")
            hi = minmax_bound(q, fam1, lam, effort="fast")
            assert lo.value <= hi.value + 1e-9
            assert lo.method == "maxmin" and hi.method == "minmax"
            assert hi.meta["max_epsilon"] >= hi.value - 1e-12

    @given(st.integers(0, 10_000))
    @settings(max_examples=6, deadline=None)
    def test_random_channels_ordered(self, seed):
        rng = np.random.default_rng(seed)
        q = random_channel(rng)
        fam = derive_confusion(q)
        for lam in (0.0, 0.37, 1.0):
            lo = maxmin_bound(q, fam, lam, effort="search")
            hi = minmax_bound(q, fam, lam, effort="search")
            assert lo.value <= hi.value + 1e-6

    def test_assemble_region(self, fam_bmc):
        q = bmc_channel()
        bounds = assemble_outer_region(q, fam_bmc, [0.0, 0.5, 1.0], effort="fast")
        assert len(bounds) == 6
        assert {b.method for b in bounds} == {"minmax", "maxmin"}
        assert all(isinstance(b, LambdaBound) for b in bounds)
        assert all(b.value >= -1e-12 for b in bounds)


class TestOnewayBound:
    def test_pentagon_feedback_value(self):
        g = Graph.cycle(5)
        w = np.zeros((5, 5))
        for x in range(5):
            w[x, x] = 0.5
            w[x, (x + 1) % 5] = 0.5
        got = oneway_lp_bound(g, w)
        assert abs(got - math.log2(2.5)) < 5e-3

    def test_identity_channel(self):
        # no confusability and a deterministic table: bound is log2 n exactly
        g = Graph.empty(3)
        got = oneway_lp_bound(g, np.eye(3))
        assert abs(got - math.log2(3)) < 1e-6

    def test_input_validation(self):
        with pytest.raises(ValueError):
            oneway_lp_bound(Graph.empty(2), np.eye(3))
        with pytest.raises(ValueError):
            oneway_lp_bound(Graph.empty(2), np.array([[0.5, 0.2], [0.5, 0.5]]))


class TestMinimizeOverQ:
    def test_zero_dimensional_family(self, fam_bmc):
        out = minimize_over_q(fam_bmc, minmax_bound, 0.5, effort="fast")
        assert out.meta["q_parameters"] == []
        direct = minmax_bound(canonical_channel(fam_bmc), fam_bmc, 0.5, effort="fast")
        assert abs(out.value - direct.value) < 1e-12

    def test_lambda_validation(self, fam_bmc):
        with pytest.raises(ValueError):
            minimize_over_q(fam_bmc, minmax_bound, -0.2)


class TestRegionPolygon:
    def test_rectangle_then_diagonal(self):
        bounds = [
            LambdaBound(lam=1.0, method="minmax", value=1.0),
            LambdaBound(lam=0.0, method="minmax", value=2.0),
        ]
        poly = region_polygon(bounds)
        assert poly == [(0.0, 0.0), (1.0, 0.0), (1.0, 2.0), (0.0, 2.0)]
        bounds.append(LambdaBound(lam=0.5, method="minmax", value=1.0))
        poly = region_polygon(bounds)
        assert poly == [(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 2.0)]

    def test_empty_region(self):
        bounds = [LambdaBound(lam=0.5, method="minmax", value=-1.0)]
        assert region_polygon(bounds) == []

    def test_no_bounds_gives_box(self):
        poly = region_polygon([], rmax=4.0)
        assert poly == [(0.0, 0.0), (4.0, 0.0), (4.0, 4.0), (0.0, 4.0)]
