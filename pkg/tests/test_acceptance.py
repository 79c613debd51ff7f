"""Acceptance suite: nine end-to-end checks, one printed verdict line each.

Run with ``pytest -s tests/test_acceptance.py`` to see the verdict lines.
"""

import contextlib
import io
import json
import math
import time

import numpy as np
import pytest

from conftest import REPO_CHANNELS, pentagon_family, random_channel, random_graph
from twzec import cli
from twzec.channel import ConfusionFamily, canonical_channel, derive_confusion
from twzec.codebooks import (
    exhaustive_best_pair,
    is_uniquely_decodable,
    theorem8_construct,
    theorem8_family,
    theorem8_rate_target,
)
from twzec.graphs import Graph, disjoint_union, independence_number, strong_product
from twzec.inner import best_sub_alphabet, max_random_coding, random_coding_point
from twzec.oneshot import independence_product, rho_lower_certificate
from twzec.outer import (
    ProductDistribution,
    _batch_eps,
    epsilon_lambda_gradients,
    maxmin_bound,
    minmax_bound,
)
from twzec.spectral import (
    fractional_clique_cover,
    kg_kk_bound,
    lovasz_theta,
    noiseless_direction_bound,
)


def verdict(num: int, ok: bool, detail: str) -> None:
    print(f"ACCEPTANCE {num}: {'PASS' if ok else 'FAIL'} ({detail})")


@pytest.fixture(scope="module")
def example1_qmin():
    """One Q-minimized bounds run at lambda = 1/2 shared by checks 1 and 2."""
    buf = io.StringIO()
    t0 = time.perf_counter()
    with contextlib.redirect_stdout(buf):
        rc = cli.main(
            [
                "bounds",
                "--channel",
                REPO_CHANNELS["example1"],
                "--lambda-grid",
                "1",
                "--minimize-q",
                "on",
            ]
        )
    wall = time.perf_counter() - t0
    assert rc == 0
    doc = json.loads(buf.getvalue())
    row = doc["lambda_table"][0]
    assert row["lambda"] == 0.5
    values = {e["method"]: e["value"] for e in row["entries"]}
    return values, wall


def test_acceptance_1_minmax_sum_rate(example1_qmin):
    values, wall = example1_qmin
    total = 2 * values["minmax"]
    ok = abs(total - 1.2933) <= 5e-3 and wall < 30.0
    verdict(1, ok, f"min-max sum rate {total:.6f}, wall {wall:.1f}s")
    assert ok, f"min-max sum rate {total:.6f}, wall {wall:.1f}s"


def test_acceptance_2_maxmin_sum_rate(example1_qmin):
    values, _ = example1_qmin
    total = 2 * values["maxmin"]
    ok = abs(total - 1.2910) <= 5e-3 and values["maxmin"] < values["minmax"]
    verdict(2, ok, f"max-min sum rate {total:.6f}, min-max {2 * values['minmax']:.6f}")
    assert ok, f"max-min sum rate {total:.6f}"


def test_acceptance_3_random_coding_sum_rate(fam1):
    pt = max_random_coding(fam1)
    total = pt.r1 + pt.r2
    ok = abs(total - 1.0907) <= 2e-3
    verdict(3, ok, f"random-coding sum rate {total:.6f}, target 1.0907 +/- 2e-3")
    assert ok, (
        f"best random-coding sum rate for this channel is {total:.6f} "
        f"(= log2(27/19)); it misses the 1.0907 target by {abs(total - 1.0907):.4f}"
    )


def test_acceptance_4_sub_alphabet_sum_rate(fam1):
    pt = best_sub_alphabet(fam1, 0.5)
    total = pt.r1 + pt.r2
    params = pt.parameters
    candidates = {(params["x1_sub"], params["x2_sub"])} | set(params["ties"])
    ok = (
        abs(total - 1.17) <= 5e-3
        and ((1, 2), (0, 1)) in candidates
        and params["tau"] == (1, 1)
        and abs(params["alpha"] - 2 / 3) <= 1e-9
        and abs(params["beta"] - 2 / 3) <= 1e-9
    )
    verdict(4, ok, f"sub-alphabet sum rate {total:.6f} at tau=(1,1), alpha=beta=2/3")
    assert ok, (total, params)


def test_acceptance_5_pentagon_channel():
    c5 = Graph.cycle(5)
    theta = lovasz_theta(c5)
    kg = kg_kk_bound(5, c5)
    fam = pentagon_family()
    bound = maxmin_bound(canonical_channel(fam), fam, 0.5)
    total = 2 * bound.value
    ok = (
        abs(theta - math.sqrt(5)) <= 1e-6
        and abs(kg - 2.8552) <= 1e-4
        and abs(total - 2.9069) <= 5e-3
        and total > kg
    )
    verdict(5, ok, f"theta {theta:.7f}, noiseless bound {kg:.5f}, max-min {total:.5f}")
    assert ok, (theta, kg, total)


def test_acceptance_6_code_construction():
    q, s, n, k = 4, 2, 6, 4
    pair = theorem8_construct(q, s, n, k)
    fam = theorem8_family(q, s)
    decodable = is_uniquely_decodable(pair, fam).ok
    size_ok = len(pair.b) == s ** (n - k) * q ** k
    bound = noiseless_direction_bound(fam)
    bound_ok = abs(bound - (1 + math.log2(3))) <= 1e-9
    total = sum(pair.rates)
    target = theorem8_rate_target(q, s, n, k)
    h23 = -(2 / 3) * math.log2(2 / 3) - (1 / 3) * math.log2(1 / 3)
    rate_ok = total <= bound + 1e-9 and target - total <= h23 + 2.0 / n
    ok = decodable and size_ok and bound_ok and rate_ok
    verdict(
        6,
        ok,
        f"|A|={len(pair.a)}, |B|={len(pair.b)}, sum rate {total:.4f}, "
        f"noiseless bound {bound:.4f}",
    )
    assert ok, (decodable, size_ok, bound_ok, rate_ok)


def test_acceptance_7_oracle_suite():
    t_start = time.perf_counter()
    lams = [i / 10 for i in range(11)]
    failures = []
    for trial in range(50):
        rng = np.random.default_rng(1000 + trial)
        ch = random_channel(rng)
        fam = derive_confusion(ch)
        m1, m2 = fam.m1, fam.m2
        pi, witness = independence_product(fam)

        # (a) blocklength-1 exhaustive search recovers the one-shot product.
        res1 = exhaustive_best_pair(fam, 1)
        if len(res1.pair.a) * len(res1.pair.b) != pi:
            failures.append((trial, "one-shot"))

        # (b) structured-family identities for the independence product.
        alpha_g = max(independence_number(g) for g in fam.g)
        alpha_h = max(independence_number(h) for h in fam.h)
        if not max(alpha_g, alpha_h) <= pi <= alpha_g * alpha_h:
            failures.append((trial, "sandwich"))
        g_extra = random_graph(rng, m2)
        h_extra = random_graph(rng, m1)
        const = ConfusionFamily(g=(g_extra,) * m1, h=(h_extra,) * m2)
        want = independence_number(g_extra) * independence_number(h_extra)
        if independence_product(const)[0] != want:
            failures.append((trial, "constant-family"))
        mix = ConfusionFamily(
            g=(Graph.empty(m2),) + (g_extra,) * (m1 - 1),
            h=(Graph.empty(m1),) + (h_extra,) * (m2 - 1),
        )
        if independence_product(mix)[0] != max(want, m1, m2):
            failures.append((trial, "silenced-symbol"))
        allc = ConfusionFamily(g=fam.g, h=(Graph.complete(m1),) * m2)
        if independence_product(allc)[0] != alpha_g:
            failures.append((trial, "one-way-reduction"))

        # (c)+(d) ordering of the bounds and dominance over achievable points.
        inner_pts = [
            random_coding_point(
                fam, ProductDistribution(p1=(1 / m1,) * m1, p2=(1 / m2,) * m2)
            )
        ]
        for _ in range(2):
            d = ProductDistribution(
                p1=tuple(rng.dirichlet(np.ones(m1))),
                p2=tuple(rng.dirichlet(np.ones(m2))),
            )
            inner_pts.append(random_coding_point(fam, d))
        inner_pts.append(best_sub_alphabet(fam, 0.5))
        pairs = [res1, exhaustive_best_pair(fam, 2, budget=4096)]
        for lam in lams:
            mm = minmax_bound(ch, fam, lam, effort="fast")
            mx = maxmin_bound(ch, fam, lam, effort="fast")
            if mx.value > mm.value + 1e-6:
                failures.append((trial, "ordering", lam))
            for bound in (mm, mx):
                for pt in inner_pts:
                    if lam * pt.r1 + (1 - lam) * pt.r2 > bound.value + 1e-6:
                        failures.append((trial, "inner-dominance", lam, bound.method))
                for res in pairs:
                    r1, r2 = res.pair.rates
                    if lam * r1 + (1 - lam) * r2 > bound.value + 1e-6:
                        failures.append((trial, "pair-dominance", lam, bound.method))

        # (e) rank-one certificate built from the one-shot witness.
        cert = rho_lower_certificate(fam, witness)
        checks = cert.checks
        feasible = (
            checks["min_eigenvalue"] >= -1e-9
            and abs(checks["trace_x1"] - 1) <= 1e-9
            and abs(checks["trace_x2"] - 1) <= 1e-9
            and abs(checks["complementarity"]) <= 1e-9
            and bool(checks["objective_matches"])
        )
        if not feasible:
            failures.append((trial, "certificate", checks))
        if abs(cert.value - 2 * math.sqrt(pi)) > 1e-9:
            failures.append((trial, "certificate-value"))

    elapsed = time.perf_counter() - t_start
    ok = not failures and elapsed < 300.0
    verdict(7, ok, f"50 channels, {elapsed:.1f}s, {len(failures)} violations")
    assert ok, failures[:10]


def test_acceptance_8_spectral_axioms():
    worst = 0.0
    sandwich_ok = True
    for trial in range(20):
        rng = np.random.default_rng(2000 + trial)
        g = random_graph(rng, int(rng.integers(2, 7)))
        h = random_graph(rng, int(rng.integers(2, 7)))
        tg, th = lovasz_theta(g), lovasz_theta(h)
        fg, fh = fractional_clique_cover(g), fractional_clique_cover(h)
        worst = max(
            worst,
            abs(lovasz_theta(strong_product(g, h)) - tg * th),
            abs(lovasz_theta(disjoint_union(g, h)) - (tg + th)),
            abs(fractional_clique_cover(strong_product(g, h)) - fg * fh),
            abs(fractional_clique_cover(disjoint_union(g, h)) - (fg + fh)),
        )
        for gr, t, f in ((g, tg, fg), (h, th, fh)):
            if not independence_number(gr) <= t + 1e-4 or t > f + 1e-4:
                sandwich_ok = False
    ok = worst <= 1e-4 and sandwich_ok
    verdict(8, ok, f"20 graph pairs, worst axiom deviation {worst:.2e}")
    assert ok, worst


def test_acceptance_9_numerics():
    from twzec.channel import marginal_y1, marginal_y2

    worst_rel = 0.0
    for trial in range(20):
        rng = np.random.default_rng(3000 + trial)
        ch = random_channel(rng)
        lam = float(rng.uniform(0.05, 0.95))
        p1 = rng.random(ch.m1) + 0.2
        p1 /= p1.sum()
        p2 = rng.random(ch.m2) + 0.2
        p2 /= p2.sum()
        d = ProductDistribution(p1=tuple(p1), p2=tuple(p2))
        g1, g2 = epsilon_lambda_gradients(ch, d, lam)
        w1, w2 = marginal_y1(ch), marginal_y2(ch)

        def f(a, b):
            val, _, _ = _batch_eps(a[None, :], b[None, :], w1, w2, lam)
            return float(val[0])

        h = 1e-5
        for i in range(ch.m1):
            e = np.zeros(ch.m1)
            e[i] = h
            fd = (f(p1 + e, p2) - f(p1 - e, p2)) / (2 * h)
            worst_rel = max(worst_rel, abs(fd - g1[i]) / max(1.0, abs(g1[i])))
        for j in range(ch.m2):
            e = np.zeros(ch.m2)
            e[j] = h
            fd = (f(p1, p2 + e) - f(p1, p2 - e)) / (2 * h)
            worst_rel = max(worst_rel, abs(fd - g2[j]) / max(1.0, abs(g2[j])))
    grad_ok = worst_rel <= 1e-5

    theta_dev = 0.0
    for n in range(1, 11):
        theta_dev = max(
            theta_dev,
            abs(lovasz_theta(Graph.empty(n)) - n),
            abs(lovasz_theta(Graph.complete(n)) - 1),
        )
    ok = grad_ok and theta_dev <= 1e-7
    verdict(
        9, ok, f"gradient rel. error {worst_rel:.2e}, theta endpoint dev {theta_dev:.2e}"
    )
    assert ok, (worst_rel, theta_dev)
