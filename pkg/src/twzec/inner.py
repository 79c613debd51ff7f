"""Achievable rate points: the random-coding region driven by confusable
input pairs, detecting-symbol analysis, the linear-code rate function, and
its optimization over sub-alphabet restrictions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .channel import ConfusionFamily
from .graphs import induced_subgraph
from .numerics import project_simplex_rows, simplex_start_pool
from .outer import ProductDistribution, _polish_minlike, _subset_candidates, _xlogy2

_LOG2E = 1.0 / math.log(2.0)


def _sieve_prime_powers(limit: int = 1024) -> frozenset:
    flags = [True] * (limit + 1)
    flags[0] = flags[1] = False
    for p in range(2, int(limit**0.5) + 1):
        if flags[p]:
            for m in range(p * p, limit + 1, p):
                flags[m] = False
    powers = set()
    for p in range(2, limit + 1):
        if flags[p]:
            v = p
            while v <= limit:
                powers.add(v)
                v *= p
    return frozenset(powers)


_PRIME_POWERS = _sieve_prime_powers()


def is_prime_power(q: int) -> bool:
    return q in _PRIME_POWERS


@dataclass(frozen=True)
class DetectingSets:
    """Input symbols whose confusion graph is edgeless.

    Sending a symbol from ``d1`` lets terminal 1 recover the other side's
    letter exactly; ``d2`` is the mirror image.
    """

    d1: tuple[int, ...]
    d2: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "d1", tuple(sorted(set(self.d1))))
        object.__setattr__(self, "d2", tuple(sorted(set(self.d2))))

    @property
    def tau1(self) -> int:
        return len(self.d1)

    @property
    def tau2(self) -> int:
        return len(self.d2)


def detecting_sets(fam: ConfusionFamily) -> DetectingSets:
    d1 = tuple(i for i, gr in enumerate(fam.g) if gr.is_empty())
    d2 = tuple(j for j, gr in enumerate(fam.h) if gr.is_empty())
    return DetectingSets(d1, d2)


@dataclass(frozen=True)
class InnerPoint:
    """One achievable rate pair, in bits per channel use.

    Negative formula values are clamped to zero: a codebook can always be
    shrunk to a single word, and dropping words never breaks unique
    decodability.
    """

    r1: float
    r2: float
    method: str
    parameters: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "r1", max(0.0, float(self.r1)))
        object.__setattr__(self, "r2", max(0.0, float(self.r2)))


def _confusable_forms(fam: ConfusionFamily):
    """Stacked adjacency-or-equal quadratic forms of both graph sides."""
    ah = np.stack(
        [np.asarray(gr.adjacency_matrix(), dtype=float) + np.eye(fam.m1) for gr in fam.h]
    )
    ag = np.stack(
        [np.asarray(gr.adjacency_matrix(), dtype=float) + np.eye(fam.m2) for gr in fam.g]
    )
    return ah, ag


def _rc_sums(P1, P2, ah, ag):
    quad1 = np.einsum("bi,xij,bj->bx", P1, ah, P1)
    quad2 = np.einsum("bi,xij,bj->bx", P2, ag, P2)
    s1 = np.sum(P2 * quad1, axis=1)
    s2 = np.sum(P1 * quad2, axis=1)
    return s1, s2, quad1, quad2


def _rc_value(P1, P2, w1, w2, ah, ag):
    s1, s2, _, _ = _rc_sums(P1, P2, ah, ag)
    return -0.5 * (w1 * np.log2(s1) + w2 * np.log2(s2))


def _rc_grads(P1, P2, w1, w2, ah, ag):
    s1, s2, quad1, quad2 = _rc_sums(P1, P2, ah, ag)
    m1p1 = np.einsum("bx,xij,bj->bi", P2, ah, P1)
    m2p2 = np.einsum("bx,xij,bj->bi", P1, ag, P2)
    g1 = -w1 * _LOG2E * m1p1 / s1[:, None] - 0.5 * w2 * _LOG2E * quad2 / s2[:, None]
    g2 = -0.5 * w1 * _LOG2E * quad1 / s1[:, None] - w2 * _LOG2E * m2p2 / s2[:, None]
    return g1, g2


def random_coding_point(fam: ConfusionFamily, d: ProductDistribution) -> InnerPoint:
    """Rates of the expurgated random code at input distribution ``d``.

    Each direction pays -1/2 log of the collision-or-confusion probability
    of two independent draws, so even an edgeless side tops out at half its
    log-alphabet.
    """
    p1, p2 = d.arrays()
    if p1.size != fam.m1 or p2.size != fam.m2:
        raise ValueError("distribution sizes do not match the family")
    ah, ag = _confusable_forms(fam)
    s1, s2, _, _ = _rc_sums(p1[None, :], p2[None, :], ah, ag)
    r1 = -0.5 * math.log2(float(s1[0]))
    r2 = -0.5 * math.log2(float(s2[0]))
    return InnerPoint(r1, r2, "random-coding", {"p1": p1.tolist(), "p2": p2.tolist()})


_RC_EFFORT = {
    "search": dict(starts=8, iters=120),
    "fast": dict(starts=16, iters=200),
    "full": dict(starts=64, iters=400),
}


def _ascend_rc(P1, P2, w1, w2, ah, ag, iters):
    steps = np.full(P1.shape[0], 0.25)
    fcur = _rc_value(P1, P2, w1, w2, ah, ag)
    best1, best2, fbest = P1.copy(), P2.copy(), fcur.copy()
    for _ in range(iters):
        g1, g2 = _rc_grads(P1, P2, w1, w2, ah, ag)
        done = np.zeros(P1.shape[0], dtype=bool)
        trial = steps.copy()
        n1, n2, nf = P1.copy(), P2.copy(), fcur.copy()
        for _ in range(6):
            c1 = project_simplex_rows(P1 + trial[:, None] * g1)
            c2 = project_simplex_rows(P2 + trial[:, None] * g2)
            fc = _rc_value(c1, c2, w1, w2, ah, ag)
            ok = ~done & (fc >= fcur - 1e-15)
            n1[ok], n2[ok], nf[ok] = c1[ok], c2[ok], fc[ok]
            done |= ok
            if done.all():
                break
            trial = np.where(done, trial, trial * 0.4)
        steps = np.where(done, np.minimum(steps * 1.5, 1e4), np.maximum(trial, 1e-8))
        P1, P2, fcur = n1, n2, nf
        gain = nf > fbest
        best1[gain], best2[gain], fbest[gain] = n1[gain], n2[gain], nf[gain]
    return best1, best2, fbest


def _simplex_residual(p, g):
    """First-order stationarity gap of maximizing on the simplex."""
    pivot = float(g @ p)
    rise = max(0.0, float(np.max(g) - pivot))
    slack = float(np.max(p * np.maximum(pivot - g, 0.0)))
    return max(rise, slack)


def max_random_coding(
    fam: ConfusionFamily,
    lam: float | None = None,
    seed: int = 0,
    effort: str = "full",
) -> InnerPoint:
    """Best random-coding point over product input distributions.

    ``lam=None`` maximizes the sum rate; otherwise the lam-weighted rate.
    The landscape is not concave, so this is multistart ascent plus exact
    probes of every uniform-on-subset product, with the best point polished.
    """
    if effort not in _RC_EFFORT:
        raise ValueError(f"unknown effort {effort!r}")
    w1, w2 = (1.0, 1.0) if lam is None else (float(lam), 1.0 - float(lam))
    if lam is not None and not 0.0 <= lam <= 1.0:
        raise ValueError("lambda must lie in [0, 1]")
    ah, ag = _confusable_forms(fam)
    cfg = _RC_EFFORT[effort]
    P1 = simplex_start_pool(fam.m1, cfg["starts"], seed=seed)
    P2 = simplex_start_pool(fam.m2, cfg["starts"], seed=seed + 1)
    sub1, sub2 = _subset_candidates(fam.m1, fam.m2)
    if sub1 is not None:
        A = np.repeat(sub1, sub2.shape[0], axis=0)
        B = np.tile(sub2, (sub1.shape[0], 1))
        P1 = np.vstack([P1, A])
        P2 = np.vstack([P2, B])
    b1, b2, fb = _ascend_rc(P1, P2, w1, w2, ah, ag, cfg["iters"])
    top = int(np.argmax(fb))
    p1, p2 = b1[top], b2[top]

    def score(a, b):
        return float(_rc_value(a[None, :], b[None, :], w1, w2, ah, ag)[0])

    p1, p2, value = _polish_minlike(p1, p2, score)
    g1, g2 = _rc_grads(p1[None, :], p2[None, :], w1, w2, ah, ag)
    residual = max(_simplex_residual(p1, g1[0]), _simplex_residual(p2, g2[0]))
    s1, s2, _, _ = _rc_sums(p1[None, :], p2[None, :], ah, ag)
    point = random_coding_point(fam, ProductDistribution(tuple(p1), tuple(p2)))
    params = dict(point.parameters)
    params.update(
        {
            "lambda": lam,
            "weighted_value": value,
            "residual": residual,
            "converged": residual <= 1e-6,
        }
    )
    return InnerPoint(point.r1, point.r2, "random-coding", params)


def _entropy2(x: float) -> float:
    if x <= 0.0 or x >= 1.0:
        return 0.0
    return -x * math.log2(x) - (1.0 - x) * math.log2(1.0 - x)


def _best_balance(weight: float, q: int, tau: int, lin: float):
    """Maximize weight*(h(a) + a log tau + (1-a) log(q-tau)) + lin*a.

    Zero-count edges pin ``a`` to the boundary; the log of a zero count then
    carries zero weight by the limit convention.  A boundary stays feasible
    only while its own count is positive: a = 1 needs tau >= 1 and a = 0
    needs tau < q, even when weight is 0, since an empty detector or coset
    family leaves nothing to build from.
    """
    if weight <= 0.0:
        if tau >= q:
            return 1.0, lin
        if tau <= 0:
            return 0.0, 0.0
        a = 1.0 if lin >= 0.0 else 0.0
        return a, lin * a
    if tau <= 0:
        return 0.0, weight * math.log2(q)
    if tau >= q:
        return 1.0, weight * math.log2(q) + lin
    s = math.log2(tau) - math.log2(q - tau) + lin / weight
    if s >= 50.0:
        a = 1.0
    elif s <= -50.0:
        a = 0.0
    else:
        a = 1.0 / (1.0 + 2.0**-s)
    grid = np.linspace(0.0, 1.0, 2049)
    vals = (
        weight
        * (
            -_xlogy2(grid, grid)
            - _xlogy2(1 - grid, 1 - grid)
            + grid * math.log2(tau)
            + (1 - grid) * math.log2(q - tau)
        )
        + lin * grid
    )
    gtop = int(np.argmax(vals))

    def val(x):
        return weight * (
            _entropy2(x) + x * math.log2(tau) + (1 - x) * math.log2(q - tau)
        ) + lin * x

    if vals[gtop] > val(a):
        a = float(grid[gtop])
    return a, val(a)


def _direction_rate(balance, q_own, tau_own, other_balance, q_other):
    value = _entropy2(balance)
    if balance > 0.0:
        value += balance * math.log2(tau_own) if tau_own > 0 else -math.inf
    if balance < 1.0:
        rest = q_own - tau_own
        value += (1.0 - balance) * math.log2(rest) if rest > 0 else -math.inf
    value -= (1.0 - other_balance) * math.log2(q_other)
    return value


def _linear_value(lam: float, q1: int, q2: int, tau1: int, tau2: int):
    """Core of the linear-code bound; tolerates degenerate alphabet size 1.

    The first terminal's codebook consists of detecting vectors over its
    own alphabet (q1, tau1) whose detecting positions track the opposite
    code's dimension fraction alpha, thinned by pigeonhole over the
    q1^(1-beta) cosets; the second terminal mirrors this.
    """
    alpha, f1 = _best_balance(lam, q1, tau1, (1.0 - lam) * math.log2(q2))
    beta, f2 = _best_balance(1.0 - lam, q2, tau2, lam * math.log2(q1))
    value = f1 + f2 - lam * math.log2(q1) - (1.0 - lam) * math.log2(q2)
    r1 = _direction_rate(alpha, q1, tau1, beta, q1)
    r2 = _direction_rate(beta, q2, tau2, alpha, q2)
    return value, (alpha, beta), (r1, r2)


def linear_code_L(lam: float, q1: int, q2: int, tau1: int, tau2: int):
    """Best lam-weighted linear-code rate and its maximizing balances.

    The two balance parameters decouple: each maximizes a binary-entropy
    term plus a linear coupling from the opposite alphabet's size, so the
    optimum is closed-form with a dense grid as a safety net.
    """
    if not 0.0 <= lam <= 1.0:
        raise ValueError("lambda must lie in [0, 1]")
    for q in (q1, q2):
        if q not in _PRIME_POWERS:
            raise ValueError(f"{q} is not a supported prime power")
    for tau, q in ((tau1, q1), (tau2, q2)):
        if not 0 <= tau <= q:
            raise ValueError("detecting counts must lie within the alphabets")
    value, balances, _ = _linear_value(lam, q1, q2, tau1, tau2)
    return value, balances


def _edgeless_masks(graphs, nverts):
    """Per vertex subset, the bitmask of graphs edgeless inside it."""
    table = [0] * (1 << nverts)
    for mask in range(1 << nverts):
        bits = [v for v in range(nverts) if mask >> v & 1]
        for gi, gr in enumerate(graphs):
            if all((gr.rows[v] & mask) == 0 for v in bits):
                table[mask] |= 1 << gi
    return table


def best_sub_alphabet(fam: ConfusionFamily, lam: float = 0.5) -> InnerPoint:
    """Best linear-code point over all prime-power sub-alphabet pairs.

    Restricting the alphabets can create detecting symbols that the full
    family lacks, so the search recomputes detecting sets per restriction.
    Single-symbol sides are allowed and contribute rate zero on their own
    direction.
    """
    if fam.m1 > 10 or fam.m2 > 10:
        raise ValueError("sub-alphabet search supports alphabets up to 10")
    if not 0.0 <= lam <= 1.0:
        raise ValueError("lambda must lie in [0, 1]")
    sizes_ok = _PRIME_POWERS | {1}
    masks1 = [
        m for m in range(1, 1 << fam.m1) if m.bit_count() in sizes_ok
    ]
    masks2 = [
        m for m in range(1, 1 << fam.m2) if m.bit_count() in sizes_ok
    ]
    masks1.sort(key=lambda m: (m.bit_count(), m))
    masks2.sort(key=lambda m: (m.bit_count(), m))
    eg = _edgeless_masks(fam.g, fam.m2)
    eh = _edgeless_masks(fam.h, fam.m1)
    cache: dict = {}
    best = None
    ties: list = []
    for m1 in masks1:
        q1 = m1.bit_count()
        for m2 in masks2:
            q2 = m2.bit_count()
            tau1 = (eg[m2] & m1).bit_count()
            tau2 = (eh[m1] & m2).bit_count()
            key = (q1, q2, tau1, tau2)
            got = cache.get(key)
            if got is None:
                got = cache[key] = _linear_value(lam, q1, q2, tau1, tau2)
            value = got[0]
            if best is None or value > best[0] + 1e-9:
                best = (value, m1, m2, got)
                ties = []
            elif abs(value - best[0]) <= 1e-9 and len(ties) < 8:
                ties.append((m1, m2))
    value, m1, m2, (_, (alpha, beta), (r1, r2)) = best
    sub1 = tuple(v for v in range(fam.m1) if m1 >> v & 1)
    sub2 = tuple(v for v in range(fam.m2) if m2 >> v & 1)
    d1 = tuple(v for v in sub1 if eg[m2] >> v & 1)
    d2 = tuple(v for v in sub2 if eh[m1] >> v & 1)
    params = {
        "x1_sub": sub1,
        "x2_sub": sub2,
        "q": (len(sub1), len(sub2)),
        "tau": (len(d1), len(d2)),
        "d1": d1,
        "d2": d2,
        "alpha": alpha,
        "beta": beta,
        "lambda": lam,
        "value": value,
        "ties": [
            (
                tuple(v for v in range(fam.m1) if a >> v & 1),
                tuple(v for v in range(fam.m2) if b >> v & 1),
            )
            for a, b in ties
        ],
    }
    return InnerPoint(r1, r2, "linear-codes", params)


def restricted_family(fam: ConfusionFamily, sub1, sub2) -> ConfusionFamily:
    """Induced family on sub-alphabets, keeping the given symbol order."""
    sub1 = tuple(sub1)
    sub2 = tuple(sub2)
    g = tuple(induced_subgraph(fam.g[i], sub2) for i in sub1)
    h = tuple(induced_subgraph(fam.h[j], sub1) for j in sub2)
    return ConfusionFamily(
        g,
        h,
        tuple(fam.x1_labels[i] for i in sub1),
        tuple(fam.x2_labels[j] for j in sub2),
    )


def rate_hull(points) -> list[tuple[float, float]]:
    """Time-sharing hull of rate pairs, closed down to the axes."""
    pts = {(0.0, 0.0)}
    for p in points:
        r1, r2 = (p.r1, p.r2) if isinstance(p, InnerPoint) else (p[0], p[1])
        pts.update({(r1, r2), (r1, 0.0), (0.0, r2)})
    pts = sorted(pts)
    if len(pts) == 1:
        return [pts[0]]

    def cross(o, a, b):
        return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])

    lower: list = []
    for p in pts:
        while len(lower) >= 2 and cross(lower[-2], lower[-1], p) <= 0:
            lower.pop()
        lower.append(p)
    upper: list = []
    for p in reversed(pts):
        while len(upper) >= 2 and cross(upper[-2], upper[-1], p) <= 0:
            upper.pop()
        upper.append(p)
    return lower[:-1] + upper[:-1]
