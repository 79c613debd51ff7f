"""Outer bounds on the weighted sum rate lambda*R1 + (1-lambda)*R2.

Two ingredients are maximized over product input distributions: the
weighted conditional mutual information (the vanishing-error region), and
the negative log of the largest dual-clique-pair mass (the combinatorial
bound).  The min-of-maxima and the max-of-min variants are both provided,
along with minimization over equivalent channels sharing the adjacency
structure.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .channel import (
    Channel,
    ConfusionFamily,
    canonical_channel,
    derive_confusion,
    marginal_y1,
    marginal_y2,
)
from .graphs import _maximal_cliques, _bits
from .numerics import (
    DEFAULT_SEED,
    maximize_concave_on_simplex,
    project_simplex,
    project_simplex_rows,
    simplex_start_pool,
)
from .oneshot import enumerate_dual_clique_pairs

_LOG2E = 1.0 / np.log(2.0)
_BIG = 1e6


@dataclass(frozen=True)
class ProductDistribution:
    """A product input distribution (p1 on X1, p2 on X2)."""

    p1: tuple[float, ...]
    p2: tuple[float, ...]

    def __post_init__(self):
        for name in ("p1", "p2"):
            v = np.asarray(getattr(self, name), dtype=float)
            if v.ndim != 1 or v.size == 0:
                raise ValueError(f"{name} must be a nonempty vector")
            if np.any(v < -1e-9) or abs(v.sum() - 1.0) > 1e-9:
                raise ValueError(f"{name} is not a probability vector")
            object.__setattr__(self, name, tuple(float(x) for x in v))

    def arrays(self):
        return np.asarray(self.p1), np.asarray(self.p2)


@dataclass
class LambdaBound:
    """A certified-direction bound lambda*R1 + (1-lambda)*R2 <= value."""

    lam: float
    method: str
    value: float
    d: ProductDistribution | None = None
    residual: float = float("nan")
    meta: dict = field(default_factory=dict)


def _xlogy2(x, y):
    out = np.zeros_like(x, dtype=float)
    mask = x > 0
    out[mask] = x[mask] * np.log2(y[mask])
    return out


def _batch_eps(P1, P2, w1, w2, lam, want_grads=False):
    """Weighted conditional MI for batches of product distributions.

    P1: (K, m1), P2: (K, m2); w1 = P(y1|x1,x2) of shape (m1, m2, ny1),
    w2 = P(y2|x1,x2) of shape (m1, m2, ny2).  Returns eps (K,) and, when
    requested, exact partial derivatives of the natural extension of the
    objective to unnormalized nonnegative vectors.
    """
    m1, m2 = w1.shape[0], w1.shape[1]
    K = P1.shape[0]
    i12 = np.zeros(K)
    i21 = np.zeros(K)
    d12 = np.zeros((K, m1))
    d21 = np.zeros((K, m2))
    per_x1 = np.zeros((K, m1))
    per_x2 = np.zeros((K, m2))
    with np.errstate(divide="ignore", invalid="ignore"):
        for x2 in range(m2):
            w = w2[:, x2, :]  # (m1, ny2): X1 -> Y2 at fixed x2
            mix = np.maximum(P1 @ w, 1e-300)
            lw = np.where(w > 0, np.log2(np.maximum(w, 1e-300)), 0.0)
            kl = (w[None, :, :] * (lw[None, :, :] - np.log2(mix)[:, None, :])).sum(axis=2)
            ia = (P1 * kl).sum(axis=1)
            i12 += P2[:, x2] * ia
            per_x2[:, x2] = ia
            if want_grads:
                d12 += P2[:, x2][:, None] * kl
        for x1 in range(m1):
            w = w1[x1]  # (m2, ny1): X2 -> Y1 at fixed x1
            mix = np.maximum(P2 @ w, 1e-300)
            lw = np.where(w > 0, np.log2(np.maximum(w, 1e-300)), 0.0)
            kl = (w[None, :, :] * (lw[None, :, :] - np.log2(mix)[:, None, :])).sum(axis=2)
            ib = (P2 * kl).sum(axis=1)
            i21 += P1[:, x1] * ib
            per_x1[:, x1] = ib
            if want_grads:
                d21 += P1[:, x1][:, None] * kl
    eps = lam * i12 + (1.0 - lam) * i21
    if not want_grads:
        return eps, None, None
    g1 = lam * (d12 - _LOG2E * P2.sum(axis=1)[:, None]) + (1.0 - lam) * per_x1
    g2 = (1.0 - lam) * (d21 - _LOG2E * P1.sum(axis=1)[:, None]) + lam * per_x2
    return eps, g1, g2


@lru_cache(maxsize=64)
def _pair_masks(fam: ConfusionFamily):
    pairs = enumerate_dual_clique_pairs(fam)
    sm = np.zeros((len(pairs), fam.m1))
    tm = np.zeros((len(pairs), fam.m2))
    for k, p in enumerate(pairs):
        for s in p.s:
            sm[k, s] = 1.0
        for t in p.t:
            tm[k, t] = 1.0
    return pairs, sm, tm


def _batch_nll(P1, P2, sm, tm, lam, want_grads=False, tie_tol=1e-10):
    """-log2 of the largest pair mass, batched, with averaged supergradients.

    A pair only constrains the bound while both its masses are positive
    (the zero-mass power is the limit from positive exponents, which is
    what the disjointness step of the converse actually uses), so pairs
    with an exactly-zero mass are dropped from the min.
    """
    U = P1 @ sm.T
    V = P2 @ tm.T
    with np.errstate(divide="ignore"):
        lu = np.log2(np.maximum(U, 1e-300))
        lv = np.log2(np.maximum(V, 1e-300))
    vals = np.zeros_like(U)
    if lam > 0:
        vals -= lam * lu
    if lam < 1:
        vals -= (1.0 - lam) * lv
    vals = np.where((U > 0) & (V > 0), np.minimum(vals, _BIG), _BIG)
    F = vals.min(axis=1)
    if not want_grads:
        return F, None, None
    active = (vals <= F[:, None] + tie_tol).astype(float)
    active /= active.sum(axis=1, keepdims=True)
    c1 = -(lam * _LOG2E) * active / np.maximum(U, 1e-300) if lam > 0 else np.zeros_like(U)
    c2 = -((1.0 - lam) * _LOG2E) * active / np.maximum(V, 1e-300) if lam < 1 else np.zeros_like(V)
    return F, c1 @ sm, c2 @ tm


def epsilon_lambda(q: Channel, d: ProductDistribution, lam: float) -> float:
    """lambda*I(X1;Y2|X2) + (1-lambda)*I(X2;Y1|X1) in bits."""
    _check_lambda(lam)
    p1, p2 = d.arrays()
    eps, _, _ = _batch_eps(p1[None, :], p2[None, :], marginal_y1(q), marginal_y2(q), lam)
    return float(eps[0])


def epsilon_lambda_gradients(q: Channel, d: ProductDistribution, lam: float):
    """Exact partials of epsilon_lambda in (p1, p2), extended off-simplex."""
    _check_lambda(lam)
    p1, p2 = d.arrays()
    _, g1, g2 = _batch_eps(
        p1[None, :], p2[None, :], marginal_y1(q), marginal_y2(q), lam, want_grads=True
    )
    return g1[0], g2[0]


def l_lambda(fam: ConfusionFamily, d: ProductDistribution, lam: float) -> float:
    """The largest lambda-weighted geometric pair mass
    max over maximal dual clique pairs of p1(S)^lambda * p2(T)^(1-lambda).

    Zero-mass powers are taken as limits from exponents inside (0, 1), so a
    pair with either mass zero contributes 0 even at the endpoints.
    """
    _check_lambda(lam)
    _, sm, tm = _pair_masks(fam)
    p1, p2 = d.arrays()
    u = sm @ p1
    v = tm @ p2
    both = (u > 0) & (v > 0)
    terms = np.where(both, np.maximum(u, 1e-300) ** lam * np.maximum(v, 1e-300) ** (1.0 - lam), 0.0)
    return float(terms.max())


def _check_lambda(lam):
    if not (0.0 <= lam <= 1.0):
        raise ValueError("lambda must lie in [0, 1]")


def _subset_candidates(m1, m2, cap=6):
    """Products of uniform-on-subset distributions (exact corner probes)."""
    if m1 > cap or m2 > cap:
        return None, None
    def side(m):
        rows = []
        for mask in range(1, 1 << m):
            v = np.zeros(m)
            for b in _bits(mask):
                v[b] = 1.0
            rows.append(v / v.sum())
        return np.asarray(rows)
    return side(m1), side(m2)


def _start_batch(m1, m2, starts, seed):
    P1 = simplex_start_pool(m1, starts, seed=seed)
    P2 = simplex_start_pool(m2, starts, seed=seed + 1)
    return P1, P2


_EFFORT = {
    "search": dict(starts=8, sub_iters=120, eps_rounds=20, polish=False),
    "fast": dict(starts=16, sub_iters=200, eps_rounds=30, polish=False),
    "full": dict(starts=64, sub_iters=600, eps_rounds=80, polish=True),
}


def max_epsilon(q: Channel, lam: float, seed: int = DEFAULT_SEED, effort: str = "full"):
    """Maximize epsilon_lambda over product distributions.

    The objective is concave in each block with the other fixed, so batched
    alternating projected gradient ascent over a deterministic start pool
    converges to block-optimal points; the best is polished to a small
    gradient-mapping residual.  Returns (value, ProductDistribution, residual).
    """
    _check_lambda(lam)
    cfg = _EFFORT[effort]
    w1, w2 = marginal_y1(q), marginal_y2(q)
    m1, m2 = q.m1, q.m2
    P1, P2 = _start_batch(m1, m2, cfg["starts"], seed)
    steps = np.full(P1.shape[0], 0.5)
    fcur, _, _ = _batch_eps(P1, P2, w1, w2, lam)
    for _ in range(cfg["eps_rounds"]):
        for block in (0, 1):
            _, g1, g2 = _batch_eps(P1, P2, w1, w2, lam, want_grads=True)
            g = g1 if block == 0 else g2
            base = P1 if block == 0 else P2
            trial_steps = steps.copy()
            for _ in range(6):
                cand = project_simplex_rows(base + trial_steps[:, None] * g)
                if block == 0:
                    fc, _, _ = _batch_eps(cand, P2, w1, w2, lam)
                else:
                    fc, _, _ = _batch_eps(P1, cand, w1, w2, lam)
                better = fc >= fcur - 1e-15
                base = np.where(better[:, None], cand, base)
                fcur = np.where(better, fc, fcur)
                trial_steps = np.where(better, trial_steps * 1.5, trial_steps * 0.4)
            steps = np.clip(trial_steps, 1e-8, 1e4)
            if block == 0:
                P1 = base
            else:
                P2 = base
    k = int(np.argmax(fcur))
    p1, p2 = P1[k], P2[k]
    residual = float("nan")
    if cfg["polish"]:
        p1, p2, residual = _polish_eps(p1, p2, w1, w2, lam)
    val, _, _ = _batch_eps(p1[None, :], p2[None, :], w1, w2, lam)
    d = ProductDistribution(p1=tuple(p1), p2=tuple(p2))
    return float(val[0]), d, residual


def _polish_eps(p1, p2, w1, w2, lam, rounds=40):
    residual = float("inf")
    prev = -np.inf
    for _ in range(rounds):
        r1 = maximize_concave_on_simplex(
            lambda v: float(_batch_eps(v[None, :], p2[None, :], w1, w2, lam)[0][0]),
            lambda v: _batch_eps(v[None, :], p2[None, :], w1, w2, lam, want_grads=True)[1][0],
            p1,
        )
        p1 = r1.point
        r2 = maximize_concave_on_simplex(
            lambda v: float(_batch_eps(p1[None, :], v[None, :], w1, w2, lam)[0][0]),
            lambda v: _batch_eps(p1[None, :], v[None, :], w1, w2, lam, want_grads=True)[2][0],
            p2,
        )
        p2 = r2.point
        residual = max(r1.residual, r2.residual)
        if r2.value <= prev + 1e-13:
            break
        prev = r2.value
    return p1, p2, residual


def max_neglog_l(fam: ConfusionFamily, lam: float, seed: int = DEFAULT_SEED, effort: str = "full"):
    """Maximize -log2 l(lambda) over product distributions.

    Piecewise smooth (min over pairs), so this runs projected supergradient
    ascent with tie-averaging from a deterministic pool, keeps the best
    visited point, and probes all uniform-on-subset products exactly on
    small alphabets.  Returns (value, ProductDistribution, residual).
    """
    _check_lambda(lam)
    cfg = _EFFORT[effort]
    _, sm, tm = _pair_masks(fam)
    m1, m2 = fam.m1, fam.m2
    P1, P2 = _start_batch(m1, m2, cfg["starts"], seed + 2)
    best_val, best_pt = -np.inf, (P1[0], P2[0])

    c1, c2 = _subset_candidates(m1, m2)
    if c1 is not None:
        # evaluate the full grid of subset-uniform products exactly
        vals = np.zeros((len(c1), len(c2)))
        u = c1 @ sm.T
        v = c2 @ tm.T
        with np.errstate(divide="ignore"):
            lu = np.log2(np.maximum(u, 1e-300))
            lv = np.log2(np.maximum(v, 1e-300))
        for k in range(sm.shape[0]):
            term = -lam * lu[:, k][:, None] - (1.0 - lam) * lv[:, k][None, :]
            both = (u[:, k] > 0)[:, None] & (v[:, k] > 0)[None, :]
            term = np.where(both, np.minimum(term, _BIG), _BIG)
            vals = term if k == 0 else np.minimum(vals, term)
        i, j = np.unravel_index(np.argmax(vals), vals.shape)
        best_val = float(min(vals[i, j], _BIG))
        best_pt = (c1[i], c2[j])

    F, _, _ = _batch_nll(P1, P2, sm, tm, lam)
    for it in range(1, cfg["sub_iters"] + 1):
        F, g1, g2 = _batch_nll(P1, P2, sm, tm, lam, want_grads=True)
        k = int(np.argmax(F))
        if F[k] > best_val:
            best_val, best_pt = float(F[k]), (P1[k].copy(), P2[k].copy())
        step = 0.5 / np.sqrt(it)
        n1 = np.maximum(np.linalg.norm(g1, axis=1, keepdims=True), 1e-12)
        n2 = np.maximum(np.linalg.norm(g2, axis=1, keepdims=True), 1e-12)
        P1 = project_simplex_rows(P1 + step * g1 / n1)
        P2 = project_simplex_rows(P2 + step * g2 / n2)
    p1, p2 = best_pt
    if cfg["polish"]:
        p1, p2, best_val = _polish_minlike(
            p1, p2, lambda a, b: float(_batch_nll(a[None, :], b[None, :], sm, tm, lam)[0][0])
        )
    d = ProductDistribution(p1=tuple(p1), p2=tuple(p2))
    return float(best_val), d, float("nan")


def _polish_minlike(p1, p2, f, iters=400):
    """Derivative-free descent polish for piecewise-smooth concave-like
    objectives: coordinate exchange moves with shrinking magnitude."""
    cur = f(p1, p2)
    scale = 0.25
    while scale > 1e-7:
        improved = False
        for vec_idx, vec in ((0, p1), (1, p2)):
            m = vec.size
            for i in range(m):
                for j in range(m):
                    if i == j:
                        continue
                    move = min(scale, vec[j])
                    if move <= 0:
                        continue
                    cand = vec.copy()
                    cand[j] -= move
                    cand[i] += move
                    val = f(cand, p2) if vec_idx == 0 else f(p1, cand)
                    if val > cur + 1e-14:
                        cur = val
                        if vec_idx == 0:
                            p1 = cand
                            vec = cand
                        else:
                            p2 = cand
                            vec = cand
                        improved = True
        if not improved:
            scale *= 0.5
    return p1, p2, cur


def _suite_cache_key(q, fam, lam, seed, effort):
    return (q.p.tobytes(), q.p.shape, fam, round(lam, 12), seed, effort)


_SUITE_CACHE: dict = {}


def _bound_suite(q: Channel, fam: ConfusionFamily, lam: float, seed: int, effort: str):
    """Compute the min-max and max-min bounds consistently.

    The max-min argmax is fed back into both component maxima so that the
    reported max-min never exceeds the reported min-max (the true relation
    between the two).
    """
    key = _suite_cache_key(q, fam, lam, seed, effort)
    if key in _SUITE_CACHE:
        return _SUITE_CACHE[key]
    cfg = _EFFORT[effort]
    w1, w2 = marginal_y1(q), marginal_y2(q)
    _, sm, tm = _pair_masks(fam)
    m1, m2 = q.m1, q.m2

    eps_val, eps_d, eps_res = max_epsilon(q, lam, seed=seed, effort=effort)
    nll_val, nll_d, _ = max_neglog_l(fam, lam, seed=seed, effort=effort)

    def F_single(a, b):
        e, _, _ = _batch_eps(a[None, :], b[None, :], w1, w2, lam)
        n, _, _ = _batch_nll(a[None, :], b[None, :], sm, tm, lam)
        return float(min(e[0], n[0]))

    # subgradient ascent on min(eps, nll) from the pooled starts plus the
    # component argmaxes
    P1, P2 = _start_batch(m1, m2, cfg["starts"], seed + 7)
    extra1 = np.asarray([eps_d.arrays()[0], nll_d.arrays()[0]])
    extra2 = np.asarray([eps_d.arrays()[1], nll_d.arrays()[1]])
    P1 = np.vstack([P1, extra1])
    P2 = np.vstack([P2, extra2])
    best_val, best_pt = -np.inf, (P1[0].copy(), P2[0].copy())
    for it in range(1, cfg["sub_iters"] + 1):
        e, eg1, eg2 = _batch_eps(P1, P2, w1, w2, lam, want_grads=True)
        n, ng1, ng2 = _batch_nll(P1, P2, sm, tm, lam, want_grads=True)
        F = np.minimum(e, n)
        k = int(np.argmax(F))
        if F[k] > best_val:
            best_val, best_pt = float(F[k]), (P1[k].copy(), P2[k].copy())
        we = np.where(e < n - 1e-10, 1.0, np.where(n < e - 1e-10, 0.0, 0.5))[:, None]
        g1 = we * eg1 + (1.0 - we) * ng1
        g2 = we * eg2 + (1.0 - we) * ng2
        step = 0.5 / np.sqrt(it)
        n1 = np.maximum(np.linalg.norm(g1, axis=1, keepdims=True), 1e-12)
        n2 = np.maximum(np.linalg.norm(g2, axis=1, keepdims=True), 1e-12)
        P1 = project_simplex_rows(P1 + step * g1 / n1)
        P2 = project_simplex_rows(P2 + step * g2 / n2)
    p1, p2 = best_pt
    if cfg["polish"]:
        p1, p2, best_val = _polish_minlike(p1, p2, F_single)
    maxmin_val = best_val
    maxmin_d = ProductDistribution(p1=tuple(p1), p2=tuple(p2))

    # reconcile: lift the component maxima by the max-min argmax
    e_at, _, _ = _batch_eps(p1[None, :], p2[None, :], w1, w2, lam)
    n_at, _, _ = _batch_nll(p1[None, :], p2[None, :], sm, tm, lam)
    if float(e_at[0]) > eps_val:
        eps_val, eps_d = float(e_at[0]), maxmin_d
    if float(n_at[0]) > nll_val:
        nll_val, nll_d = float(n_at[0]), maxmin_d
    minmax_val = min(eps_val, nll_val)
    minmax_d = eps_d if eps_val <= nll_val else nll_d

    out = {
        "eps": (eps_val, eps_d, eps_res),
        "nll": (nll_val, nll_d),
        "minmax": (minmax_val, minmax_d),
        "maxmin": (maxmin_val, maxmin_d),
    }
    if len(_SUITE_CACHE) > 256:
        _SUITE_CACHE.clear()
    _SUITE_CACHE[key] = out
    return out


def minmax_bound(
    q: Channel,
    fam: ConfusionFamily,
    lam: float,
    seed: int = DEFAULT_SEED,
    effort: str = "full",
) -> LambdaBound:
    """min of the two separately maximized ingredients."""
    _check_lambda(lam)
    suite = _bound_suite(q, fam, lam, seed, effort)
    value, d = suite["minmax"]
    eps_val, _, eps_res = suite["eps"]
    return LambdaBound(
        lam=lam,
        method="minmax",
        value=value,
        d=d,
        residual=eps_res,
        meta={"max_epsilon": eps_val, "max_neglog_l": suite["nll"][0]},
    )


def maxmin_bound(
    q: Channel,
    fam: ConfusionFamily,
    lam: float,
    seed: int = DEFAULT_SEED,
    effort: str = "full",
) -> LambdaBound:
    """max over product distributions of min(eps, -log l); never above the
    min-max value by construction."""
    _check_lambda(lam)
    suite = _bound_suite(q, fam, lam, seed, effort)
    value, d = suite["maxmin"]
    return LambdaBound(
        lam=lam,
        method="maxmin",
        value=value,
        d=d,
        residual=float("nan"),
        meta={"minmax": suite["minmax"][0]},
    )


def _oneway_maxmin(g, w, cm, starts=16, iters=200):
    """max over p of min(I(p; w), -log2 largest maximal-clique mass)."""

    def f(p):
        mix = np.maximum(p @ w, 1e-300)
        lw = np.where(w > 0, np.log2(np.maximum(w, 1e-300)), 0.0)
        kl = (w * (lw - np.log2(mix)[None, :])).sum(axis=1)
        mi = float(p @ kl)
        masses = cm @ p
        return min(mi, float(-np.log2(np.maximum(masses.max(), 1e-300))), _BIG)

    best, best_p = -np.inf, None
    for p in simplex_start_pool(g.n, starts, seed=DEFAULT_SEED):
        cur = p.copy()
        for it in range(1, iters + 1):
            val = f(cur)
            if val > best:
                best, best_p = val, cur.copy()
            mix = np.maximum(cur @ w, 1e-300)
            lw = np.where(w > 0, np.log2(np.maximum(w, 1e-300)), 0.0)
            kl = (w * (lw - np.log2(mix)[None, :])).sum(axis=1)
            mi = float(cur @ kl)
            masses = cm @ cur
            k = int(np.argmax(masses))
            nll = float(-np.log2(np.maximum(masses[k], 1e-300)))
            if mi < nll - 1e-10:
                grad = kl - _LOG2E
            elif nll < mi - 1e-10:
                grad = -_LOG2E / max(masses[k], 1e-300) * cm[k]
            else:
                grad = 0.5 * (kl - _LOG2E) - 0.5 * _LOG2E / max(masses[k], 1e-300) * cm[k]
            cur = project_simplex(cur + (0.3 / np.sqrt(it)) * grad)
        val = f(cur)
        if val > best:
            best, best_p = val, cur.copy()
    p, _, best = _polish_minlike(best_p, np.ones(1), lambda a, b: f(a))
    return float(best)


def oneway_lp_bound(g, w) -> float:
    """One-way bound on a single confusion graph g with channel rows w.

    min over same-support channels of the max over input distributions of
    min(I(X;Y), -log2 max over maximal cliques of p(C)).
    """
    w = np.asarray(w, dtype=float)
    if w.ndim != 2 or w.shape[0] != g.n:
        raise ValueError("channel rows must match the graph vertices")
    if np.any(np.abs(w.sum(axis=1) - 1.0) > 1e-9):
        raise ValueError("channel rows must sum to 1")
    cliques = [_bits(m) for m in _maximal_cliques(g.rows, g.n)]
    cm = np.zeros((len(cliques), g.n))
    for k, c in enumerate(cliques):
        for v in c:
            cm[k, v] = 1.0

    support = [np.flatnonzero(w[x] > 0) for x in range(g.n)]
    free = [(x, s.size) for x, s in enumerate(support) if s.size > 1]
    dim = sum(k - 1 for _, k in free)

    def rows_from(z):
        out = np.zeros_like(w)
        pos = 0
        for x, s in enumerate(support):
            if s.size == 1:
                out[x, s[0]] = 1.0
                continue
            raw = np.concatenate([[0.0], z[pos : pos + s.size - 1]])
            pos += s.size - 1
            e = np.exp(raw - raw.max())
            wv = np.maximum(e / e.sum(), 1e-7)
            out[x, s] = wv / wv.sum()
        return out

    value = _oneway_maxmin(g, w, cm)
    if dim == 0:
        return value
    from scipy.optimize import minimize

    res = minimize(
        lambda z: _oneway_maxmin(g, rows_from(z), cm, starts=6, iters=100),
        np.zeros(dim),
        method="Nelder-Mead",
        options={"xatol": 1e-4, "fatol": 1e-7, "maxiter": 80},
    )
    refined = _oneway_maxmin(g, rows_from(res.x), cm)
    return float(min(value, refined))


@dataclass
class FreeMassParameterization:
    """Free conditional-probability weights of the canonical channel form.

    Each (input pair, side) whose symbol lies in two or more maximal cliques
    contributes a free weight vector over those cliques; everything else is
    forced.  Covers the adjacency-preserving product-form channels.
    """

    fam: ConfusionFamily
    g_cliques: list
    g_cover: list
    h_cliques: list
    h_cover: list
    free_slots: list  # (side, i, j, choice_count)

    @staticmethod
    def build(fam: ConfusionFamily) -> "FreeMassParameterization":
        from .channel import _clique_cover_lists

        g_cliques, g_cover = _clique_cover_lists(fam.g)
        h_cliques, h_cover = _clique_cover_lists(fam.h)
        slots = []
        for i in range(fam.m1):
            for j in range(fam.m2):
                k = len(g_cover[i][j])
                if k > 1:
                    slots.append(("y1", i, j, k))
        for j in range(fam.m2):
            for i in range(fam.m1):
                k = len(h_cover[j][i])
                if k > 1:
                    slots.append(("y2", i, j, k))
        return FreeMassParameterization(
            fam=fam,
            g_cliques=g_cliques,
            g_cover=g_cover,
            h_cliques=h_cliques,
            h_cover=h_cover,
            free_slots=slots,
        )

    @property
    def dim(self) -> int:
        return sum(k - 1 for _, _, _, k in self.free_slots)

    def channel(self, z=None, floor=1e-7) -> Channel:
        """Build the channel for raw parameters z (softmax per slot)."""
        fam = self.fam
        ny1 = max(len(c) for c in self.g_cliques)
        ny2 = max(len(c) for c in self.h_cliques)
        weights = {}
        pos = 0
        z = np.zeros(self.dim) if z is None else np.asarray(z, dtype=float)
        for side, i, j, k in self.free_slots:
            raw = np.concatenate([[0.0], z[pos : pos + k - 1]])
            pos += k - 1
            e = np.exp(raw - raw.max())
            wv = e / e.sum()
            wv = np.maximum(wv, floor)
            weights[(side, i, j)] = wv / wv.sum()
        p = np.zeros((fam.m1, fam.m2, ny1, ny2))
        for i in range(fam.m1):
            for j in range(fam.m2):
                ks = self.g_cover[i][j]
                ls = self.h_cover[j][i]
                wg = weights.get(("y1", i, j), np.full(len(ks), 1.0 / len(ks)))
                wh = weights.get(("y2", i, j), np.full(len(ls), 1.0 / len(ls)))
                for a, k in enumerate(ks):
                    for b, l in enumerate(ls):
                        p[i, j, k, l] = wg[a] * wh[b]
        return Channel(p=p, x1_labels=fam.x1_labels, x2_labels=fam.x2_labels)


def minimize_over_q(
    fam: ConfusionFamily,
    bound_op,
    lam: float,
    seed: int = DEFAULT_SEED,
    effort: str = "full",
) -> LambdaBound:
    """Minimize a bound over the adjacency-preserving channels of a family.

    The free conditional masses of the canonical channel form are searched
    with Nelder-Mead (the inner maximization runs at reduced effort during
    the search); the final bound is recomputed at full effort and the
    minimizing channel is checked to still derive the same family.
    """
    from scipy.optimize import minimize

    _check_lambda(lam)
    par = FreeMassParameterization.build(fam)
    if par.dim == 0:
        out = bound_op(par.channel(), fam, lam, seed=seed, effort=effort)
        out.meta["q_parameters"] = []
        return out

    def obj(z):
        q = par.channel(np.atleast_1d(z))
        return bound_op(q, fam, lam, seed=seed, effort="search").value

    if par.dim == 1:
        from scipy.optimize import minimize_scalar

        grid = np.linspace(-6.0, 6.0, 9)
        coarse = [obj(np.array([z])) for z in grid]
        k = int(np.argmin(coarse))
        lo = grid[max(k - 1, 0)]
        hi = grid[min(k + 1, grid.size - 1)]
        res = minimize_scalar(
            lambda z: obj(np.array([z])),
            bounds=(lo, hi),
            method="bounded",
            options={"xatol": 1e-4, "maxiter": 60},
        )
        z_star = np.array([res.x])
    else:
        best = None
        rng = np.random.default_rng(seed)
        for trial in range(2):
            z0 = np.zeros(par.dim) if trial == 0 else rng.normal(scale=1.0, size=par.dim)
            res = minimize(
                obj,
                z0,
                method="Nelder-Mead",
                options={"xatol": 1e-5, "fatol": 1e-9, "maxiter": 200},
            )
            if best is None or res.fun < best.fun:
                best = res
        z_star = best.x
    if par.dim == 1:
        # the valley can be flat at search effort; settle it at full effort
        cands = [z_star + np.array([dz]) for dz in (-0.21, -0.14, -0.07, 0.0, 0.07, 0.14, 0.21)]
        vals = [bound_op(par.channel(z), fam, lam, seed=seed, effort=effort).value for z in cands]
        z_star = cands[int(np.argmin(vals))]
    q_star = par.channel(z_star)
    if derive_confusion(q_star).g != fam.g or derive_confusion(q_star).h != fam.h:
        raise RuntimeError("minimizing channel escaped the adjacency class")
    out = bound_op(q_star, fam, lam, seed=seed, effort=effort)
    out.meta["q_parameters"] = [float(v) for v in np.atleast_1d(z_star)]
    out.meta["q_minimized"] = True
    return out


def assemble_outer_region(
    q: Channel,
    fam: ConfusionFamily,
    lambda_grid,
    methods=("minmax", "maxmin"),
    seed: int = DEFAULT_SEED,
    effort: str = "full",
) -> list[LambdaBound]:
    """One half-plane lambda*R1 + (1-lambda)*R2 <= value per grid point and
    method."""
    ops = {"minmax": minmax_bound, "maxmin": maxmin_bound}
    out = []
    for lam in lambda_grid:
        for method in methods:
            out.append(ops[method](q, fam, float(lam), seed=seed, effort=effort))
    return out


def region_polygon(bounds: list[LambdaBound], rmax: float = 64.0):
    """Clip the nonnegative quadrant by every half-plane; returns polygon
    vertices in counterclockwise order starting at the origin."""
    poly = [(0.0, 0.0), (rmax, 0.0), (rmax, rmax), (0.0, rmax)]
    for b in bounds:
        lam, v = b.lam, b.value
        clipped = []
        n = len(poly)
        for i in range(n):
            ax, ay = poly[i]
            bx, by = poly[(i + 1) % n]
            fa = lam * ax + (1 - lam) * ay - v
            fb = lam * bx + (1 - lam) * by - v
            if fa <= 1e-12:
                clipped.append((ax, ay))
            if (fa < -1e-12 < fb) or (fb < -1e-12 < fa):
                t = fa / (fa - fb)
                clipped.append((ax + t * (bx - ax), ay + t * (by - ay)))
        poly = clipped
        if not poly:
            return []
    out = []
    for x, y in poly:
        if not out or abs(x - out[-1][0]) + abs(y - out[-1][1]) > 1e-9:
            out.append((float(x), float(y)))
    if len(out) > 1 and abs(out[0][0] - out[-1][0]) + abs(out[0][1] - out[-1][1]) <= 1e-9:
        out.pop()
    return out
