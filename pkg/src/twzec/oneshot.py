"""One-shot quantities of a confusion family: dual clique pairs, the
independence product with an exact witness, and the semidefinite
upper-bound machinery for it.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .channel import ConfusionFamily
from .graphs import _bits, _mask, _maximal_cliques, _mis_size_masked
from .numerics import SdpProblem, min_eigenvalue, solve_sdp


@dataclass(frozen=True)
class DualPair:
    """A pair of symbol subsets, one per terminal, sorted ascending."""

    s: tuple[int, ...]
    t: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "s", tuple(sorted(self.s)))
        object.__setattr__(self, "t", tuple(sorted(self.t)))

    @property
    def product(self) -> int:
        return len(self.s) * len(self.t)


def is_dual_clique_pair(fam: ConfusionFamily, pair: DualPair) -> bool:
    for s in pair.s:
        for a_idx, t in enumerate(pair.t):
            for t2 in pair.t[a_idx + 1 :]:
                if not fam.g[s].has_edge(t, t2):
                    return False
    for t in pair.t:
        for a_idx, s in enumerate(pair.s):
            for s2 in pair.s[a_idx + 1 :]:
                if not fam.h[t].has_edge(s, s2):
                    return False
    return True


def is_dual_independent_pair(fam: ConfusionFamily, pair: DualPair) -> bool:
    for s in pair.s:
        for a_idx, t in enumerate(pair.t):
            for t2 in pair.t[a_idx + 1 :]:
                if fam.g[s].has_edge(t, t2):
                    return False
    for t in pair.t:
        for a_idx, s in enumerate(pair.s):
            for s2 in pair.s[a_idx + 1 :]:
                if fam.h[t].has_edge(s, s2):
                    return False
    return True


def enumerate_dual_clique_pairs(fam: ConfusionFamily) -> list[DualPair]:
    """All maximal dual clique pairs (both sides nonempty), sorted.

    A pair (S, T) requires S to be a clique in h[t] for every t in T and T a
    clique in g[s] for every s in S; maximal means no symbol can be added to
    either side.  Enumeration walks every nonempty S, takes the maximal
    cliques of the intersection graph of {g[s]} restricted to the symbols t
    whose h[t] sees S as a clique, and keeps the pairs with unextendable S.
    """
    m1, m2 = fam.m1, fam.m2
    if m1 > 16 or m2 > 16:
        raise ValueError("alphabets limited to 16 symbols")
    full2 = (1 << m2) - 1
    found = set()
    for s_mask in range(1, 1 << m1):
        s_list = _bits(s_mask)
        valid_t = 0
        for t in range(m2):
            rows = fam.h[t].rows
            if all(
                rows[u] >> v & 1 for i, u in enumerate(s_list) for v in s_list[i + 1 :]
            ):
                valid_t |= 1 << t
        if not valid_t:
            continue
        inter = []
        for v in range(m2):
            row = full2 & ~(1 << v)
            for s in s_list:
                row &= fam.g[s].rows[v]
            inter.append(row)
        for t_mask in _maximal_cliques(tuple(inter), m2, within=valid_t):
            t_list = _bits(t_mask)
            extendable = False
            for s2 in range(m1):
                if s_mask >> s2 & 1:
                    continue
                ok = all(fam.h[t].rows[s2] & s_mask == s_mask for t in t_list) and all(
                    fam.g[s2].rows[u] >> v & 1
                    for i, u in enumerate(t_list)
                    for v in t_list[i + 1 :]
                )
                if ok:
                    extendable = True
                    break
            if not extendable:
                found.add((tuple(s_list), tuple(t_list)))
    return sorted(
        (DualPair(s=s, t=t) for s, t in found), key=lambda p: (p.s, p.t)
    )


def _independent_pair_scan(fam: ConfusionFamily):
    """Exact maximum |S||T| over dual independent pairs.

    Scans subsets T of the X2 alphabet with a product bound prune; for each T
    the best S is a maximum independent set of the union of {h[t]} restricted
    to symbols whose g-graph sees T as independent.
    """
    m1, m2 = fam.m1, fam.m2
    best = 0
    for t_mask in range(1, 1 << m2):
        t_list = _bits(t_mask)
        if len(t_list) * m1 <= best:
            continue
        valid_s = 0
        for s in range(m1):
            rows = fam.g[s].rows
            if all(rows[u] & t_mask == 0 for u in t_list):
                valid_s |= 1 << s
        if not valid_s:
            continue
        if len(t_list) * bin(valid_s).count("1") <= best:
            continue
        urows = [0] * m1
        for t in t_list:
            for v in range(m1):
                urows[v] |= fam.h[t].rows[v]
        alpha = _mis_size_masked(tuple(urows), valid_s)
        best = max(best, len(t_list) * alpha)
    return best


def _lex_least_independent_set(rows: tuple[int, ...], allowed: int, k: int):
    """Lexicographically least independent set of size k within a mask."""
    chosen: list[int] = []

    def rec(start_mask: int, need: int) -> bool:
        if need == 0:
            return True
        m = start_mask
        while m:
            v = (m & -m).bit_length() - 1
            m &= m - 1
            rest = start_mask & ~((1 << (v + 1)) - 1) & ~rows[v]
            if _mis_size_masked(rows, rest) >= need - 1:
                chosen.append(v)
                if rec(rest, need - 1):
                    return True
                chosen.pop()
        return False

    if rec(allowed, k):
        return tuple(chosen)
    return None


def independence_product(fam: ConfusionFamily) -> tuple[int, DualPair]:
    """The largest |S||T| over dual independent pairs, with the
    lexicographically least witness (sorted S first, then sorted T)."""
    m1, m2 = fam.m1, fam.m2
    if m1 > 16 or m2 > 16:
        raise ValueError("alphabets limited to 16 symbols")
    best = _independent_pair_scan(fam)
    witness = None
    for t_mask in range(1, 1 << m2):
        t_list = _bits(t_mask)
        if best % len(t_list):
            continue
        k = best // len(t_list)
        valid_s = 0
        for s in range(m1):
            rows = fam.g[s].rows
            if all(rows[u] & t_mask == 0 for u in t_list):
                valid_s |= 1 << s
        if bin(valid_s).count("1") < k:
            continue
        urows = [0] * m1
        for t in t_list:
            for v in range(m1):
                urows[v] |= fam.h[t].rows[v]
        s_set = _lex_least_independent_set(tuple(urows), valid_s, k)
        if s_set is None:
            continue
        cand = DualPair(s=s_set, t=t_list)
        if witness is None or (cand.s, cand.t) < (witness.s, witness.t):
            witness = cand
    assert witness is not None
    return best, witness


@dataclass
class RhoCertificate:
    """Feasible-point certificate for the semidefinite relaxation."""

    value: float
    gamma: np.ndarray
    checks: dict


def _complementarity_pairs(fam: ConfusionFamily):
    """Index pairs of cross-block entries that cannot both be nonzero.

    Entry (s, t) refers to Gamma[s, m1 + t].  For each s, entries in a row
    clash when their t's are adjacent in g[s]; for each t, entries in a
    column clash when their s's are adjacent in h[t].
    """
    pairs = []
    for s in range(fam.m1):
        for t, t2 in fam.g[s].edges():
            pairs.append(((s, t), (s, t2)))
    for t in range(fam.m2):
        for s, s2 in fam.h[t].edges():
            pairs.append(((s, t), (s2, t)))
    return pairs


def rho_lower_certificate(fam: ConfusionFamily, pair: DualPair) -> RhoCertificate:
    """The rank-one feasible point built from a dual independent pair.

    Gamma = v v^T with v = indicator(S)/sqrt|S| on the X1 block and
    indicator(T)/sqrt|T| on the X2 block; objective value 2 sqrt(|S||T|).
    """
    if not pair.s or not pair.t:
        raise ValueError("pair sides must be nonempty")
    if not is_dual_independent_pair(fam, pair):
        raise ValueError("pair is not dual independent for this family")
    m1, m2 = fam.m1, fam.m2
    v = np.zeros(m1 + m2)
    for s in pair.s:
        v[s] = 1.0 / np.sqrt(len(pair.s))
    for t in pair.t:
        v[m1 + t] = 1.0 / np.sqrt(len(pair.t))
    gamma = np.outer(v, v)
    value = 2.0 * float(gamma[:m1, m1:].sum())
    comp = 0.0
    for (s, t), (s2, t2) in _complementarity_pairs(fam):
        comp = max(comp, abs(gamma[s, m1 + t] * gamma[s2, m1 + t2]))
    checks = {
        "min_eigenvalue": min_eigenvalue(gamma),
        "trace_x1": float(np.trace(gamma[:m1, :m1])),
        "trace_x2": float(np.trace(gamma[m1:, m1:])),
        "complementarity": comp,
        "objective_matches": abs(value - 2.0 * np.sqrt(pair.product)) < 1e-12,
    }
    return RhoCertificate(value=value, gamma=gamma, checks=checks)


@dataclass
class RhoEstimate:
    value: float
    complete: bool
    branches_solved: int
    best_pattern: tuple = field(default_factory=tuple)


def rho_upper_estimate(fam: ConfusionFamily, branch_limit: int = 256) -> RhoEstimate:
    """Evaluate the semidefinite program by resolving each product
    constraint disjunctively.

    Every feasible point zeroes at least one entry of each clashing pair, so
    the program's value is the maximum over branch leaves of a plain SDP with
    entry-zero constraints.  Branches are explored depth-first with a
    relaxation prune; ``complete`` is False when the solve budget ran out, in
    which case ``value`` is only a best-found leaf (not certified).
    """
    m1, m2 = fam.m1, fam.m2
    n = m1 + m2
    if n > 32:
        raise ValueError("combined alphabet limited to 32 symbols")
    pairs = _complementarity_pairs(fam)
    obj = np.zeros((n, n))
    obj[:m1, m1:] = 1.0
    obj[m1:, :m1] = 1.0
    tr1 = np.zeros((n, n))
    tr1[:m1, :m1] = np.eye(m1)
    tr2 = np.zeros((n, n))
    tr2[m1:, m1:] = np.eye(m2)
    eq = [(tr1, 1.0), (tr2, 1.0)]

    solved = 0
    cache: dict[frozenset, float] = {}

    def solve_with(zeroed: frozenset) -> float:
        nonlocal solved
        if zeroed in cache:
            return cache[zeroed]
        solved += 1
        zeros = [(s, m1 + t) for (s, t) in sorted(zeroed)]
        sol = solve_sdp(SdpProblem(objective=obj, eq_constraints=eq, zero_entries=zeros))
        cache[zeroed] = sol.value
        return sol.value

    best = [-np.inf, frozenset()]
    exhausted = [False]

    def descend(zeroed: frozenset):
        if solved >= branch_limit:
            exhausted[0] = True
            return
        bound = solve_with(zeroed)
        if bound <= best[0] + 1e-9:
            return
        open_pair = next(
            (
                pq
                for pq in pairs
                if pq[0] not in zeroed and pq[1] not in zeroed
            ),
            None,
        )
        if open_pair is None:
            if bound > best[0]:
                best[0], best[1] = bound, zeroed
            return
        a, b = open_pair
        descend(zeroed | {a})
        descend(zeroed | {b})

    descend(frozenset())
    value = best[0] if np.isfinite(best[0]) else 0.0
    pattern = tuple(
        sorted(
            (s, t)
            for s in range(m1)
            for t in range(m2)
            if (s, t) not in best[1]
        )
    )
    return RhoEstimate(
        value=float(value),
        complete=not exhausted[0],
        branches_solved=solved,
        best_pattern=pattern,
    )
