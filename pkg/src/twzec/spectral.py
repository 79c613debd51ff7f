"""Spectral and fractional relaxations of graph capacity, and the sum-rate
bounds they induce for channels whose feedback direction is noiseless.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import ConfusionFamily
from .graphs import Graph, independence_number, strong_power
from .numerics import LpProblem, SdpProblem, solve_lp, solve_lp_exact, solve_sdp


def lovasz_theta(g: Graph) -> float:
    """The theta number: max <J, X> over PSD X with unit trace and
    X[u, v] = 0 on every edge.  Satisfies alpha <= theta <= clique cover."""
    if g.n > 64:
        raise ValueError("theta solver limited to 64 vertices")
    if g.n == 0:
        raise ValueError("graph must be nonempty")
    obj = np.ones((g.n, g.n))
    sol = solve_sdp(
        SdpProblem(
            objective=obj,
            eq_constraints=[(np.eye(g.n), 1.0)],
            zero_entries=g.edges(),
        )
    )
    return float(sol.value)


def fractional_clique_cover(g: Graph) -> float:
    """Minimum total weight of maximal cliques covering every vertex once.

    Solved exactly over the rationals up to 20 vertices would be slow, so the
    exact tableau runs for n <= 12 and HiGHS handles the rest.
    """
    if g.n > 40:
        raise ValueError("clique cover solver limited to 40 vertices")
    from .graphs import enumerate_cliques

    cliques = enumerate_cliques(g, maximal_only=True)
    ncols = len(cliques)
    cover = np.zeros((g.n, ncols))
    for k, c in enumerate(cliques):
        for v in c:
            cover[v, k] = 1.0
    if g.n <= 12:
        value, _ = solve_lp_exact(
            [1] * ncols,
            a_ub=(-cover).astype(int).tolist(),
            b_ub=[-1] * g.n,
        )
        return float(value)
    sol = solve_lp(LpProblem(c=np.ones(ncols), a_ub=-cover, b_ub=-np.ones(g.n)))
    return float(sol.value)


@dataclass
class CapacitySandwich:
    """Bracket for the log-capacity of a single confusion graph (bits)."""

    lower: float
    upper: float
    witness_power: int
    alphas: tuple[int, ...]
    theta: float
    clique_cover: float


def capacity_sandwich(g: Graph, max_power: int = 2) -> CapacitySandwich:
    """Best finite-power independence rate against the spectral ceiling."""
    if max_power < 1:
        raise ValueError("max_power must be >= 1")
    alphas = []
    best = -np.inf
    witness = 1
    for k in range(1, max_power + 1):
        gk = g if k == 1 else strong_power(g, k)
        if gk.n > 64:
            break
        a = independence_number(gk)
        alphas.append(a)
        rate = np.log2(a) / k
        if rate > best + 1e-12:
            best = rate
            witness = k
    theta = lovasz_theta(g)
    cc = fractional_clique_cover(g) if g.n <= 20 else float("inf")
    upper = float(np.log2(min(theta, cc)))
    return CapacitySandwich(
        lower=float(best),
        upper=upper,
        witness_power=witness,
        alphas=tuple(alphas),
        theta=theta,
        clique_cover=cc,
    )


def _spectral_value(g: Graph) -> float:
    """min(theta, fractional clique cover), both multiplicative and
    >= alpha, hence a valid capacity relaxation pointwise."""
    theta = lovasz_theta(g)
    cc = fractional_clique_cover(g) if g.n <= 20 else float("inf")
    return float(min(theta, cc))


def noiseless_direction_bound(fam: ConfusionFamily) -> float:
    """Sum-rate bound log2 sum_i eta(g[i]) for channels where every h[j] is
    edgeless (the X1-to-Y2 direction is noiseless).

    Valid for any eta that is multiplicative under the strong product,
    additive under disjoint union, and at least the independence number;
    theta and the fractional clique cover both qualify, and the minimum of
    the two sums is returned.
    """
    if any(not hj.is_empty() for hj in fam.h):
        raise ValueError("requires every h graph to be edgeless")
    theta_sum = sum(lovasz_theta(gi) for gi in fam.g)
    cc_sum = 0.0
    for gi in fam.g:
        if gi.n > 20:
            cc_sum = float("inf")
            break
        cc_sum += fractional_clique_cover(gi)
    return float(np.log2(min(theta_sum, cc_sum)))


def kg_kk_bound(x2_size: int, g: Graph) -> float:
    """Sum-rate bound log2(|X2| + eta(g)) for the family [empty, g;
    edgeless pairs], where eta = min(theta, fractional clique cover)."""
    if x2_size < 1:
        raise ValueError("x2_size must be positive")
    if g.n != x2_size:
        raise ValueError("graph must live on the X2 alphabet")
    return float(np.log2(x2_size + _spectral_value(g)))
