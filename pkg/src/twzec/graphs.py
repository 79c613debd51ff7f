"""Finite simple graphs on vertex sets {0..n-1} with bitset adjacency,
strong products, exact independence numbers, clique enumeration, and
dual homomorphisms between confusion families.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable


@dataclass(frozen=True)
class Graph:
    """Undirected simple graph; ``rows[v]`` is the neighbor bitmask of v."""

    n: int
    rows: tuple[int, ...]

    def __post_init__(self):
        if self.n < 0 or len(self.rows) != self.n:
            raise ValueError("adjacency rows must match the vertex count")
        full = (1 << self.n) - 1
        for v, row in enumerate(self.rows):
            if row & ~full:
                raise ValueError("adjacency row references a missing vertex")
            if row >> v & 1:
                raise ValueError(f"self-loop at vertex {v}")
        for u in range(self.n):
            for v in range(u + 1, self.n):
                if (self.rows[u] >> v & 1) != (self.rows[v] >> u & 1):
                    raise ValueError("adjacency is not symmetric")

    @staticmethod
    def from_edges(n: int, edges: Iterable[tuple[int, int]]) -> "Graph":
        rows = [0] * n
        for u, v in edges:
            if u == v or not (0 <= u < n and 0 <= v < n):
                raise ValueError(f"bad edge ({u}, {v})")
            rows[u] |= 1 << v
            rows[v] |= 1 << u
        return Graph(n, tuple(rows))

    @staticmethod
    def from_adjacency(matrix) -> "Graph":
        n = len(matrix)
        rows = [0] * n
        for u in range(n):
            if len(matrix[u]) != n:
                raise ValueError("adjacency matrix must be square")
            for v in range(n):
                if matrix[u][v]:
                    rows[u] |= 1 << v
        return Graph(n, tuple(rows))

    @staticmethod
    def empty(n: int) -> "Graph":
        return Graph(n, (0,) * n)

    @staticmethod
    def complete(n: int) -> "Graph":
        full = (1 << n) - 1
        return Graph(n, tuple(full ^ (1 << v) for v in range(n)))

    @staticmethod
    def cycle(n: int) -> "Graph":
        if n < 3:
            raise ValueError("cycle needs at least 3 vertices")
        return Graph.from_edges(n, [(v, (v + 1) % n) for v in range(n)])

    def has_edge(self, u: int, v: int) -> bool:
        return bool(self.rows[u] >> v & 1)

    def edges(self) -> list[tuple[int, int]]:
        return [
            (u, v)
            for u in range(self.n)
            for v in range(u + 1, self.n)
            if self.rows[u] >> v & 1
        ]

    def adjacency_matrix(self):
        return [[1 if self.rows[u] >> v & 1 else 0 for v in range(self.n)] for u in range(self.n)]

    def is_empty(self) -> bool:
        return all(r == 0 for r in self.rows)


def complement(g: Graph) -> Graph:
    full = (1 << g.n) - 1
    return Graph(g.n, tuple((full ^ row) & ~(1 << v) for v, row in enumerate(g.rows)))


def union(g: Graph, h: Graph) -> Graph:
    """Edge union of two graphs on the same vertex set."""
    if g.n != h.n:
        raise ValueError("union requires equal vertex sets")
    return Graph(g.n, tuple(a | b for a, b in zip(g.rows, h.rows)))


def disjoint_union(g: Graph, h: Graph) -> Graph:
    """Disjoint union; vertices of h are shifted up by g.n."""
    rows = list(g.rows) + [0] * h.n
    for v, row in enumerate(h.rows):
        rows[g.n + v] = row << g.n
    return Graph(g.n + h.n, tuple(rows))


def induced_subgraph(g: Graph, vertices: Iterable[int]) -> Graph:
    """Subgraph induced on ``vertices``; their order fixes the new labels."""
    verts = list(vertices)
    if len(set(verts)) != len(verts):
        raise ValueError("induced vertex list has repeats")
    if any(not 0 <= v < g.n for v in verts):
        raise ValueError("induced vertex out of range")
    k = len(verts)
    rows = [0] * k
    for i, u in enumerate(verts):
        for j, v in enumerate(verts):
            if g.rows[u] >> v & 1:
                rows[i] |= 1 << j
    return Graph(k, tuple(rows))


def strong_product(g: Graph, h: Graph) -> Graph:
    """Strong product; vertex (u, u') maps to index u * h.n + u'.

    (u1,v1) ~ (u2,v2) iff each coordinate is equal or adjacent, and the
    pairs are not identical.
    """
    n = g.n * h.n
    rows = [0] * n
    for u1 in range(g.n):
        gu = g.rows[u1] | (1 << u1)
        for v1 in range(h.n):
            i = u1 * h.n + v1
            hv = h.rows[v1] | (1 << v1)
            mask = 0
            u2s = gu
            while u2s:
                u2 = (u2s & -u2s).bit_length() - 1
                u2s &= u2s - 1
                mask |= hv << (u2 * h.n)
            mask &= ~(1 << i)
            rows[i] = mask
    return Graph(n, tuple(rows))


def strong_power(g: Graph, n: int) -> Graph:
    if n < 1:
        raise ValueError("power must be >= 1")
    out = g
    for _ in range(n - 1):
        out = strong_product(out, g)
    return out


def _max_clique(rows: tuple[int, ...], n: int) -> tuple[int, int]:
    """Maximum clique via branch and bound with a greedy coloring bound.

    Returns (size, vertex bitmask). Deterministic for a fixed input.
    """
    best_size = 0
    best_mask = 0

    def expand(cand: int, size: int, mask: int):
        nonlocal best_size, best_mask
        if not cand:
            if size > best_size:
                best_size, best_mask = size, mask
            return
        # greedy coloring: vertices grouped into independence classes of
        # the candidate subgraph; class index bounds the clique extension
        order = []
        bounds = []
        left = cand
        color = 0
        while left:
            color += 1
            avail = left
            while avail:
                v = (avail & -avail).bit_length() - 1
                vb = 1 << v
                order.append(v)
                bounds.append(color)
                left &= ~vb
                avail &= ~(rows[v] | vb)
        for i in range(len(order) - 1, -1, -1):
            if size + bounds[i] <= best_size:
                return
            v = order[i]
            vb = 1 << v
            expand(cand & rows[v], size + 1, mask | vb)
            cand &= ~vb

    expand((1 << n) - 1, 0, 0)
    return best_size, best_mask


def _bits(mask: int) -> tuple[int, ...]:
    out = []
    while mask:
        out.append((mask & -mask).bit_length() - 1)
        mask &= mask - 1
    return tuple(out)


def _mask(vertices: Iterable[int]) -> int:
    m = 0
    for v in vertices:
        m |= 1 << v
    return m


def maximum_independent_set(g: Graph) -> tuple[int, ...]:
    """A maximum independent set, found exactly (clique of the complement)."""
    if g.n == 0:
        return ()
    if g.n > 64:
        raise ValueError("independence number limited to 64 vertices")
    comp = complement(g)
    _, mask = _max_clique(comp.rows, comp.n)
    return _bits(mask)


def independence_number(g: Graph) -> int:
    return len(maximum_independent_set(g))


def _mis_size_masked(rows: tuple[int, ...], vertices: int) -> int:
    """Independence number of the subgraph induced by the vertex bitmask."""
    if not vertices:
        return 0
    verts = _bits(vertices)
    comp_rows = []
    for u in verts:
        row = 0
        for j, v in enumerate(verts):
            if v != u and not (rows[u] >> v & 1):
                row |= 1 << j
        comp_rows.append(row)
    size, _ = _max_clique(tuple(comp_rows), len(verts))
    return size


def _maximal_cliques(rows: tuple[int, ...], n: int, within: int | None = None):
    """Bron-Kerbosch with pivoting; yields vertex bitmasks of maximal cliques
    of the subgraph induced by ``within`` (default: all vertices)."""
    out = []
    start = (1 << n) - 1 if within is None else within
    if start == 0:
        return out

    def bk(r: int, p: int, x: int):
        if not p and not x:
            out.append(r)
            return
        px = p | x
        pivot = -1
        pivot_deg = -1
        m = px
        while m:
            v = (m & -m).bit_length() - 1
            m &= m - 1
            d = bin(p & rows[v]).count("1")
            if d > pivot_deg:
                pivot_deg, pivot = d, v
        ext = p & ~rows[pivot]
        while ext:
            v = (ext & -ext).bit_length() - 1
            vb = 1 << v
            ext &= ext - 1
            bk(r | vb, p & rows[v] & start, x & rows[v])
            p &= ~vb
            x |= vb

    bk(0, start, 0)
    return out


def enumerate_cliques(g: Graph, maximal_only: bool = False) -> list[tuple[int, ...]]:
    """All cliques of g (including the empty set), or only the maximal ones.

    Sorted by (size, vertex tuple) for deterministic output.
    """
    maximal = _maximal_cliques(g.rows, g.n)
    if maximal_only:
        return sorted((_bits(m) for m in maximal), key=lambda t: (len(t), t))
    seen = set()
    for cm in maximal:
        sub = cm
        while True:
            seen.add(sub)
            if sub == 0:
                break
            sub = (sub - 1) & cm
    return sorted((_bits(m) for m in seen), key=lambda t: (len(t), t))


@dataclass(frozen=True)
class DualHomomorphism:
    """Pair of symbol maps (phi on X1, psi on X2) between two families."""

    phi: tuple[int, ...]
    psi: tuple[int, ...]


def verify_dual_homomorphism(d: DualHomomorphism, src, dst) -> bool:
    """Check the adjacency-preservation conditions of a dual homomorphism.

    Condition 1: u ~ v in src.g[i] implies psi(u) ~ psi(v) in dst.g[phi(i)].
    Condition 2: u ~ v in src.h[j] implies phi(u) ~ phi(v) in dst.h[psi(j)].
    """
    if len(d.phi) != len(src.g) or len(d.psi) != len(src.h):
        return False
    if any(not 0 <= x < len(dst.g) for x in d.phi):
        return False
    if any(not 0 <= x < len(dst.h) for x in d.psi):
        return False
    for i, gi in enumerate(src.g):
        target = dst.g[d.phi[i]]
        for u, v in gi.edges():
            pu, pv = d.psi[u], d.psi[v]
            if pu == pv or not target.has_edge(pu, pv):
                return False
    for j, hj in enumerate(src.h):
        target = dst.h[d.psi[j]]
        for u, v in hj.edges():
            pu, pv = d.phi[u], d.phi[v]
            if pu == pv or not target.has_edge(pu, pv):
                return False
    return True


def find_dual_homomorphism(src, dst) -> DualHomomorphism | None:
    """Backtracking search for a dual homomorphism from src to dst.

    Variables are interleaved (phi[0], psi[0], phi[1], ...) and every
    constraint is checked as soon as all of its symbols are assigned.
    Returns the lexicographically least homomorphism, or None.
    """
    m1, m2 = len(src.g), len(dst.g)
    n1, n2 = len(src.h), len(dst.h)
    if m1 == 0 or n1 == 0:
        raise ValueError("families must be nonempty")
    order = []
    for i in range(max(m1, n1)):
        if i < m1:
            order.append(("phi", i))
        if i < n1:
            order.append(("psi", i))
    phi = [-1] * m1
    psi = [-1] * n1

    def consistent() -> bool:
        for i, gi in enumerate(src.g):
            if phi[i] < 0:
                continue
            target = dst.g[phi[i]]
            for u, v in gi.edges():
                pu, pv = psi[u], psi[v]
                if pu < 0 or pv < 0:
                    continue
                if pu == pv or not target.has_edge(pu, pv):
                    return False
        for j, hj in enumerate(src.h):
            if psi[j] < 0:
                continue
            target = dst.h[psi[j]]
            for u, v in hj.edges():
                pu, pv = phi[u], phi[v]
                if pu < 0 or pv < 0:
                    continue
                if pu == pv or not target.has_edge(pu, pv):
                    return False
        return True

    def rec(pos: int) -> bool:
        if pos == len(order):
            return True
        kind, idx = order[pos]
        domain = m2 if kind == "phi" else n2
        slot = phi if kind == "phi" else psi
        for val in range(domain):
            slot[idx] = val
            if consistent() and rec(pos + 1):
                return True
        slot[idx] = -1
        return False

    if rec(0):
        return DualHomomorphism(phi=tuple(phi), psi=tuple(psi))
    return None


def transport_codebook(d: DualHomomorphism, pair):
    """Push a codebook pair through the symbol maps coordinatewise.

    When d witnesses a distinguishability-preserving relation between the two
    families, images of distinct codewords stay distinct; a collision means d
    was not a valid witness and raises.
    """
    new_a = [tuple(d.phi[x] for x in word) for word in pair.a]
    new_b = [tuple(d.psi[x] for x in word) for word in pair.b]
    if len(set(new_a)) != len(pair.a) or len(set(new_b)) != len(pair.b):
        raise ValueError("symbol maps collapse codewords; not a valid transport")
    return type(pair)(n=pair.n, a=tuple(new_a), b=tuple(new_b))
