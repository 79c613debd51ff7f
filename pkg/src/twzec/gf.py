"""Small finite fields as dense lookup tables, with subfield embeddings,
trace maps, and the little linear algebra the code constructions need.

Elements of GF(p^d) are integers 0..q-1 whose base-p digits are the
coefficients of the polynomial representation, low degree first.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

_MODULI = {
    4: (1, 1, 1),
    8: (1, 1, 0, 1),
    9: (1, 0, 1),
    16: (1, 1, 0, 0, 1),
    25: (2, 4, 1),
    27: (1, 2, 0, 1),
}

_PRIMES = (2, 3, 5, 7, 11, 13)

SUPPORTED_FIELDS = tuple(sorted(_MODULI) + list(_PRIMES))


@dataclass(frozen=True, eq=False)
class GField:
    """Arithmetic of GF(q) through dense tables; ops accept numpy arrays."""

    q: int
    p: int
    deg: int
    add_table: np.ndarray
    mul_table: np.ndarray
    neg_table: np.ndarray
    inv_table: np.ndarray

    def add(self, a, b):
        return self.add_table[a, b]

    def sub(self, a, b):
        return self.add_table[a, self.neg_table[b]]

    def mul(self, a, b):
        return self.mul_table[a, b]

    def neg(self, a):
        return self.neg_table[a]

    def inv(self, a):
        if np.any(np.asarray(a) == 0):
            raise ZeroDivisionError("zero has no multiplicative inverse")
        return self.inv_table[a]

    inverse = inv

    def pow(self, a: int, e: int) -> int:
        if e < 0:
            a, e = int(self.inv(a)), -e
        out, base = 1, int(a)
        while e:
            if e & 1:
                out = int(self.mul_table[out, base])
            base = int(self.mul_table[base, base])
            e >>= 1
        return out

    @property
    def elements(self) -> range:
        return range(self.q)

    def __repr__(self) -> str:
        return f"GF({self.q})"


def _digits(e: int, p: int, d: int):
    out = []
    for _ in range(d):
        out.append(e % p)
        e //= p
    return out


def _undigits(coeffs, p: int) -> int:
    out = 0
    for c in reversed(coeffs):
        out = out * p + (c % p)
    return out


def _poly_mul_mod(a, b, mod, p):
    prod = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                prod[i + j] = (prod[i + j] + x * y) % p
    d = len(mod) - 1
    lead_inv = pow(mod[-1], -1, p)
    for i in range(len(prod) - 1, d - 1, -1):
        c = prod[i]
        if c:
            f = (c * lead_inv) % p
            for j, m in enumerate(mod):
                prod[i - d + j] = (prod[i - d + j] - f * m) % p
    return prod[:d]


@lru_cache(maxsize=None)
def gf_arithmetic(q: int) -> GField:
    """Field object for q in the supported table of prime powers."""
    if q in _PRIMES:
        p, deg = q, 1
        idx = np.arange(q)
        add = (idx[:, None] + idx[None, :]) % q
        mul = (idx[:, None] * idx[None, :]) % q
    elif q in _MODULI:
        mod = _MODULI[q]
        deg = len(mod) - 1
        p = round(q ** (1.0 / deg))
        if p**deg != q:
            raise ValueError(f"bad modulus table entry for {q}")
        polys = [_digits(e, p, deg) for e in range(q)]
        add = np.zeros((q, q), dtype=np.int64)
        mul = np.zeros((q, q), dtype=np.int64)
        for a in range(q):
            for b in range(q):
                add[a, b] = _undigits(
                    [(x + y) % p for x, y in zip(polys[a], polys[b])], p
                )
                mul[a, b] = _undigits(_poly_mul_mod(polys[a], polys[b], mod, p), p)
    else:
        raise ValueError(f"unsupported field size {q}")
    neg = np.array([int(np.where(add[a] == 0)[0][0]) for a in range(q)])
    inv = np.zeros(q, dtype=np.int64)
    for a in range(1, q):
        hits = np.where(mul[a] == 1)[0]
        if hits.size != 1:
            raise ValueError(f"modulus for {q} is not irreducible")
        inv[a] = int(hits[0])
    return GField(q, p, deg, add, mul, neg, inv)


def multiplicative_generator(field: GField) -> int:
    for g in range(1, field.q):
        seen, x = set(), 1
        for _ in range(field.q - 1):
            x = int(field.mul_table[x, g])
            seen.add(x)
        if len(seen) == field.q - 1:
            return g
    raise ValueError("no generator found")


def is_subfield_pair(big: GField, small: GField) -> bool:
    return big.p == small.p and big.deg % small.deg == 0


@lru_cache(maxsize=None)
def _embedding_cached(q_big: int, q_small: int):
    big, small = gf_arithmetic(q_big), gf_arithmetic(q_small)
    if not is_subfield_pair(big, small):
        raise ValueError(f"GF({q_small}) is not a subfield of GF({q_big})")
    if q_big == q_small:
        return np.arange(q_big)
    g = multiplicative_generator(small)
    for r in range(1, big.q):
        emb = np.zeros(small.q, dtype=np.int64)
        emb[1] = 1
        x, y = g, r
        for _ in range(small.q - 2):
            emb[x] = y
            x = int(small.mul_table[x, g])
            y = int(big.mul_table[y, r])
        if y != 1 or len(set(emb.tolist())) != small.q:
            continue
        ok = all(
            emb[small.add_table[a, b]] == big.add_table[emb[a], emb[b]]
            for a in range(small.q)
            for b in range(small.q)
        )
        if ok:
            return emb
    raise ValueError("no embedding found; modulus tables inconsistent")


def subfield_embedding(big: GField, small: GField) -> np.ndarray:
    """Index map realizing GF(small) inside GF(big) as a ring embedding."""
    return _embedding_cached(big.q, small.q)


def trace_to_subfield(big: GField, small: GField) -> np.ndarray:
    """Trace map GF(big) -> GF(small), as small-field indices.

    Surjective and linear over the subfield; its fibers all have size
    big.q // small.q.
    """
    emb = subfield_embedding(big, small)
    back = {int(v): i for i, v in enumerate(emb)}
    rounds = big.deg // small.deg
    out = np.zeros(big.q, dtype=np.int64)
    for x in range(big.q):
        t, y = 0, x
        for _ in range(rounds):
            t = int(big.add_table[t, y])
            y = big.pow(y, small.q)
        if t not in back:
            raise ValueError("trace left the subfield; tables inconsistent")
        out[x] = back[t]
    return out


def gf_matmul(field: GField, a, b) -> np.ndarray:
    a = np.asarray(a)
    b = np.asarray(b)
    out = np.zeros((a.shape[0], b.shape[1]), dtype=np.int64)
    for t in range(a.shape[1]):
        out = field.add(out, field.mul(a[:, t][:, None], b[t][None, :]))
    return out


def gf_rref(field: GField, mat) -> tuple[np.ndarray, tuple[int, ...]]:
    """Reduced row echelon form and pivot columns."""
    m = np.array(mat, dtype=np.int64)
    if m.ndim != 2:
        raise ValueError("matrix must be 2-D")
    rows, cols = m.shape
    pivots = []
    r = 0
    for c in range(cols):
        if r == rows:
            break
        hit = None
        for rr in range(r, rows):
            if m[rr, c]:
                hit = rr
                break
        if hit is None:
            continue
        if hit != r:
            m[[r, hit]] = m[[hit, r]]
        m[r] = field.mul(m[r], int(field.inv(int(m[r, c]))))
        for rr in range(rows):
            if rr != r and m[rr, c]:
                m[rr] = field.sub(m[rr], field.mul(int(m[rr, c]), m[r]))
        pivots.append(c)
        r += 1
    return m, tuple(pivots)


def gf_rank(field: GField, mat) -> int:
    return len(gf_rref(field, mat)[1])


def coset_canonical(field: GField, rref, pivots, words) -> np.ndarray:
    """Canonical coset representative of each word modulo the row space."""
    w = np.array(words, dtype=np.int64)
    single = w.ndim == 1
    if single:
        w = w[None, :]
    for r, c in enumerate(pivots):
        coef = w[:, c].copy()
        w = field.sub(w, field.mul(coef[:, None], np.asarray(rref)[r][None, :]))
    return w[0] if single else w


def all_messages(q: int, k: int) -> np.ndarray:
    """All q^k length-k words in lexicographic order."""
    if k == 0:
        return np.zeros((1, 0), dtype=np.int64)
    grids = np.meshgrid(*([np.arange(q)] * k), indexing="ij")
    return np.stack([g.ravel() for g in grids], axis=1)
