"""Two-way channel tables, confusion families, and canonical channels.

A channel document is JSON with keys x1, x2, y1, y2 (alphabet label lists)
and p, a nested table indexed p[x1][x2][y1][y2].  A graph-family document
has keys x1, x2, G, H where G is one adjacency matrix over the X2 alphabet
per X1 symbol and H one over X1 per X2 symbol.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .graphs import Graph, _bits, _maximal_cliques

SUPPORT_THRESHOLD = 1e-12
ROW_SUM_TOLERANCE = 1e-12


@dataclass(frozen=True)
class Channel:
    """A discrete memoryless two-way channel P(y1, y2 | x1, x2)."""

    p: np.ndarray
    x1_labels: tuple = ()
    x2_labels: tuple = ()
    y1_labels: tuple = ()
    y2_labels: tuple = ()

    def __post_init__(self):
        p = np.asarray(self.p, dtype=float)
        if p.ndim != 4:
            raise ValueError("probability table must be 4-dimensional")
        if min(p.shape) < 1:
            raise ValueError("alphabets must be nonempty")
        if np.any(p < 0) or np.any(p > 1 + ROW_SUM_TOLERANCE):
            raise ValueError("probabilities must lie in [0, 1]")
        sums = p.sum(axis=(2, 3))
        if np.any(np.abs(sums - 1.0) > ROW_SUM_TOLERANCE):
            bad = np.unravel_index(np.argmax(np.abs(sums - 1.0)), sums.shape)
            raise ValueError(
                f"rows must sum to 1: row {bad} sums to {sums[bad]!r}"
            )
        object.__setattr__(self, "p", p)
        for name, size in (
            ("x1_labels", p.shape[0]),
            ("x2_labels", p.shape[1]),
            ("y1_labels", p.shape[2]),
            ("y2_labels", p.shape[3]),
        ):
            labels = getattr(self, name)
            if not labels:
                labels = tuple(range(size))
            elif len(labels) != size:
                raise ValueError(f"{name} length does not match the table")
            object.__setattr__(self, name, tuple(labels))

    @property
    def m1(self) -> int:
        return self.p.shape[0]

    @property
    def m2(self) -> int:
        return self.p.shape[1]


@dataclass(frozen=True)
class ConfusionFamily:
    """Confusion graphs of a two-way channel.

    ``g[i]`` lives on the X2 alphabet: two X2 symbols are adjacent when some
    Y1 output has positive probability under both, given X1 symbol i.
    ``h[j]`` lives on X1 symmetrically through Y2.
    """

    g: tuple[Graph, ...]
    h: tuple[Graph, ...]
    x1_labels: tuple = ()
    x2_labels: tuple = ()

    def __post_init__(self):
        if not self.g or not self.h:
            raise ValueError("family must have at least one graph per side")
        m1, m2 = len(self.g), len(self.h)
        if any(gr.n != m2 for gr in self.g):
            raise ValueError("each G graph must live on the X2 alphabet")
        if any(gr.n != m1 for gr in self.h):
            raise ValueError("each H graph must live on the X1 alphabet")
        object.__setattr__(self, "g", tuple(self.g))
        object.__setattr__(self, "h", tuple(self.h))
        for name, size in (("x1_labels", m1), ("x2_labels", m2)):
            labels = getattr(self, name)
            if not labels:
                labels = tuple(range(size))
            elif len(labels) != size:
                raise ValueError(f"{name} length does not match the family")
            object.__setattr__(self, name, tuple(labels))

    @property
    def m1(self) -> int:
        return len(self.g)

    @property
    def m2(self) -> int:
        return len(self.h)


def parse_channel(source, fmt: str | None = None):
    """Parse a channel or graph-family document.

    Accepts bytes, str, or an already-decoded dict.  The format is detected
    from the keys unless given explicitly as "probability-table" or
    "graph-family".  Returns a Channel or a ConfusionFamily.
    """
    if isinstance(source, (bytes, bytearray)):
        doc = json.loads(source.decode("utf-8"))
    elif isinstance(source, str):
        doc = json.loads(source)
    elif isinstance(source, dict):
        doc = source
    else:
        raise ValueError("source must be bytes, str, or dict")
    if not isinstance(doc, dict):
        raise ValueError("document must be a JSON object")
    if fmt is None:
        if "p" in doc:
            fmt = "probability-table"
        elif "G" in doc and "H" in doc:
            fmt = "graph-family"
        else:
            raise ValueError("cannot detect format: need key 'p' or keys 'G'/'H'")
    if fmt == "probability-table":
        for key in ("x1", "x2", "y1", "y2", "p"):
            if key not in doc:
                raise ValueError(f"missing key {key!r}")
        p = np.asarray(doc["p"], dtype=float)
        expected = (len(doc["x1"]), len(doc["x2"]), len(doc["y1"]), len(doc["y2"]))
        if p.shape != expected:
            raise ValueError(f"table shape {p.shape} does not match alphabets {expected}")
        return Channel(
            p=p,
            x1_labels=tuple(doc["x1"]),
            x2_labels=tuple(doc["x2"]),
            y1_labels=tuple(doc["y1"]),
            y2_labels=tuple(doc["y2"]),
        )
    if fmt == "graph-family":
        for key in ("x1", "x2", "G", "H"):
            if key not in doc:
                raise ValueError(f"missing key {key!r}")
        m1, m2 = len(doc["x1"]), len(doc["x2"])
        if len(doc["G"]) != m1 or len(doc["H"]) != m2:
            raise ValueError("need one G graph per X1 symbol and one H per X2 symbol")
        g = tuple(Graph.from_adjacency(a) for a in doc["G"])
        h = tuple(Graph.from_adjacency(a) for a in doc["H"])
        return ConfusionFamily(
            g=g, h=h, x1_labels=tuple(doc["x1"]), x2_labels=tuple(doc["x2"])
        )
    raise ValueError(f"unknown format {fmt!r}")


def marginal_y1(ch: Channel) -> np.ndarray:
    """P(y1 | x1, x2) as an array of shape (|X1|, |X2|, |Y1|)."""
    return ch.p.sum(axis=3)


def marginal_y2(ch: Channel) -> np.ndarray:
    """P(y2 | x1, x2) as an array of shape (|X1|, |X2|, |Y2|)."""
    return ch.p.sum(axis=2)


def derive_confusion(ch: Channel) -> ConfusionFamily:
    """Confusion family of a channel; supports below 1e-12 count as zero."""
    w1 = marginal_y1(ch) > SUPPORT_THRESHOLD  # (m1, m2, ny1)
    w2 = marginal_y2(ch) > SUPPORT_THRESHOLD  # (m1, m2, ny2)
    g = []
    for i in range(ch.m1):
        overlap = w1[i] @ w1[i].T  # (m2, m2) counts of shared outputs
        adj = (overlap > 0).astype(int)
        np.fill_diagonal(adj, 0)
        g.append(Graph.from_adjacency(adj.tolist()))
    h = []
    for j in range(ch.m2):
        overlap = w2[:, j, :] @ w2[:, j, :].T
        adj = (overlap > 0).astype(int)
        np.fill_diagonal(adj, 0)
        h.append(Graph.from_adjacency(adj.tolist()))
    return ConfusionFamily(
        g=tuple(g), h=tuple(h), x1_labels=ch.x1_labels, x2_labels=ch.x2_labels
    )


def same_adjacency(a: Channel, b: Channel) -> bool:
    """True when the two channels derive identical confusion families."""
    if (a.m1, a.m2) != (b.m1, b.m2):
        return False
    fa, fb = derive_confusion(a), derive_confusion(b)
    return fa.g == fb.g and fa.h == fb.h


def _clique_cover_lists(graphs: tuple[Graph, ...]):
    """Sorted maximal-clique lists, plus per-vertex covering clique indices."""
    all_cliques = []
    covers = []
    for gr in graphs:
        cliques = sorted(_bits(m) for m in _maximal_cliques(gr.rows, gr.n))
        member = [[k for k, c in enumerate(cliques) if v in c] for v in range(gr.n)]
        all_cliques.append(cliques)
        covers.append(member)
    return all_cliques, covers


def canonical_channel(fam: ConfusionFamily) -> Channel:
    """A channel with the given confusion family.

    Outputs on each side are indexed by maximal cliques of the relevant
    graph: given (x1, x2), the Y1 symbol is drawn uniformly from the maximal
    cliques of g[x1] containing x2, and independently the Y2 symbol uniformly
    from the maximal cliques of h[x2] containing x1.  Two symbols then share
    an output exactly when they share a maximal clique, i.e. when adjacent.
    """
    g_cliques, g_cover = _clique_cover_lists(fam.g)
    h_cliques, h_cover = _clique_cover_lists(fam.h)
    ny1 = max(len(c) for c in g_cliques)
    ny2 = max(len(c) for c in h_cliques)
    m1, m2 = fam.m1, fam.m2
    p = np.zeros((m1, m2, ny1, ny2))
    for i in range(m1):
        for j in range(m2):
            ks = g_cover[i][j]
            ls = h_cover[j][i]
            w = 1.0 / (len(ks) * len(ls))
            for k in ks:
                for l in ls:
                    p[i, j, k, l] = w
    return Channel(
        p=p,
        x1_labels=fam.x1_labels,
        x2_labels=fam.x2_labels,
        y1_labels=tuple(range(ny1)),
        y2_labels=tuple(range(ny2)),
    )
