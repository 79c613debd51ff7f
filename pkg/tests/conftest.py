from pathlib import Path

import numpy as np
import pytest

from twzec.channel import Channel, ConfusionFamily, derive_confusion
from twzec.graphs import Graph

_CHANNEL_DIR = Path(__file__).resolve().parent.parent / "channels"
REPO_CHANNELS = {
    name: str(_CHANNEL_DIR / f"{name}.json")
    for name in ("example1", "bmc", "pentagon", "example3")
}


def example1_channel(delta: float = 0.5) -> Channel:
    """Ternary-by-binary channel with one free conditional mass."""
    p = np.zeros((3, 2, 2, 2))
    p[0, 0, 0, 0] = 1.0
    p[0, 1, 0, 0] = 1.0
    p[1, 0, 1, 0] = delta
    p[1, 0, 1, 1] = 1.0 - delta
    p[1, 1, 1, 1] = 1.0
    p[2, 0, 0, 1] = 1.0
    p[2, 1, 1, 0] = 1.0
    return Channel(p=p, x1_labels=(0, 1, 2), x2_labels=(0, 1),
                   y1_labels=(0, 1), y2_labels=(0, 1))


def bmc_channel() -> Channel:
    """Both users receive the product of the two binary inputs."""
    p = np.zeros((2, 2, 2, 2))
    for x1 in range(2):
        for x2 in range(2):
            y = x1 * x2
            p[x1, x2, y, y] = 1.0
    return Channel(p=p, x1_labels=(0, 1), x2_labels=(0, 1),
                   y1_labels=(0, 1), y2_labels=(0, 1))


def pentagon_family() -> ConfusionFamily:
    """Noiseless binary direction; the active symbol shows Bob's pentagon."""
    return ConfusionFamily(
        g=(Graph.empty(5), Graph.cycle(5)),
        h=tuple(Graph.empty(2) for _ in range(5)),
    )


def example3_family() -> ConfusionFamily:
    """Every first-terminal symbol detects; only the second's symbol 1 does."""
    return ConfusionFamily(
        g=(Graph.empty(2), Graph.empty(2), Graph.empty(2)),
        h=(Graph.from_edges(3, [(0, 1), (0, 2)]), Graph.empty(3)),
    )


def random_channel(rng: np.random.Generator, m1=None, m2=None) -> Channel:
    m1 = int(rng.integers(2, 5)) if m1 is None else m1
    m2 = int(rng.integers(2, 5)) if m2 is None else m2
    ny1 = int(rng.integers(2, 4))
    ny2 = int(rng.integers(2, 4))
    p = rng.random((m1, m2, ny1, ny2))
    # sparsify so confusion graphs are not almost surely complete
    mask = rng.random((m1, m2, ny1, ny2)) < 0.55
    p = p * mask
    p[..., 0, 0] += 1e-3  # keep every (x1, x2) row normalizable
    p /= p.sum(axis=(2, 3), keepdims=True)
    return Channel(
        p=p,
        x1_labels=tuple(range(m1)),
        x2_labels=tuple(range(m2)),
        y1_labels=tuple(range(ny1)),
        y2_labels=tuple(range(ny2)),
    )


def random_graph(rng: np.random.Generator, n: int, p: float = 0.4) -> Graph:
    edges = [
        (u, v) for u in range(n) for v in range(u + 1, n) if rng.random() < p
    ]
    return Graph.from_edges(n, edges)


@pytest.fixture
def fam1() -> ConfusionFamily:
    return derive_confusion(example1_channel())


@pytest.fixture
def fam_bmc() -> ConfusionFamily:
    return derive_confusion(bmc_channel())
