"""Random complexes and states for randomized test drivers."""

from __future__ import annotations

import math

import numpy as np

from .complex import CellComplex, WeightedEdge

R_LOW = 0.2
R_HIGH = math.pi / 2 - 0.2


def random_complex(rng: np.random.Generator, max_faces: int = 8, max_edges: int = 16,
                   min_faces: int = 2, weight_range=(0.15, math.pi / 2 - 0.15),
                   self_loop_prob: float = 0.05) -> CellComplex:
    """Connected face multigraph: a random spanning tree plus extra edges.

    Parallel edges are common; self-adjacent edges appear with small
    probability.
    """
    n = int(rng.integers(min_faces, max_faces + 1))
    m = int(rng.integers(max(n - 1, 1), max(max_edges, n - 1) + 1))
    pairs = []
    order = rng.permutation(n)
    for i in range(1, n):
        pairs.append((int(order[i]), int(order[rng.integers(0, i)])))
    while len(pairs) < m:
        a = int(rng.integers(0, n))
        if rng.random() < self_loop_prob:
            b = a
        else:
            b = int((a + rng.integers(1, n)) % n)
        pairs.append((a, b))
    lo, hi = weight_range
    edges = tuple(
        WeightedEdge(i, a, b, float(rng.uniform(lo, hi))) for i, (a, b) in enumerate(pairs)
    )
    return CellComplex(num_faces=n, edges=edges)


def random_radii(rng: np.random.Generator, n: int, low: float = R_LOW, high: float = R_HIGH):
    return rng.uniform(low, high, size=n)


def random_support(rng: np.random.Generator, n: int) -> tuple[int, ...]:
    """Nonempty proper subset of ``range(n)`` (needs ``n >= 2``)."""
    size = int(rng.integers(1, n))
    return tuple(sorted(rng.choice(n, size=size, replace=False).tolist()))


def random_stratum_k(rng: np.random.Generator, n: int, support) -> np.ndarray:
    """Curvatures positive on ``support`` and zero elsewhere."""
    k = np.zeros(n)
    r = random_radii(rng, len(support))
    k[list(support)] = 1.0 / np.tan(r)
    return k


def random_start(rng: np.random.Generator, n: int, spread: float = 1.5) -> np.ndarray:
    """Positive start curvatures with ``ln k`` uniform in ``[-spread, spread]``."""
    return np.exp(rng.uniform(-spread, spread, size=n))
