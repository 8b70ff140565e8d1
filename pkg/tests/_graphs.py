"""Exhaustive random-graph enumeration used as an exact oracle."""
import functools
import itertools

import numpy as np


@functools.lru_cache(maxsize=None)
def _er_graphs(N):
    """Edge count and vertex-0 cluster size of every graph on N labelled vertices."""
    edges = list(itertools.combinations(range(N), 2))
    E = len(edges)
    masks = np.arange(2**E, dtype=np.int64)
    present = ((masks[:, None] >> np.arange(E)) & 1).astype(bool)
    reach = np.ones(masks.size, dtype=np.int64)
    for _ in range(N):
        new = reach.copy()
        for e, (u, v) in enumerate(edges):
            on = present[:, e]
            new |= np.where(on & ((reach >> u) & 1).astype(bool), 1 << v, 0)
            new |= np.where(on & ((reach >> v) & 1).astype(bool), 1 << u, 0)
        reach = new
    sizes = np.array([bin(r).count("1") for r in range(2**N)])[reach]
    return E, present.sum(axis=1), sizes


def er_cluster_pmf(N, p):
    """Law of the size of vertex 0's cluster in G(N, p), by enumerating every graph."""
    E, n_edges, sizes = _er_graphs(N)
    weight = p**n_edges * (1 - p) ** (E - n_edges)
    return np.bincount(sizes, weights=weight, minlength=N + 1)[1:]
