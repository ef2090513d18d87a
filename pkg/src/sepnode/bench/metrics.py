"""Partition quality metrics."""

from __future__ import annotations

from collections import Counter
from math import log
from typing import Collection

import numpy as np

from ..graph import Graph, Partition


def modularity(graph: Graph, partition: Partition) -> float:
    """Newman modularity ``sum_c e_c / m - (D_c / 2m)^2``."""
    if graph.m == 0:
        raise ValueError("modularity undefined for a graph without edges")
    if partition.n != graph.n:
        raise ValueError("partition does not cover the graph")
    k = partition.k
    inside = np.zeros(k)
    degree = np.zeros(k)
    labels = partition.assignment
    for u, v in graph.edges:
        if labels[u] == labels[v]:
            inside[labels[u]] += 1
    np.add.at(degree, np.asarray(labels, dtype=np.int64), graph.degrees.astype(float))
    m = float(graph.m)
    return float(np.sum(inside / m - (degree / (2.0 * m)) ** 2))


def _entropy(counts, n) -> float:
    return -sum(c / n * log(c / n) for c in counts if c)


def nmi(a: Partition, b: Partition) -> float:
    """Mutual information over the arithmetic mean of the two entropies.

    Two single-community partitions score 1.0.
    """
    if a.n != b.n:
        raise ValueError(f"partitions cover {a.n} and {b.n} nodes")
    n = a.n
    if n == 0:
        raise ValueError("empty partitions")
    joint = Counter(zip(a.assignment, b.assignment))
    ca = Counter(a.assignment)
    cb = Counter(b.assignment)
    ha, hb = _entropy(ca.values(), n), _entropy(cb.values(), n)
    if ha == 0.0 and hb == 0.0:
        return 1.0
    mi = 0.0
    for (x, y), c in joint.items():
        mi += c / n * log(c * n / (ca[x] * cb[y]))
    return float(min(1.0, max(0.0, mi / ((ha + hb) / 2.0))))


def size_deviation(found: Collection[int], best_known: Collection[int]) -> float:
    if len(best_known) == 0:
        raise ValueError("best-known separation set is empty")
    return len(found) / len(best_known)
