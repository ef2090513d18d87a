"""Planted-partition stochastic block model."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..graph import Graph, Partition


def equal_sizes(n: int, k: int) -> tuple[int, ...]:
    """Nearest-integer equal split, larger blocks first (250, 7 -> 5 x 36 + 2 x 35)."""
    if k < 1 or n < k:
        raise ValueError(f"cannot split {n} nodes into {k} non-empty blocks")
    base, extra = divmod(n, k)
    return tuple(base + 1 if i < extra else base for i in range(k))


@dataclass(frozen=True)
class SbmConfig:
    n: int = 105
    k: int = 3
    p_intra: float = 0.75
    p_inter: float = 0.05
    seed: int = 0
    sizes: tuple[int, ...] = field(default=())

    def __post_init__(self):
        if not self.sizes:
            object.__setattr__(self, "sizes", equal_sizes(self.n, self.k))
        if len(self.sizes) != self.k or sum(self.sizes) != self.n:
            raise ValueError(f"block sizes {self.sizes} do not sum to n={self.n} over k={self.k}")
        if any(s < 1 for s in self.sizes):
            raise ValueError("block sizes must be positive")
        if not 0.0 <= self.p_inter <= self.p_intra <= 1.0:
            raise ValueError("need 0 <= p_inter <= p_intra <= 1")


def generate_sbm(config: SbmConfig) -> tuple[Graph, Partition]:
    """Sample every node pair independently; nodes are numbered block by block."""
    labels = np.repeat(np.arange(config.k), config.sizes)
    rng = np.random.default_rng(config.seed)
    iu, ju = np.triu_indices(config.n, k=1)
    same = labels[iu] == labels[ju]
    prob = np.where(same, config.p_intra, config.p_inter)
    keep = rng.random(len(iu)) < prob
    graph = Graph.from_edges(config.n, zip(iu[keep].tolist(), ju[keep].tolist()))
    return graph, Partition(tuple(int(c) for c in labels))
