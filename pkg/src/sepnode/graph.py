"""Graph and partition containers, text I/O, components and BFS layers."""

from __future__ import annotations

import re
from bisect import bisect_left
from collections import deque
from dataclasses import dataclass, field
from os import PathLike
from typing import Iterable, Sequence

import numpy as np

Edge = tuple[int, int]


class GraphFormatError(ValueError):
    """Raised for malformed edge-list or partition files."""


def _edge(u: int, v: int) -> Edge:
    return (u, v) if u < v else (v, u)


@dataclass(frozen=True)
class Graph:
    """Immutable simple undirected graph on nodes ``0..n-1``.

    Edges are stored as sorted ``(u, v)`` tuples with ``u < v``, in
    ascending order, so iteration order is deterministic.
    """

    n: int
    edges: tuple[Edge, ...]
    adjacency: tuple[tuple[int, ...], ...] = field(repr=False, compare=False)
    degrees: np.ndarray = field(repr=False, compare=False)

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[Sequence[int]]) -> "Graph":
        seen = set()
        for e in edges:
            u, v = int(e[0]), int(e[1])
            if u == v:
                raise ValueError(f"self-loop on node {u}")
            if u < 0 or v < 0 or u >= n or v >= n:
                raise ValueError(f"edge ({u}, {v}) out of range for n={n}")
            seen.add(_edge(u, v))
        ordered = tuple(sorted(seen))
        adj: list[list[int]] = [[] for _ in range(n)]
        for u, v in ordered:
            adj[u].append(v)
            adj[v].append(u)
        adjacency = tuple(tuple(sorted(a)) for a in adj)
        degrees = np.fromiter((len(a) for a in adjacency), dtype=np.int64, count=n)
        degrees.flags.writeable = False
        return cls(n, ordered, adjacency, degrees)

    @property
    def m(self) -> int:
        return len(self.edges)

    def has_edge(self, u: int, v: int) -> bool:
        nbrs = self.adjacency[u]
        i = bisect_left(nbrs, v)
        return i < len(nbrs) and nbrs[i] == v

    def neighbors(self, u: int) -> tuple[int, ...]:
        return self.adjacency[u]

    def adjacency_matrix(self) -> np.ndarray:
        a = np.zeros((self.n, self.n), dtype=np.int64)
        for u, v in self.edges:
            a[u, v] = a[v, u] = 1
        return a

    def relabel(self, perm: Sequence[int]) -> "Graph":
        """Return the isomorphic graph with node ``i`` renamed ``perm[i]``."""
        return Graph.from_edges(self.n, ((perm[u], perm[v]) for u, v in self.edges))


@dataclass(frozen=True)
class Partition:
    """Total node -> community assignment with dense ids ``0..k-1``."""

    assignment: tuple[int, ...]

    def __post_init__(self):
        used = set(self.assignment)
        if used and used != set(range(len(used))):
            raise ValueError("community ids must be dense 0..k-1")

    @classmethod
    def from_labels(cls, labels: Iterable[int]) -> "Partition":
        """Build a partition from arbitrary labels, remapped in order of first use."""
        remap: dict[int, int] = {}
        out = []
        for lab in labels:
            if lab not in remap:
                remap[lab] = len(remap)
            out.append(remap[lab])
        return cls(tuple(out))

    @classmethod
    def from_communities(cls, n: int, communities: Iterable[Iterable[int]]) -> "Partition":
        labels = [-1] * n
        for c, nodes in enumerate(communities):
            for v in nodes:
                if labels[v] != -1:
                    raise ValueError(f"node {v} appears in two communities")
                labels[v] = c
        if -1 in labels:
            raise ValueError(f"node {labels.index(-1)} is unassigned")
        return cls.from_labels(labels)

    @property
    def n(self) -> int:
        return len(self.assignment)

    @property
    def k(self) -> int:
        return max(self.assignment) + 1 if self.assignment else 0

    def __getitem__(self, v: int) -> int:
        return self.assignment[v]

    def same(self, u: int, v: int) -> bool:
        return self.assignment[u] == self.assignment[v]

    def communities(self) -> list[set[int]]:
        out: list[set[int]] = [set() for _ in range(self.k)]
        for v, c in enumerate(self.assignment):
            out[c].add(v)
        return out


@dataclass(frozen=True)
class NeighborhoodLayers:
    source: int
    layers: tuple[frozenset[int], ...]

    def __len__(self) -> int:
        return len(self.layers)

    def __getitem__(self, r: int) -> frozenset[int]:
        return self.layers[r] if r < len(self.layers) else frozenset()

    def ball(self, r: int) -> set[int]:
        """All nodes within distance ``r`` (empty for ``r < 0``)."""
        out: set[int] = set()
        for layer in self.layers[: max(r + 1, 0)]:
            out |= layer
        return out


def _parse_ints(line: str, lineno: int, width: int, path, ids: int = 2) -> list[int]:
    parts = line.split()
    if len(parts) != width:
        if width == 2 and len(parts) == 3:
            raise GraphFormatError(f"{path}:{lineno}: weighted edges are not supported")
        raise GraphFormatError(f"{path}:{lineno}: expected {width} integers, got {line!r}")
    try:
        vals = [int(p) for p in parts]
    except ValueError:
        raise GraphFormatError(f"{path}:{lineno}: non-integer token in {line!r}") from None
    if any(x < 0 for x in vals[:ids]):
        raise GraphFormatError(f"{path}:{lineno}: negative node id")
    return vals


_NODES_RE = re.compile(r"^#\s*nodes\s+(\d+)\s*$")


def _data_lines(path, meta: dict | None = None):
    with open(path, encoding="ascii") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.strip()
            if not line:
                continue
            if line.startswith("#"):
                hit = _NODES_RE.match(line)
                if hit and meta is not None:
                    meta["nodes"] = int(hit.group(1))
                continue
            yield lineno, line


def load_edge_list(path: str | PathLike) -> Graph:
    """Read a whitespace separated ``u v`` edge list.

    ``n`` is the largest node id plus one, or the value of a ``# nodes N``
    comment when that is larger; ids that never appear become isolated
    nodes. Reversed and repeated lines collapse into one edge.
    """
    edges = []
    meta: dict = {}
    for lineno, line in _data_lines(path, meta):
        u, v = _parse_ints(line, lineno, 2, path)
        if u == v:
            raise GraphFormatError(f"{path}:{lineno}: self-loop on node {u}")
        edges.append((u, v))
    n = max(max((max(e) for e in edges), default=-1) + 1, meta.get("nodes", 0))
    return Graph.from_edges(n, edges)


def write_edge_list(graph: Graph, path: str | PathLike, header: str | None = None) -> None:
    with open(path, "w", encoding="ascii") as fh:
        if header:
            for line in header.splitlines():
                fh.write(f"# {line}\n")
        fh.write(f"# nodes {graph.n}\n")
        for u, v in graph.edges:
            fh.write(f"{u} {v}\n")


def load_partition(path: str | PathLike, graph: Graph) -> Partition:
    """Read ``node community`` lines; community ids are remapped densely.

    The remap follows node order, so the community of node 0 becomes 0.
    """
    labels: dict[int, int] = {}
    for lineno, line in _data_lines(path):
        node, comm = _parse_ints(line, lineno, 2, path, ids=1)
        if node >= graph.n:
            raise GraphFormatError(f"{path}:{lineno}: node {node} out of range (n={graph.n})")
        labels[node] = comm
    missing = [v for v in range(graph.n) if v not in labels]
    if missing:
        raise GraphFormatError(f"{path}: missing community for node {missing[0]}")
    return Partition.from_labels(labels[v] for v in range(graph.n))


def write_partition(partition: Partition, path: str | PathLike, header: str | None = None) -> None:
    with open(path, "w", encoding="ascii") as fh:
        if header:
            for line in header.splitlines():
                fh.write(f"# {line}\n")
        for v, c in enumerate(partition.assignment):
            fh.write(f"{v} {c}\n")


def connected_components(graph: Graph, retained: Iterable[int]) -> list[set[int]]:
    """Components of the subgraph induced on ``retained``, ordered by smallest node."""
    keep = set(retained)
    seen: set[int] = set()
    comps = []
    for s in sorted(keep):
        if s in seen:
            continue
        comp = {s}
        seen.add(s)
        queue = deque([s])
        while queue:
            u = queue.popleft()
            for w in graph.adjacency[u]:
                if w in keep and w not in seen:
                    seen.add(w)
                    comp.add(w)
                    queue.append(w)
        comps.append(comp)
    return comps


def bfs_layers(graph: Graph, source: int, max_r: int) -> NeighborhoodLayers:
    """Distance layers ``N_0(source), ..., N_max_r(source)``.

    The list stops early once the reachable part of the graph is exhausted.
    """
    if not 0 <= source < graph.n:
        raise IndexError(f"source {source} out of range (n={graph.n})")
    if max_r < 0:
        raise ValueError("max_r must be non-negative")
    layers = [frozenset([source])]
    seen = {source}
    frontier = [source]
    for _ in range(max_r):
        nxt = set()
        for u in frontier:
            for w in graph.adjacency[u]:
                if w not in seen:
                    nxt.add(w)
        if not nxt:
            break
        seen |= nxt
        layers.append(frozenset(nxt))
        frontier = sorted(nxt)
    return NeighborhoodLayers(source, tuple(layers))
