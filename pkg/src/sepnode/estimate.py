"""Separation-edge estimators.

Every estimator assigns each edge a real score where larger means "more
likely inside one community". Scores below the threshold are labelled as
separation-edges (label 1).

The neighborhood connectivity of an edge ``(u, v)`` compares observed and
configuration-model expected edge counts between the distance-``r`` shells
of ``u`` and ``v``, for direct edges (path length 1) and for length-2 paths
through a midpoint. For shell radius ``r``:

* ``B`` is every node within distance ``r - 1`` of ``u`` or ``v``;
* ``X`` / ``Y`` are the distance-``r`` shells of ``u`` / ``v`` minus ``B``
  and minus the nodes the two shells share;
* midpoints ``W`` are all nodes outside ``B``, ``X`` and ``Y``.

The length-1 count is the number of ``X``-``Y`` edges; the length-2 count is
the number of distinct edges lying on some path ``x - w - y``. Each count is
centred on its expectation and divided by its maximum attainable value, so
every term lies in ``[-1, 1]``.

Expectations follow the configuration model on excess degrees: a node's
stubs already spent on known edges (the tested edge itself at radius 0,
edges into ``B`` beyond that) are not available to random rewiring. A
degree-1 endpoint therefore scores exactly 0 instead of drifting negative.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from os import PathLike
from typing import Sequence

import numpy as np

from .graph import Edge, Graph, NeighborhoodLayers, Partition, bfs_layers

ESTIMATORS = ("perfect", "modularity", "nu")


@dataclass(frozen=True)
class ConnectivityWeights:
    """Weights for combining the connectivity terms.

    ``w1[r]`` weighs the length-1 term at radius ``r`` (``r = 0..d``) and
    ``w2[r]`` the length-2 term (``r = 0..d-1``).
    """

    w1: tuple[float, ...] = (0.0, 0.5)
    w2: tuple[float, ...] = (0.5,)

    def __post_init__(self):
        w1, w2 = tuple(float(w) for w in self.w1), tuple(float(w) for w in self.w2)
        object.__setattr__(self, "w1", w1)
        object.__setattr__(self, "w2", w2)
        if len(w1) < 1 or len(w2) != len(w1) - 1:
            raise ValueError("need len(w1) == d + 1 and len(w2) == d")
        if any(w < 0 for w in w1 + w2):
            raise ValueError("weights must be non-negative")
        if w1[0] != 0.0:
            raise ValueError("w1[0] must be 0 (plain modularity term is excluded)")
        if abs(sum(w1) + sum(w2) - 1.0) > 1e-9:
            raise ValueError(f"weights must sum to 1, got {sum(w1) + sum(w2)}")

    @property
    def d(self) -> int:
        return len(self.w2)

    @classmethod
    def uniform(cls, d: int) -> "ConnectivityWeights":
        """Spread weight evenly over the ``2d`` admissible terms.

        ``uniform(1)`` gives the default 0.5 / 0.5 split.
        """
        if d < 1:
            raise ValueError("radius must be >= 1")
        w = 1.0 / (2 * d)
        return cls((0.0,) + (w,) * d, (w,) * d)

    @classmethod
    def from_flat(cls, values: Sequence[float]) -> "ConnectivityWeights":
        """Parse ``w1[0..d]`` followed by ``w2[0..d-1]`` (``2d + 1`` values)."""
        if len(values) % 2 == 0:
            raise ValueError("expected 2d + 1 weight values")
        d = len(values) // 2
        return cls(tuple(values[: d + 1]), tuple(values[d + 1 :]))

    def flat(self) -> list[float]:
        return list(self.w1) + list(self.w2)


@dataclass(frozen=True, eq=False)
class EdgeScoreMap:
    edges: tuple[Edge, ...]
    scores: np.ndarray
    labels: np.ndarray
    estimator: str
    threshold: float

    def __post_init__(self):
        if not (len(self.edges) == len(self.scores) == len(self.labels)):
            raise ValueError("edges, scores and labels must align")

    @classmethod
    def from_scores(cls, edges, scores, estimator: str, threshold: float = 0.0) -> "EdgeScoreMap":
        scores = np.asarray(scores, dtype=float)
        labels = (scores < threshold).astype(np.int8)
        for arr in (scores, labels):
            arr.flags.writeable = False
        return cls(tuple(edges), scores, labels, estimator, float(threshold))

    def _index(self) -> dict[Edge, int]:
        idx = self.__dict__.get("_idx")
        if idx is None:
            idx = {e: i for i, e in enumerate(self.edges)}
            object.__setattr__(self, "_idx", idx)
        return idx

    def label(self, u: int, v: int) -> int:
        return int(self.labels[self._index()[(min(u, v), max(u, v))]])

    def score(self, u: int, v: int) -> float:
        return float(self.scores[self._index()[(min(u, v), max(u, v))]])

    def separation_edges(self) -> list[Edge]:
        return [e for e, lab in zip(self.edges, self.labels) if lab]

    def to_csv(self, path: str | PathLike) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["u", "v", "score", "label"])
            for (u, v), s, lab in zip(self.edges, self.scores, self.labels):
                w.writerow([u, v, f"{s:.17g}", int(lab)])

    @classmethod
    def from_csv(cls, path: str | PathLike, estimator: str = "csv", threshold: float = 0.0) -> "EdgeScoreMap":
        edges, scores, labels = [], [], []
        with open(path, newline="") as fh:
            for row in csv.DictReader(fh):
                u, v = int(row["u"]), int(row["v"])
                edges.append((min(u, v), max(u, v)))
                scores.append(float(row["score"]))
                labels.append(int(row["label"]))
        out = cls.from_scores(edges, scores, estimator, threshold)
        if not np.array_equal(out.labels, np.asarray(labels, dtype=np.int8)):
            raise ValueError(f"{path}: labels disagree with scores at threshold {threshold}")
        return out


def perfect_estimator(graph: Graph, truth: Partition) -> EdgeScoreMap:
    if truth.n != graph.n:
        raise ValueError("partition does not cover the graph")
    scores = [1.0 if truth.same(u, v) else -1.0 for u, v in graph.edges]
    return EdgeScoreMap.from_scores(graph.edges, scores, "perfect", 0.0)


def modularity_matrix_entry(graph: Graph, u: int, v: int) -> float:
    m = graph.m
    if m == 0:
        raise ValueError("modularity matrix undefined for a graph without edges")
    d = graph.degrees
    a = 1.0 if graph.has_edge(u, v) else 0.0
    return (a - d[u] * d[v] / (2.0 * m)) / m


@dataclass(frozen=True)
class ConnectivityTerm:
    """Observed count, expectation and normaliser of one connectivity term."""

    observed: int
    expected: float
    possible: int

    @property
    def value(self) -> float:
        if self.possible == 0:
            return 0.0
        return (self.observed - self.expected) / self.possible


def _shells(graph, lu: NeighborhoodLayers, lv: NeighborhoodLayers, r: int):
    blocked = lu.ball(r - 1) | lv.ball(r - 1)
    nu = lu[r] - blocked
    nv = lv[r] - blocked
    shared = nu & nv
    return blocked, nu - shared, nv - shared


def connectivity_terms(
    graph: Graph,
    u: int,
    v: int,
    d: int,
    layers: tuple[NeighborhoodLayers, NeighborhoodLayers] | None = None,
) -> dict[tuple[int, int], ConnectivityTerm]:
    """All terms keyed by ``(path_length, radius)``.

    Length-1 terms for ``r = 0..d`` and length-2 terms for ``r = 0..d-1``.
    """
    if not graph.has_edge(u, v):
        raise ValueError(f"({u}, {v}) is not an edge")
    if layers is None:
        layers = (bfs_layers(graph, u, d), bfs_layers(graph, v, d))
    lu, lv = layers
    adj = graph.adjacency
    deg = graph.degrees
    two_m = 2.0 * graph.m
    out = {}
    for r in range(d + 1):
        blocked, xs, ys = _shells(graph, lu, lv, r)
        # stubs already spent on known edges: the tested edge at r = 0,
        # edges into the inner balls beyond that
        into_blocked = np.zeros(graph.n, dtype=np.int64)
        for b in blocked:
            for w in adj[b]:
                into_blocked[w] += 1
        if r == 0:
            into_blocked[u] += 1
            into_blocked[v] += 1
        excess = deg - into_blocked
        dx = float(sum(excess[x] for x in xs))
        dy = float(sum(excess[y] for y in ys))

        possible = len(xs) * len(ys)
        observed = sum(1 for x in xs for w in adj[x] if w in ys)
        expected = min(float(possible), dx * dy / two_m)
        out[(1, r)] = ConnectivityTerm(observed, expected, possible)

        if r == d:
            break
        mask = np.ones(graph.n, dtype=bool)
        for group in (blocked, xs, ys):
            if group:
                mask[list(group)] = False
        n_mid = int(mask.sum())
        possible = n_mid * (len(xs) + len(ys))
        hits_x: dict[int, int] = {}
        for x in xs:
            for w in adj[x]:
                if mask[w]:
                    hits_x[w] = hits_x.get(w, 0) + 1
        observed = 0
        for w, cx in hits_x.items():
            cy = sum(1 for y in adj[w] if y in ys)
            if cy:
                observed += cx + cy
        dw = excess[mask].astype(float)
        ex = dw * dx / two_m
        ey = dw * dy / two_m
        expected = float(np.sum(ex * np.minimum(1.0, ey) + ey * np.minimum(1.0, ex)))
        out[(2, r)] = ConnectivityTerm(observed, min(float(possible), expected), possible)
    return out


def neighborhood_connectivity(
    graph: Graph,
    edge: Edge,
    weights: ConnectivityWeights | None = None,
    layers: tuple[NeighborhoodLayers, NeighborhoodLayers] | None = None,
) -> float:
    weights = weights or ConnectivityWeights()
    u, v = edge
    terms = connectivity_terms(graph, u, v, weights.d, layers)
    total = sum(w * terms[(1, r)].value for r, w in enumerate(weights.w1) if w)
    total += sum(w * terms[(2, r)].value for r, w in enumerate(weights.w2) if w)
    return float(total)


def score_all_edges(
    graph: Graph,
    estimator: str = "nu",
    weights: ConnectivityWeights | None = None,
    threshold: float = 0.0,
    truth: Partition | None = None,
) -> EdgeScoreMap:
    if estimator == "perfect":
        if truth is None:
            raise ValueError("the perfect estimator needs a ground-truth partition")
        base = perfect_estimator(graph, truth)
        return EdgeScoreMap.from_scores(base.edges, base.scores, "perfect", threshold)
    if estimator == "modularity":
        scores = [modularity_matrix_entry(graph, u, v) for u, v in graph.edges]
        return EdgeScoreMap.from_scores(graph.edges, scores, "modularity", threshold)
    if estimator == "nu":
        weights = weights or ConnectivityWeights()
        layers = {}

        def get(x):
            if x not in layers:
                layers[x] = bfs_layers(graph, x, weights.d)
            return layers[x]

        scores = [
            neighborhood_connectivity(graph, (u, v), weights, (get(u), get(v)))
            for u, v in graph.edges
        ]
        return EdgeScoreMap.from_scores(graph.edges, scores, "nu", threshold)
    raise ValueError(f"unknown estimator {estimator!r}; choose from {ESTIMATORS}")


def r_squared(scores: EdgeScoreMap, truth: Partition, graph: Graph, fit: str = "ols") -> float:
    """R^2 of the rescaled score ``(s + 1) / 2`` against the same-community indicator.

    ``fit="ols"`` regresses the indicator on the rescaled score with an
    intercept (the squared correlation); ``fit="direct"`` uses the rescaled
    score itself as the prediction. Returns ``nan`` when undefined.
    """
    if not scores.edges:
        raise ValueError("R^2 needs at least one edge")
    if truth.n != graph.n:
        raise ValueError("partition does not cover the graph")
    y = np.array([1.0 if truth.same(u, v) else 0.0 for u, v in scores.edges])
    x = (np.asarray(scores.scores, dtype=float) + 1.0) / 2.0
    if fit == "direct":
        pred = x
    elif fit == "ols":
        xc = x - x.mean()
        sxx = float(xc @ xc)
        slope = float(xc @ (y - y.mean())) / sxx if sxx > 0 else 0.0
        pred = y.mean() + slope * xc
    else:
        raise ValueError(f"unknown fit {fit!r}")
    ss_res = float(np.sum((y - pred) ** 2))
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    if ss_tot == 0.0:
        return 1.0 if ss_res == 0.0 else float("nan")
    return 1.0 - ss_res / ss_tot
