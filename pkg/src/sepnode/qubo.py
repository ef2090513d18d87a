"""QUBO and PUBO builders.

All quadratic forms are stored folded: a symmetric ordered-pair sum
``sum_{i != j} c x_i x_j`` is kept as one unordered entry with coefficient
``2c``. The separation-node penalty therefore stores ``+4`` per
separation-labelled edge (weight 2 times two orderings).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations
from os import PathLike
from typing import Iterable, Mapping, Sequence

import numpy as np

from .estimate import EdgeScoreMap
from .graph import Graph, Partition

MAX_PATH_NODES = 12


@dataclass(frozen=True)
class QuboProblem:
    """Sparse quadratic form ``offset + sum h_i x_i + sum_{i<j} J_ij x_i x_j``."""

    num_vars: int
    linear: Mapping[int, float]
    quadratic: Mapping[tuple[int, int], float]
    offset: float = 0.0
    var_meaning: tuple = field(default=(), compare=False)

    def __post_init__(self):
        lin = {int(i): float(c) for i, c in self.linear.items() if c != 0}
        quad = {}
        for (i, j), c in self.quadratic.items():
            if i == j:
                raise ValueError(f"quadratic key ({i}, {j}) has equal endpoints")
            if c != 0:
                quad[(min(i, j), max(i, j))] = quad.get((min(i, j), max(i, j)), 0.0) + float(c)
        quad = {k: c for k, c in quad.items() if c != 0}
        for i in lin:
            if not 0 <= i < self.num_vars:
                raise ValueError(f"variable {i} out of range")
        for i, j in quad:
            if i < 0 or j >= self.num_vars:
                raise ValueError(f"variable pair ({i}, {j}) out of range")
        object.__setattr__(self, "linear", lin)
        object.__setattr__(self, "quadratic", quad)
        object.__setattr__(self, "offset", float(self.offset))
        if not self.var_meaning:
            object.__setattr__(self, "var_meaning", tuple(range(self.num_vars)))

    def energy(self, x: Sequence[int]) -> float:
        if len(x) != self.num_vars:
            raise ValueError(f"expected {self.num_vars} bits, got {len(x)}")
        e = self.offset
        for i, c in self.linear.items():
            if x[i]:
                e += c
        for (i, j), c in self.quadratic.items():
            if x[i] and x[j]:
                e += c
        return e

    def is_integral(self) -> bool:
        coeffs = [self.offset, *self.linear.values(), *self.quadratic.values()]
        return all(float(c).is_integer() for c in coeffs)

    def max_abs_coefficient(self) -> float:
        coeffs = [abs(c) for c in (*self.linear.values(), *self.quadratic.values())]
        return max(coeffs, default=0.0)

    def csr(self) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        """Linear vector plus symmetric CSR (indptr, indices, data) of couplings."""
        n = self.num_vars
        h = np.zeros(n, dtype=np.float64)
        for i, c in self.linear.items():
            h[i] = c
        rows: list[list[tuple[int, float]]] = [[] for _ in range(n)]
        for (i, j), c in sorted(self.quadratic.items()):
            rows[i].append((j, c))
            rows[j].append((i, c))
        indptr = np.zeros(n + 1, dtype=np.int64)
        indptr[1:] = np.cumsum([len(r) for r in rows])
        indices = np.empty(indptr[-1], dtype=np.int64)
        data = np.empty(indptr[-1], dtype=np.float64)
        for i, r in enumerate(rows):
            r.sort()
            indices[indptr[i] : indptr[i + 1]] = [j for j, _ in r]
            data[indptr[i] : indptr[i + 1]] = [c for _, c in r]
        return h, indptr, indices, data

    def to_text(self) -> str:
        lines = [f"{self.num_vars} {self.offset:.17g}"]
        for i in sorted(self.linear):
            lines.append(f"{i} {i} {self.linear[i]:.17g}")
        for i, j in sorted(self.quadratic):
            lines.append(f"{i} {j} {self.quadratic[(i, j)]:.17g}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "QuboProblem":
        rows = [ln.split() for ln in text.splitlines() if ln.strip() and not ln.lstrip().startswith("#")]
        if not rows or len(rows[0]) != 2:
            raise ValueError("missing 'n offset' header")
        try:
            n, offset = int(rows[0][0]), float(rows[0][1])
            linear: dict[int, float] = {}
            quadratic: dict[tuple[int, int], float] = {}
            for k, row in enumerate(rows[1:], 2):
                if len(row) != 3:
                    raise ValueError(f"line {k}: expected 'i j coeff'")
                i, j, c = int(row[0]), int(row[1]), float(row[2])
                if i == j:
                    linear[i] = linear.get(i, 0.0) + c
                else:
                    key = (min(i, j), max(i, j))
                    quadratic[key] = quadratic.get(key, 0.0) + c
        except ValueError as exc:
            raise ValueError(f"malformed QUBO text: {exc}") from None
        if n < 0:
            raise ValueError("negative variable count")
        return cls(n, linear, quadratic, offset)

    def save(self, path: str | PathLike) -> None:
        with open(path, "w") as fh:
            fh.write(self.to_text())

    @classmethod
    def load(cls, path: str | PathLike) -> "QuboProblem":
        with open(path) as fh:
            return cls.from_text(fh.read())


@dataclass(frozen=True)
class PuboTerm:
    coefficient: float
    vars: tuple[int, ...] = ()

    def __post_init__(self):
        vs = tuple(sorted(set(self.vars)))
        if len(vs) != len(self.vars):
            raise ValueError(f"duplicate variables in {self.vars}")
        object.__setattr__(self, "vars", vs)

    def value(self, x: Sequence[int]) -> float:
        return self.coefficient if all(x[i] for i in self.vars) else 0.0


def pubo_value(terms: Iterable[PuboTerm], x: Sequence[int]) -> float:
    return sum(t.value(x) for t in terms)


def _collect(acc: dict[tuple[int, ...], float]) -> list[PuboTerm]:
    return [PuboTerm(c, vs) for vs, c in sorted(acc.items(), key=lambda kv: (len(kv[0]), kv[0])) if c != 0]


# -- separation-node QUBO ---------------------------------------------------


def build_separation_qubo(graph: Graph, labels: EdgeScoreMap) -> QuboProblem:
    """Objective ``2 P(x) - sum x_i``; ``x_i = 0`` marks a separation node."""
    if set(labels.edges) != set(graph.edges):
        missing = sorted(set(graph.edges) - set(labels.edges))
        raise ValueError(f"no label for edge {missing[0] if missing else '?'}")
    quad = {e: 4.0 for e in labels.separation_edges()}
    return QuboProblem(graph.n, {i: -1.0 for i in range(graph.n)}, quad)


def separation_penalty(graph: Graph, labels: EdgeScoreMap, x: Sequence[int]) -> int:
    """P(x) summed over ordered node pairs, straight from its definition."""
    a = graph.adjacency_matrix()
    total = 0
    for i in range(graph.n):
        for j in range(graph.n):
            if a[i, j] and x[i] and x[j] and labels.label(i, j):
                total += 1
    return total


def max_clique_qubo(graph: Graph) -> QuboProblem:
    quad = {(i, j): 4.0 for i, j in combinations(range(graph.n), 2) if not graph.has_edge(i, j)}
    return QuboProblem(graph.n, {i: -1.0 for i in range(graph.n)}, quad)


# -- modularity baselines ---------------------------------------------------


def _modularity_matrix(graph: Graph) -> np.ndarray:
    if graph.m == 0:
        raise ValueError("modularity undefined for a graph without edges")
    d = graph.degrees.astype(float)
    return graph.adjacency_matrix() - np.outer(d, d) / (2.0 * graph.m)


def modularity_qubo_k2(graph: Graph) -> QuboProblem:
    """Minimisation form of the two-community modularity objective.

    The energy of ``x`` is ``-(1/2m) sum_ij B_ij x_i x_j``, which is half the
    (negated) modularity of the bipartition ``{x=0}, {x=1}``.
    """
    b = _modularity_matrix(graph)
    scale = 1.0 / (2.0 * graph.m)
    linear = {i: -b[i, i] * scale for i in range(graph.n)}
    quad = {(i, j): -2.0 * b[i, j] * scale for i, j in combinations(range(graph.n), 2)}
    return QuboProblem(graph.n, linear, quad)


def onehot_penalty_bound(graph: Graph) -> float:
    """Largest energy change one node's variables can cause in the one-hot QUBO.

    Any penalty weight strictly above this keeps every minimiser one-hot:
    repairing a node with no or several active communities then always
    lowers the energy.
    """
    b = np.abs(_modularity_matrix(graph))
    diag = np.diag(b)
    return float(np.max(diag + 2.0 * (b.sum(axis=1) - diag)) / (2.0 * graph.m))


def modularity_qubo_onehot(
    graph: Graph,
    k: int,
    clamp: Mapping[int, int] | None = None,
    penalty_weight: float = 2.0,
) -> QuboProblem:
    """One-hot modularity QUBO over the unclamped nodes.

    Variable ``f * k + l`` means "the ``f``-th free node is in community
    ``l``"; ``var_meaning`` lists the ``(node, community)`` pairs.
    """
    if k < 2:
        raise ValueError("one-hot encoding needs k >= 2")
    if penalty_weight <= 0:
        raise ValueError("penalty weight must be positive")
    clamp = dict(clamp or {})
    for v, c in clamp.items():
        if not 0 <= c < k:
            raise ValueError(f"clamped community {c} of node {v} not in 0..{k - 1}")
        if not 0 <= v < graph.n:
            raise ValueError(f"clamped node {v} out of range")
    b = _modularity_matrix(graph)
    scale = 1.0 / (2.0 * graph.m)
    free = [v for v in range(graph.n) if v not in clamp]
    rank = {v: f for f, v in enumerate(free)}
    fixed = sorted(clamp)

    offset = 0.0
    linear: dict[int, float] = {}
    quad: dict[tuple[int, int], float] = {}

    def add_lin(i, c):
        linear[i] = linear.get(i, 0.0) + c

    for i in fixed:
        for j in fixed:
            if clamp[i] == clamp[j]:
                offset -= b[i, j] * scale
    for v in free:
        base = rank[v] * k
        for l in range(k):
            add_lin(base + l, -b[v, v] * scale)
        for j in fixed:
            add_lin(base + clamp[j], -2.0 * b[v, j] * scale)
    for v, w in combinations(free, 2):
        c = -2.0 * b[v, w] * scale
        for l in range(k):
            quad[(rank[v] * k + l, rank[w] * k + l)] = c
    # lambda * (1 - sum_l x_l)^2 with x^2 = x
    for v in free:
        base = rank[v] * k
        offset += penalty_weight
        for l in range(k):
            add_lin(base + l, -penalty_weight)
        for l1, l2 in combinations(range(k), 2):
            quad[(base + l1, base + l2)] = quad.get((base + l1, base + l2), 0.0) + 2.0 * penalty_weight
    meaning = tuple((v, l) for v in free for l in range(k))
    return QuboProblem(len(free) * k, linear, quad, offset, meaning)


# -- surjectivity / injectivity terms --------------------------------------


def surjectivity_term(graph: Graph, truth: Partition, x: Sequence[int], node: int) -> int:
    """Number of non-separation nodes sharing ``node``'s community."""
    c = truth[node]
    return sum(1 for j in range(graph.n) if truth[j] == c and x[j])


def surjectivity_polynomial(graph: Graph, truth: Partition, node: int) -> list[PuboTerm]:
    c = truth[node]
    return [PuboTerm(1.0, (j,)) for j in range(graph.n) if truth[j] == c]


def _intra_paths(graph: Graph, truth: Partition, u: int, v: int) -> list[tuple[int, ...]]:
    if graph.n > MAX_PATH_NODES:
        raise ValueError(f"path enumeration limited to n <= {MAX_PATH_NODES}")
    if u == v:
        raise ValueError("endpoints must differ")
    if not truth.same(u, v):
        raise ValueError(f"nodes {u} and {v} are in different communities")
    c = truth[u]
    paths = []
    stack = [(u, (u,))]
    while stack:
        node, path = stack.pop()
        for w in graph.adjacency[node]:
            if truth[w] != c or w in path:
                continue
            if w == v:
                paths.append(path + (v,))
            else:
                stack.append((w, path + (w,)))
    return sorted(paths)


def injectivity_term(graph: Graph, truth: Partition, x: Sequence[int], u: int, v: int) -> int:
    """Simple intra-community ``u``-``v`` paths whose nodes all carry flag 1."""
    return sum(1 for p in _intra_paths(graph, truth, u, v) if all(x[w] for w in p))


def injectivity_polynomial(graph: Graph, truth: Partition, u: int, v: int) -> list[PuboTerm]:
    acc: dict[tuple[int, ...], float] = {}
    for p in _intra_paths(graph, truth, u, v):
        key = tuple(sorted(p))
        acc[key] = acc.get(key, 0.0) + 1.0
    return _collect(acc)


def threshold_penalty(
    f_terms: Sequence[PuboTerm], m_bound: int, ancilla_offset: int
) -> tuple[list[PuboTerm], list[PuboTerm], int]:
    """Penalty pair forcing ``f(x) > 0`` for ``f`` with range ``0..m_bound``.

    ``P1 = (f - sum_i 2^i y_i)^2`` and ``P2 = prod_i (1 - y_i)`` with
    ancillas ``y_i`` at indices ``ancilla_offset + i``. Their sum minimised
    over ``y`` is 0 exactly when ``f(x) > 0``.
    """
    if m_bound < 1:
        raise ValueError("m_bound must be >= 1")
    num_anc = math.ceil(math.log2(m_bound)) + 1
    ys = [ancilla_offset + i for i in range(num_anc)]
    # f - sum 2^i y_i as a list of (coef, varset)
    lin = [(t.coefficient, frozenset(t.vars)) for t in f_terms]
    lin += [(-(2.0**i), frozenset([y])) for i, y in enumerate(ys)]
    p1: dict[tuple[int, ...], float] = {}
    for c1, s1 in lin:
        for c2, s2 in lin:
            key = tuple(sorted(s1 | s2))
            p1[key] = p1.get(key, 0.0) + c1 * c2
    p2: dict[tuple[int, ...], float] = {}
    for size in range(num_anc + 1):
        for sub in combinations(ys, size):
            p2[sub] = p2.get(sub, 0.0) + (-1.0) ** size
    return _collect(p1), _collect(p2), num_anc
