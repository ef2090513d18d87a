"""End-to-end detection: estimate, solve, split into cores, assign the rest."""

from __future__ import annotations

import heapq
import json
import time
from dataclasses import asdict, dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .estimate import ConnectivityWeights, EdgeScoreMap, score_all_edges
from .graph import Graph, Partition, connected_components
from .qubo import build_separation_qubo, modularity_qubo_onehot, onehot_penalty_bound
from .solve import AnnealSchedule, anneal, exhaustive

ASSIGN_METHODS = ("greedy", "clamped")
SOLVERS = ("anneal", "exhaustive")
AUTO_PENALTY_MARGIN = 1.05


class DegenerateSeparation(RuntimeError):
    """The separation step produced no usable community structure."""

    def __init__(self, message: str, sep_set: Sequence[int], stats: dict):
        super().__init__(message)
        self.sep_set = tuple(sep_set)
        self.stats = stats


@dataclass(frozen=True)
class SeparationResult:
    sep_set: frozenset[int]
    cores: tuple[frozenset[int], ...]
    refinement: tuple[int | None, ...]
    is_valid: bool
    is_injective: bool
    is_surjective: bool

    @property
    def is_bijective(self) -> bool:
        return self.is_valid and self.is_injective and self.is_surjective


def validate_separation_set(graph: Graph, truth: Partition, sep_set: Iterable[int]) -> SeparationResult:
    """Check whether removing ``sep_set`` leaves only single-community components.

    ``refinement[i]`` is the community containing core ``i``, or ``None``
    when the core straddles communities. Injectivity and surjectivity are
    reported for the refinement map and are only meaningful when valid.
    """
    sep = frozenset(sep_set)
    cores = tuple(frozenset(c) for c in connected_components(graph, set(range(graph.n)) - sep))
    refinement = []
    for core in cores:
        comms = {truth[v] for v in core}
        refinement.append(comms.pop() if len(comms) == 1 else None)
    valid = all(c is not None for c in refinement)
    hit = [c for c in refinement if c is not None]
    injective = valid and len(hit) == len(set(hit))
    surjective = valid and set(hit) == set(range(truth.k))
    return SeparationResult(sep, cores, tuple(refinement), valid, injective, surjective)


def greedy_assign(
    graph: Graph,
    cores: Sequence[Iterable[int]],
    sep_set: Iterable[int],
    stats: dict | None = None,
) -> Partition:
    """Grow the cores by repeatedly placing the separation node with the most edges into one community.

    Ties go to the higher count, then the lower node id, then the lower
    community id. Separation nodes that never touch an assigned node are
    grouped into new communities, one per connected leftover component.
    """
    labels = [-1] * graph.n
    for c, core in enumerate(cores):
        for v in core:
            labels[v] = c
    k = len(cores)
    pending = set(sep_set)
    if any(labels[v] != -1 for v in pending) or any(lab == -1 for v, lab in enumerate(labels) if v not in pending):
        raise ValueError("cores and sep_set must partition the node set")

    counts: dict[int, dict[int, int]] = {s: {} for s in pending}
    heap: list[tuple[int, int, int]] = []
    updates = 0
    rounds = 0

    def bump(s, c):
        nonlocal updates
        cnt = counts[s].get(c, 0) + 1
        counts[s][c] = cnt
        updates += 1
        heapq.heappush(heap, (-cnt, s, c))

    for s in sorted(pending):
        for w in graph.adjacency[s]:
            if labels[w] != -1:
                bump(s, labels[w])

    while pending:
        while heap:
            neg, s, c = heapq.heappop(heap)
            if s in pending and counts[s].get(c) == -neg:
                break
        else:
            # nothing left touches an assigned node
            for comp in connected_components(graph, pending):
                for v in comp:
                    labels[v] = k
                k += 1
                rounds += 1
            pending.clear()
            break
        labels[s] = c
        pending.discard(s)
        rounds += 1
        for w in graph.adjacency[s]:
            if w in pending:
                bump(w, c)

    if stats is not None:
        stats.update(greedy_updates=updates, greedy_rounds=rounds)
    return Partition(tuple(labels))


def _core_labels(graph: Graph, cores) -> list[int]:
    labels = [-1] * graph.n
    for c, core in enumerate(cores):
        for v in core:
            labels[v] = c
    return labels


def clamped_modularity_assign(
    graph: Graph,
    cores: Sequence[Iterable[int]],
    sep_set: Iterable[int],
    schedule: AnnealSchedule | None = None,
    penalty_weight: float | str = 2.0,
    solver: str = "anneal",
    backend: str | None = None,
    stats: dict | None = None,
) -> Partition:
    """Assign separation nodes by modularity maximisation with the cores held fixed.

    ``penalty_weight="auto"`` uses 1.05 times :func:`onehot_penalty_bound`,
    which is far below the fixed default on large graphs and lets single-flip
    annealing move nodes between communities at useful temperatures.
    """
    cores = [set(c) for c in cores]
    if not cores:
        raise ValueError("clamped assignment needs at least one core")
    sep = sorted(set(sep_set))
    labels = _core_labels(graph, cores)
    k = len(cores)
    if stats is not None:
        stats["clamped_vars"] = len(sep) * k
    if not sep:
        return Partition(tuple(labels))
    if k == 1 or graph.m == 0:
        for v in sep:
            labels[v] = 0
        return Partition(tuple(labels))

    if penalty_weight == "auto":
        penalty_weight = AUTO_PENALTY_MARGIN * onehot_penalty_bound(graph)
    clamp = {v: labels[v] for v in range(graph.n) if labels[v] != -1}
    if stats is not None:
        stats["penalty_weight"] = float(penalty_weight)
    problem = modularity_qubo_onehot(graph, k, clamp, penalty_weight)
    if solver == "exhaustive":
        result = exhaustive(problem, backend=backend)
    else:
        result = anneal(problem, schedule, backend=backend)
    rows = np.asarray(result.best_x).reshape(len(sep), k)
    broken = []
    for v, row in zip(sep, rows):
        if row.sum() == 1:
            labels[v] = int(np.argmax(row))
        else:
            broken.append(v)
    if broken:
        a = graph.adjacency_matrix().astype(float)
        d = graph.degrees.astype(float)
        two_m = 2.0 * graph.m
        for v in broken:
            gain = np.zeros(k)
            for j in range(graph.n):
                if labels[j] >= 0 and j != v:
                    gain[labels[j]] += a[v, j] - d[v] * d[j] / two_m
            labels[v] = int(np.argmax(gain))
    if stats is not None:
        stats["clamped_repaired"] = len(broken)
        stats["clamped_energy"] = result.best_energy
    return Partition(tuple(labels))


@dataclass
class DetectConfig:
    estimator: str = "nu"
    weights: ConnectivityWeights = field(default_factory=ConnectivityWeights)
    threshold: float = 0.0
    solver: str = "anneal"
    schedule: AnnealSchedule = field(default_factory=AnnealSchedule)
    assign: str = "greedy"
    penalty_weight: float | str = 2.0
    backend: str | None = None
    jobs: int = 1

    def to_dict(self) -> dict:
        out = asdict(self)
        out["weights"] = self.weights.flat()
        out["radius"] = self.weights.d
        return out


@dataclass(frozen=True)
class DetectionOutput:
    partition: Partition
    sep_set: tuple[int, ...]
    method: str
    stats: dict
    config: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "partition": {str(v): c for v, c in enumerate(self.partition.assignment)},
            "num_communities": self.partition.k,
            "sep_set": list(self.sep_set),
            "method": self.method,
            "stats": self.stats,
            "config": self.config,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, default=float)


def separation_step(graph: Graph, labels: EdgeScoreMap, config: DetectConfig, stats: dict):
    t0 = time.perf_counter()
    problem = build_separation_qubo(graph, labels)
    stats["qubo_vars"] = problem.num_vars
    stats["qubo_quadratic_terms"] = len(problem.quadratic)
    if config.solver == "exhaustive":
        result = exhaustive(problem, backend=config.backend)
    elif config.solver == "anneal":
        result = anneal(problem, config.schedule, backend=config.backend, jobs=config.jobs)
    else:
        raise ValueError(f"unknown solver {config.solver!r}")
    stats["time_solve_s"] = time.perf_counter() - t0
    stats["qubo_energy"] = result.best_energy
    stats["solver_evaluations"] = result.evaluations
    stats["solver_backend"] = result.backend
    return [v for v in range(graph.n) if result.best_x[v] == 0]


def detect(graph: Graph, config: DetectConfig | None = None, truth: Partition | None = None) -> DetectionOutput:
    """Run estimate -> QUBO -> solve -> components -> assignment.

    Raises :class:`DegenerateSeparation` when every edge is labelled a
    separation-edge or no core survives.
    """
    config = config or DetectConfig()
    if graph.n == 0:
        raise ValueError("graph is empty")
    if config.assign not in ASSIGN_METHODS:
        raise ValueError(f"unknown assignment method {config.assign!r}")
    stats: dict = {"n": graph.n, "m": graph.m}

    t0 = time.perf_counter()
    labels = score_all_edges(graph, config.estimator, config.weights, config.threshold, truth)
    stats["time_estimate_s"] = time.perf_counter() - t0
    stats["separation_edges"] = int(labels.labels.sum())

    sep = separation_step(graph, labels, config, stats)
    stats["sep_size"] = len(sep)

    t0 = time.perf_counter()
    cores = connected_components(graph, set(range(graph.n)) - set(sep))
    stats["time_components_s"] = time.perf_counter() - t0
    stats["cores"] = len(cores)
    if not cores:
        raise DegenerateSeparation("every node was flagged as a separation node", sep, stats)
    if graph.m and stats["separation_edges"] == graph.m:
        raise DegenerateSeparation("every edge was labelled a separation-edge", sep, stats)

    t0 = time.perf_counter()
    if config.assign == "greedy":
        part = greedy_assign(graph, cores, sep, stats)
    else:
        schedule = config.schedule
        part = clamped_modularity_assign(
            graph, cores, sep, schedule, config.penalty_weight, backend=config.backend, stats=stats
        )
    stats["time_assign_s"] = time.perf_counter() - t0
    stats["communities"] = part.k
    return DetectionOutput(part, tuple(sep), config.assign, stats, config.to_dict())
