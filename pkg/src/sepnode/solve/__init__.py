"""Classical QUBO solvers: simulated annealing and exhaustive search.

The inner loops live in a compiled extension when it is available; set
``SEPNODE_PURE_PYTHON=1`` to force the pure Python fallback.
"""

from __future__ import annotations

import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from ..qubo import PuboTerm, QuboProblem
from . import _pykernels

try:
    if os.environ.get("SEPNODE_PURE_PYTHON"):
        raise ImportError("pure Python requested")
    from . import _kernels as _native
except ImportError:
    _native = None

BACKENDS = ("native", "python") if _native is not None else ("python",)
DEFAULT_BACKEND = BACKENDS[0]

MAX_EXHAUSTIVE_VARS = 24
MAX_PUBO_VARS = 20


def _kernels(backend: str | None):
    backend = backend or DEFAULT_BACKEND
    if backend == "native":
        if _native is None:
            raise RuntimeError("compiled kernels are not available")
        return _native
    if backend == "python":
        return _pykernels
    raise ValueError(f"unknown backend {backend!r}")


@dataclass(frozen=True)
class AnnealSchedule:
    initial_temp: float | None = None
    final_temp: float = 1e-3
    sweeps: int = 1000
    restarts: int = 10
    seed: int = 0

    def __post_init__(self):
        if self.final_temp <= 0:
            raise ValueError("final_temp must be positive")
        if self.initial_temp is not None and self.initial_temp < self.final_temp:
            raise ValueError("initial_temp must be >= final_temp")
        if self.sweeps < 1 or self.restarts < 1:
            raise ValueError("sweeps and restarts must be >= 1")

    def temperatures(self, problem: QuboProblem) -> np.ndarray:
        """Geometric cooling from ``initial_temp`` (default max |coefficient|)."""
        t0 = self.initial_temp
        if t0 is None:
            t0 = max(problem.max_abs_coefficient(), self.final_temp)
        if self.sweeps == 1:
            return np.array([float(t0)])
        return np.geomspace(t0, self.final_temp, self.sweeps)


@dataclass(frozen=True, eq=False)
class SolverResult:
    best_x: np.ndarray
    best_energy: float
    energy_trace: tuple[float, ...] = ()
    evaluations: int = 0
    solver: str = "anneal"
    backend: str = DEFAULT_BACKEND
    meta: dict = field(default_factory=dict, compare=False)

    @property
    def bitstring(self) -> str:
        return "".join(str(int(b)) for b in self.best_x)

    def to_dict(self) -> dict:
        return {
            "solver": self.solver,
            "backend": self.backend,
            "x": self.bitstring,
            "energy": self.best_energy,
            "energy_trace": list(self.energy_trace),
            "evaluations": self.evaluations,
            **({"meta": self.meta} if self.meta else {}),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def _restart(problem, arrays, temps, seed, kern):
    h, indptr, indices, data = arrays
    n = problem.num_vars
    rng = np.random.default_rng(seed)
    x0 = rng.integers(0, 2, size=n, dtype=np.int8)
    order = rng.permuted(np.tile(np.arange(n, dtype=np.int64), (len(temps), 1)), axis=1)
    uniforms = rng.random((len(temps), n))
    e0 = problem.energy(x0) - problem.offset
    best, best_e, _, evals = kern.anneal_run(h, indptr, indices, data, x0, order, uniforms, temps, e0)
    return np.asarray(best, dtype=np.int8), best_e, evals


def anneal(
    problem: QuboProblem,
    schedule: AnnealSchedule | None = None,
    backend: str | None = None,
    jobs: int = 1,
) -> SolverResult:
    """Single-flip Metropolis annealing with independent restarts.

    Restart ``r`` draws all its randomness from ``seed + r``; the result is
    the lowest energy state over restarts (earliest restart on ties).
    """
    schedule = schedule or AnnealSchedule()
    kern = _kernels(backend)
    name = backend or DEFAULT_BACKEND
    if problem.num_vars == 0:
        return SolverResult(np.zeros(0, dtype=np.int8), problem.offset, (problem.offset,), 0, "anneal", name)
    arrays = problem.csr()
    temps = schedule.temperatures(problem)
    seeds = [schedule.seed + r for r in range(schedule.restarts)]
    if jobs > 1 and kern is _native:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            runs = list(pool.map(lambda s: _restart(problem, arrays, temps, s, kern), seeds))
    else:
        runs = [_restart(problem, arrays, temps, s, kern) for s in seeds]
    trace = tuple(problem.energy(x) for x, _, _ in runs)
    best_r = min(range(len(runs)), key=lambda r: (trace[r], r))
    best_x = runs[best_r][0]
    return SolverResult(
        best_x,
        problem.energy(best_x),
        trace,
        sum(ev for _, _, ev in runs),
        "anneal",
        name,
    )


def exhaustive(problem: QuboProblem, backend: str | None = None) -> SolverResult:
    """Global minimum by enumeration; ties go to the lexicographically smallest ``x``."""
    n = problem.num_vars
    if n > MAX_EXHAUSTIVE_VARS:
        raise ValueError(f"exhaustive search limited to {MAX_EXHAUSTIVE_VARS} variables, got {n}")
    name = backend or DEFAULT_BACKEND
    if n == 0:
        return SolverResult(np.zeros(0, dtype=np.int8), problem.offset, (problem.offset,), 1, "exhaustive", name)
    kern = _kernels(backend)
    tol = 1e-9 * max(1.0, problem.max_abs_coefficient())
    best, evals = kern.exhaustive_run(*problem.csr(), tol)
    best = np.asarray(best, dtype=np.int8)
    energy = problem.energy(best)
    return SolverResult(best, energy, (energy,), int(evals), "exhaustive", name)


def pubo_minimize(terms: Sequence[PuboTerm], num_vars: int) -> tuple[np.ndarray, float]:
    """Exhaustive minimum of a polynomial in binary variables."""
    if num_vars > MAX_PUBO_VARS:
        raise ValueError(f"PUBO enumeration limited to {MAX_PUBO_VARS} variables, got {num_vars}")
    values = pubo_table(terms, num_vars)
    k = int(np.argmin(values))
    return _pykernels.state_bits(k, k + 1, num_vars)[0], float(values[k])


def pubo_table(terms: Sequence[PuboTerm], num_vars: int) -> np.ndarray:
    """Value of the polynomial at every state; index ``k`` reads ``x_0`` as the top bit."""
    for t in terms:
        if t.vars and (t.vars[0] < 0 or t.vars[-1] >= num_vars):
            raise ValueError(f"term {t} references variables outside 0..{num_vars - 1}")
    bits = _pykernels.state_bits(0, 1 << num_vars, num_vars).astype(bool)
    out = np.zeros(1 << num_vars)
    for t in terms:
        if t.vars:
            out += t.coefficient * np.all(bits[:, list(t.vars)], axis=1)
        else:
            out += t.coefficient
    return out


__all__ = [
    "AnnealSchedule",
    "SolverResult",
    "anneal",
    "exhaustive",
    "pubo_minimize",
    "pubo_table",
    "BACKENDS",
    "DEFAULT_BACKEND",
]
