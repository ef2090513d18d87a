"""Time the compiled kernels against the pure Python fallback.

    python benchmarks/bench_kernels.py [--n 105] [--sweeps 200] [--repeat 3]
"""

import argparse
import time

import numpy as np

from sepnode.bench.sbm import SbmConfig, generate_sbm
from sepnode.estimate import score_all_edges
from sepnode.qubo import QuboProblem, build_separation_qubo
from sepnode.solve import BACKENDS, AnnealSchedule, anneal, exhaustive


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=105)
    ap.add_argument("--sweeps", type=int, default=200)
    ap.add_argument("--restarts", type=int, default=2)
    ap.add_argument("--exhaustive-vars", type=int, default=18)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)

    graph, _ = generate_sbm(SbmConfig(n=args.n, k=3, p_intra=0.5, p_inter=0.05, seed=0))
    sep_qubo = build_separation_qubo(graph, score_all_edges(graph, "nu"))
    schedule = AnnealSchedule(sweeps=args.sweeps, restarts=args.restarts)

    rng = np.random.default_rng(0)
    n = args.exhaustive_vars
    dense = QuboProblem(
        n,
        {i: float(rng.normal()) for i in range(n)},
        {(i, j): float(rng.normal()) for i in range(n) for j in range(i + 1, n) if rng.random() < 0.3},
    )

    print(f"backends: {', '.join(BACKENDS)}")
    print(f"anneal: {sep_qubo.num_vars} vars, {len(sep_qubo.quadratic)} couplings, "
          f"{args.sweeps} sweeps x {args.restarts} restarts")
    print(f"exhaustive: {n} vars, {len(dense.quadratic)} couplings")
    print(f"{'kernel':<12}{'backend':<10}{'seconds':>10}{'flips/s':>14}")
    results = {}
    for backend in BACKENDS:
        t, res = best_of(lambda: anneal(sep_qubo, schedule, backend=backend), args.repeat)
        results[("anneal", backend)] = (t, res)
        print(f"{'anneal':<12}{backend:<10}{t:>10.4f}{res.evaluations / t:>14.3g}")
    for backend in BACKENDS:
        t, res = best_of(lambda: exhaustive(dense, backend=backend), args.repeat)
        results[("exhaustive", backend)] = (t, res)
        print(f"{'exhaustive':<12}{backend:<10}{t:>10.4f}{res.evaluations / t:>14.3g}")

    if "native" in BACKENDS:
        for kernel in ("anneal", "exhaustive"):
            tn, rn = results[(kernel, "native")]
            tp, rp = results[(kernel, "python")]
            same = np.array_equal(rn.best_x, rp.best_x)
            print(f"{kernel}: speedup {tp / tn:.1f}x, identical result: {same}")


if __name__ == "__main__":
    main()
