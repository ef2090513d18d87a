"""Command-line interface.

Exit codes: 0 success, 1 input or configuration error, 2 degenerate
separation (no usable cores). Machine-readable summaries go to stdout,
diagnostics to stderr.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import asdict
from pathlib import Path

from . import __version__
from .bench.datasets import DatasetMissing
from .bench.experiments import SUITES, SuiteConfig, run_experiment
from .bench.sbm import SbmConfig, generate_sbm
from .estimate import ESTIMATORS, ConnectivityWeights
from .graph import GraphFormatError, load_edge_list, load_partition, write_edge_list, write_partition
from .pipeline import ASSIGN_METHODS, SOLVERS, DegenerateSeparation, DetectConfig, detect
from .qubo import QuboProblem
from .solve import BACKENDS, AnnealSchedule, anneal, exhaustive

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_DEGENERATE = 2


class InputError(Exception):
    pass


def _add_anneal_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("annealing")
    g.add_argument("--sweeps", type=int, default=1000)
    g.add_argument("--restarts", type=int, default=10)
    g.add_argument("--temp0", type=float, default=None, help="initial temperature (default: max |coefficient|)")
    g.add_argument("--temp1", type=float, default=1e-3, help="final temperature")
    g.add_argument("--solver", choices=SOLVERS, default="anneal")
    g.add_argument("--backend", choices=BACKENDS, default=None)


def _add_estimator_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("estimator")
    g.add_argument("--estimator", choices=ESTIMATORS, default="nu")
    g.add_argument("--radius", type=int, default=None, help="neighborhood radius d (uniform weights)")
    g.add_argument("--weights", type=str, default=None,
                   help="comma-separated w1[0..d] then w2[0..d-1]; overrides --radius")
    g.add_argument("--threshold", type=float, default=0.0)
    g.add_argument("--assign", choices=ASSIGN_METHODS, default="greedy")
    g.add_argument("--penalty-weight", type=_penalty, default=2.0,
                   help="one-hot penalty for --assign clamped, a number or 'auto'")


def _penalty(text: str):
    if text == "auto":
        return text
    value = float(text)
    if value <= 0:
        raise argparse.ArgumentTypeError("penalty weight must be positive")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sepnode", description="Community detection via separation nodes.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("detect", help="detect communities in an edge-list graph")
    p.add_argument("--graph", required=True)
    p.add_argument("--truth", default=None, help="ground-truth partition (needed by --estimator perfect)")
    _add_estimator_flags(p)
    _add_anneal_flags(p)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out", default=".")

    p = sub.add_parser("generate", help="sample a stochastic block model graph")
    p.add_argument("--n", type=int, default=105)
    p.add_argument("--k", type=int, default=3)
    p.add_argument("--p-intra", type=float, default=0.75)
    p.add_argument("--p-inter", type=float, default=0.05)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=".")

    p = sub.add_parser("solve", help="minimise a QUBO stored in sparse text form")
    p.add_argument("qubo")
    _add_anneal_flags(p)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out", default=".")

    p = sub.add_parser("reproduce", help="run an experiment suite")
    p.add_argument("--suite", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--seeds", type=int, default=None, help="number of seeds (default 10, or 50 with --full)")
    p.add_argument("--seed", type=int, default=0, help="first seed")
    p.add_argument("--full", action="store_true", help="n=250, k=7, 50 seeds")
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--k", type=int, default=None)
    p.add_argument("--p-inter", type=float, default=0.05)
    p.add_argument("--data-dir", default=None)
    p.add_argument("--datasets", default=None, help="comma-separated subset for the realworld suite")
    p.add_argument("--jobs", type=int, default=1)
    _add_estimator_flags(p)
    _add_anneal_flags(p)
    return parser


def _weights(args) -> ConnectivityWeights:
    if args.weights:
        try:
            values = [float(v) for v in args.weights.split(",")]
        except ValueError:
            raise InputError(f"--weights: cannot parse {args.weights!r}") from None
        w = ConnectivityWeights.from_flat(values)
        if args.radius is not None and args.radius != w.d:
            raise InputError(f"--radius {args.radius} disagrees with {len(values)} weights (d={w.d})")
        return w
    if args.radius is None or args.radius == 1:
        return ConnectivityWeights()
    return ConnectivityWeights.uniform(args.radius)


def _schedule(args) -> AnnealSchedule:
    return AnnealSchedule(args.temp0, args.temp1, args.sweeps, args.restarts, args.seed)


def _detect_config(args) -> DetectConfig:
    return DetectConfig(
        estimator=args.estimator,
        weights=_weights(args),
        threshold=args.threshold,
        solver=args.solver,
        schedule=_schedule(args),
        assign=args.assign,
        penalty_weight=args.penalty_weight,
        backend=args.backend,
        jobs=args.jobs,
    )


def _write_json(path: Path, obj) -> None:
    path.write_text(json.dumps(obj, indent=2, default=float) + "\n")


def _out_dir(path: str) -> Path:
    out = Path(path)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _echo(args) -> dict:
    return {k: v for k, v in vars(args).items() if k != "func"} | {"version": __version__}


def cmd_detect(args) -> int:
    if not Path(args.graph).is_file():
        raise InputError(f"graph file not found: {args.graph}")
    if args.truth is not None and not Path(args.truth).is_file():
        raise InputError(f"truth file not found: {args.truth}")
    if args.estimator == "perfect" and args.truth is None:
        raise InputError("--estimator perfect needs --truth")
    config = _detect_config(args)
    graph = load_edge_list(args.graph)
    truth = load_partition(args.truth, graph) if args.truth else None
    out = _out_dir(args.out)
    _write_json(out / "config.json", {"args": _echo(args), "detect": config.to_dict()})
    try:
        result = detect(graph, config, truth)
    except DegenerateSeparation as exc:
        record = {"status": "degenerate", "reason": str(exc), "sep_set": list(exc.sep_set),
                  "stats": exc.stats, "config": config.to_dict()}
        _write_json(out / "detection.json", record)
        print(json.dumps({"status": "degenerate", "sep_size": len(exc.sep_set)}))
        print(f"degenerate separation: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE
    _write_json(out / "detection.json", {"status": "ok", **result.to_dict()})
    write_partition(result.partition, out / "partition.txt", header=f"seed {args.seed}")
    summary = {"status": "ok", "communities": result.partition.k, "sep_size": len(result.sep_set)}
    if truth is not None:
        from .bench.metrics import nmi

        summary["nmi"] = nmi(result.partition, truth)
    print(json.dumps(summary))
    return EXIT_OK


def cmd_generate(args) -> int:
    try:
        config = SbmConfig(n=args.n, k=args.k, p_intra=args.p_intra, p_inter=args.p_inter, seed=args.seed)
    except ValueError as exc:
        raise InputError(str(exc)) from None
    graph, truth = generate_sbm(config)
    out = _out_dir(args.out)
    stem = f"sbm-n{args.n}-k{args.k}-s{args.seed}"
    header = f"sbm n={config.n} k={config.k} p_intra={config.p_intra} p_inter={config.p_inter} seed={config.seed}"
    write_edge_list(graph, out / f"{stem}.txt", header=header)
    write_partition(truth, out / f"{stem}.truth.txt", header=header)
    _write_json(out / f"{stem}.config.json", {"args": _echo(args), "sbm": asdict(config)})
    print(json.dumps({"graph": str(out / f"{stem}.txt"), "truth": str(out / f"{stem}.truth.txt"),
                      "n": graph.n, "m": graph.m}))
    return EXIT_OK


def cmd_solve(args) -> int:
    try:
        problem = QuboProblem.load(args.qubo)
    except FileNotFoundError:
        raise InputError(f"QUBO file not found: {args.qubo}") from None
    except ValueError as exc:
        raise InputError(f"{args.qubo}: {exc}") from None
    if args.solver == "exhaustive":
        try:
            result = exhaustive(problem, backend=args.backend)
        except ValueError as exc:
            raise InputError(str(exc)) from None
    else:
        result = anneal(problem, _schedule(args), backend=args.backend, jobs=args.jobs)
    out = _out_dir(args.out)
    record = result.to_dict() | {"config": _echo(args)}
    _write_json(out / "solution.json", record)
    _write_json(out / "config.json", _echo(args))
    print(json.dumps({"energy": result.best_energy, "x": result.bitstring}))
    return EXIT_OK


def cmd_reproduce(args) -> int:
    if args.suite not in SUITES:
        raise InputError(f"unknown suite {args.suite!r}; choose from {', '.join(SUITES)}")
    base = SuiteConfig.full_scale() if args.full else SuiteConfig()
    count = args.seeds if args.seeds is not None else len(base.seeds)
    sc = SuiteConfig(
        n=args.n or base.n,
        k=args.k or base.k,
        p_inter=args.p_inter,
        seeds=tuple(range(args.seed, args.seed + count)),
        datasets=tuple(args.datasets.split(",")) if args.datasets else None,
        data_dir=args.data_dir,
        detect=_detect_config(args),
        jobs=args.jobs,
    )
    try:
        report = run_experiment(args.suite, args.out, config=sc)
    except DatasetMissing as exc:
        raise InputError(f"{exc} (hint: scripts/fetch_datasets.py writes edge lists into a directory "
                         "to pass as --data-dir)") from None
    out = Path(args.out)
    _write_json(out / f"{args.suite}.config.json", _echo(args))
    print(json.dumps({"suite": args.suite, "rows": len(report.rows), "csv": str(out / f"{args.suite}.csv")}))
    return EXIT_OK


COMMANDS = {"detect": cmd_detect, "generate": cmd_generate, "solve": cmd_solve, "reproduce": cmd_reproduce}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    try:
        return COMMANDS[args.command](args)
    except (InputError, GraphFormatError, DatasetMissing) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
