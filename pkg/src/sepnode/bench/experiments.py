"""Experiment suites: SBM difficulty ladders and real-world graphs.

Each suite writes ``<suite>.csv`` (one row per run), ``<suite>.json``
(aggregates plus the resolved configuration) and ``<suite>.svg`` (box plot
of the headline metric) into the output directory.
"""

from __future__ import annotations

import csv
import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Sequence

import numpy as np

from ..estimate import score_all_edges, r_squared
from ..pipeline import DegenerateSeparation, DetectConfig, detect, separation_step
from ..solve import AnnealSchedule
from .datasets import REALWORLD, DatasetMissing, best_known, load_dataset
from .metrics import modularity, nmi, size_deviation
from .sbm import SbmConfig, generate_sbm

SUITES = ("sbm-perfect", "sbm-nu-greedy", "sbm-nu-anneal", "realworld", "estimator-r2")

CSV_FIELDS = [
    "suite", "graph_id", "seed", "difficulty", "nmi", "modularity", "best_known_modularity",
    "mod_fraction", "sep_size", "best_sep_size", "size_deviation", "r_squared", "runtime_ms",
]
KEY_FIELDS = ("suite", "graph_id", "seed", "difficulty")

PERFECT_LADDER = (0.75, 0.625, 0.5, 0.4)
NU_LADDER = (0.75, 0.625, 0.5)
HEADLINE = {
    "sbm-perfect": "nmi",
    "sbm-nu-greedy": "nmi",
    "sbm-nu-anneal": "nmi",
    "realworld": "mod_fraction",
    "estimator-r2": "r_squared",
}
BEST_KNOWN_SCHEDULE = AnnealSchedule(sweeps=2000, restarts=40)


@dataclass(frozen=True)
class SuiteConfig:
    n: int = 105
    k: int = 3
    p_inter: float = 0.05
    seeds: tuple[int, ...] = tuple(range(10))
    ladder: tuple[float, ...] | None = None
    datasets: tuple[str, ...] | None = None
    data_dir: str | None = None
    detect: DetectConfig = field(default_factory=DetectConfig)
    jobs: int = 1

    @classmethod
    def full_scale(cls, **kw) -> "SuiteConfig":
        return cls(n=250, k=7, seeds=tuple(range(50)), **kw)


@dataclass
class ExperimentReport:
    suite: str
    rows: list[dict]
    aggregate: dict
    config: dict

    def column(self, name: str, difficulty: str | None = None) -> list[float]:
        return [
            float(r[name])
            for r in self.rows
            if r[name] != "" and (difficulty is None or r["difficulty"] == difficulty)
        ]


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, float):
        return "nan" if math.isnan(x) else f"{x:.12g}"
    return str(x)


def _schedule_for(cfg: DetectConfig, seed: int) -> DetectConfig:
    return replace(cfg, schedule=replace(cfg.schedule, seed=seed))


def best_known_separation(graph, truth, seed: int) -> list[int]:
    """Reference separation set from the perfect estimator under a long anneal."""
    labels = score_all_edges(graph, "perfect", truth=truth)
    cfg = DetectConfig(estimator="perfect", schedule=replace(BEST_KNOWN_SCHEDULE, seed=seed))
    return separation_step(graph, labels, cfg, {})


def _sbm_run(suite: str, p_intra: float, seed: int, sc: SuiteConfig) -> dict:
    graph, truth = generate_sbm(SbmConfig(sc.n, sc.k, p_intra, sc.p_inter, seed))
    row = dict.fromkeys(CSV_FIELDS, "")
    row.update(suite=suite, graph_id=f"sbm-n{sc.n}-k{sc.k}-p{p_intra:g}-q{sc.p_inter:g}-s{seed}",
               seed=seed, difficulty=f"{p_intra:g}")
    t0 = time.perf_counter()
    if suite == "estimator-r2":
        scores = score_all_edges(graph, "nu", sc.detect.weights, sc.detect.threshold)
        row["r_squared"] = r_squared(scores, truth, graph)
        row["runtime_ms"] = (time.perf_counter() - t0) * 1e3
        return row
    cfg = _schedule_for(sc.detect, seed)
    if suite == "sbm-perfect":
        cfg = replace(cfg, estimator="perfect", assign="greedy")
    elif suite == "sbm-nu-greedy":
        cfg = replace(cfg, estimator="nu", assign="greedy")
    else:
        cfg = replace(cfg, estimator="nu", assign="clamped")
    try:
        out = detect(graph, cfg, truth=truth)
    except DegenerateSeparation as exc:
        row.update(nmi=0.0, sep_size=len(exc.sep_set), runtime_ms=(time.perf_counter() - t0) * 1e3)
        return row
    row["runtime_ms"] = (time.perf_counter() - t0) * 1e3
    q = modularity(graph, out.partition)
    q_best = modularity(graph, truth)
    best_sep = best_known_separation(graph, truth, seed)
    row.update(
        nmi=nmi(out.partition, truth),
        modularity=q,
        best_known_modularity=q_best,
        mod_fraction=q / q_best if q_best > 0 else "",
        sep_size=len(out.sep_set),
        best_sep_size=len(best_sep),
        size_deviation=size_deviation(out.sep_set, best_sep) if best_sep else "",
    )
    if cfg.estimator == "nu":
        scores = score_all_edges(graph, "nu", cfg.weights, cfg.threshold)
        row["r_squared"] = r_squared(scores, truth, graph)
    return row


def _realworld_run(name: str, seed: int, sc: SuiteConfig, q_best: float) -> dict:
    graph = load_dataset(name, sc.data_dir)
    row = dict.fromkeys(CSV_FIELDS, "")
    row.update(suite="realworld", graph_id=name, seed=seed, difficulty=name, best_known_modularity=q_best)
    cfg = replace(_schedule_for(sc.detect, seed), estimator="nu")
    t0 = time.perf_counter()
    try:
        out = detect(graph, cfg)
    except DegenerateSeparation as exc:
        row.update(sep_size=len(exc.sep_set), mod_fraction=0.0, runtime_ms=(time.perf_counter() - t0) * 1e3)
        return row
    row["runtime_ms"] = (time.perf_counter() - t0) * 1e3
    q = modularity(graph, out.partition)
    row.update(modularity=q, mod_fraction=q / q_best, sep_size=len(out.sep_set))
    return row


def _run_task(task):
    kind, args = task
    return _sbm_run(*args) if kind == "sbm" else _realworld_run(*args)


def _tasks(suite: str, sc: SuiteConfig) -> list:
    if suite == "realworld":
        if sc.data_dir is None:
            raise DatasetMissing("the realworld suite needs --data-dir with edge-list files")
        names = sc.datasets or REALWORLD
        fixtures = best_known(sc.data_dir)
        for name in names:
            load_dataset(name, sc.data_dir)
            if name not in fixtures:
                raise DatasetMissing(
                    f"no best-known modularity for {name!r}; run scripts/make_fixtures.py --data {sc.data_dir}"
                )
        return [("rw", (name, s, sc, fixtures[name]["modularity"])) for name in names for s in sc.seeds]
    ladder = sc.ladder or (PERFECT_LADDER if suite == "sbm-perfect" else NU_LADDER)
    return [("sbm", (suite, p, s, sc)) for p in ladder for s in sc.seeds]


def _quartiles(values: Sequence[float]) -> dict:
    arr = np.asarray([v for v in values if not math.isnan(v)], dtype=float)
    if arr.size == 0:
        return {}
    q1, med, q3 = np.percentile(arr, [25, 50, 75])
    return {"median": float(med), "q1": float(q1), "q3": float(q3),
            "min": float(arr.min()), "max": float(arr.max()), "count": int(arr.size)}


def aggregate(rows: list[dict]) -> dict:
    out: dict = {}
    for diff in dict.fromkeys(r["difficulty"] for r in rows):
        sub = [r for r in rows if r["difficulty"] == diff]
        stats = {}
        for col in ("nmi", "mod_fraction", "size_deviation", "r_squared", "sep_size", "runtime_ms"):
            vals = [float(r[col]) for r in sub if r[col] != ""]
            if vals:
                stats[col] = _quartiles(vals)
        out[diff] = stats
    return out


def _merge_csv(path: Path, rows: list[dict]) -> list[dict]:
    """Append rows whose key is new; existing rows are kept as written."""
    existing: list[dict] = []
    if path.exists():
        with open(path, newline="") as fh:
            existing = list(csv.DictReader(fh))
    seen = {tuple(r[k] for k in KEY_FIELDS) for r in existing}
    fresh = [r for r in rows if tuple(_fmt(r[k]) for k in KEY_FIELDS) not in seen]
    with open(path, "a", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=CSV_FIELDS)
        if not existing:
            w.writeheader()
        for r in fresh:
            w.writerow({k: _fmt(r[k]) for k in CSV_FIELDS})
    return existing + [{k: _fmt(r[k]) for k in CSV_FIELDS} for r in fresh]


def boxplot_svg(groups: dict[str, list[float]], title: str, width: int = 480, height: int = 300) -> str:
    """Minimal standalone SVG box plot, one box per group."""
    vals = [v for vs in groups.values() for v in vs if not math.isnan(v)]
    lo, hi = (min(vals), max(vals)) if vals else (0.0, 1.0)
    if hi - lo < 1e-9:
        lo, hi = lo - 0.5, hi + 0.5
    pad, top, bottom = 40, 30, 40
    plot_h = height - top - bottom

    def y(v):
        return top + plot_h * (hi - v) / (hi - lo)

    parts = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" font-family="sans-serif" font-size="11">',
             f'<text x="{width / 2}" y="16" text-anchor="middle">{title}</text>',
             f'<line x1="{pad}" y1="{top}" x2="{pad}" y2="{top + plot_h}" stroke="black"/>',
             f'<text x="{pad - 4}" y="{y(hi) + 4:.1f}" text-anchor="end">{hi:.3g}</text>',
             f'<text x="{pad - 4}" y="{y(lo) + 4:.1f}" text-anchor="end">{lo:.3g}</text>']
    slot = (width - pad - 10) / max(len(groups), 1)
    for i, (name, vs) in enumerate(groups.items()):
        q = _quartiles(vs)
        cx = pad + slot * (i + 0.5)
        if q:
            bw = slot * 0.4
            parts += [
                f'<line x1="{cx:.1f}" y1="{y(q["max"]):.1f}" x2="{cx:.1f}" y2="{y(q["min"]):.1f}" stroke="black"/>',
                f'<rect x="{cx - bw / 2:.1f}" y="{y(q["q3"]):.1f}" width="{bw:.1f}" '
                f'height="{max(y(q["q1"]) - y(q["q3"]), 0.5):.1f}" fill="#9ecae1" stroke="black"/>',
                f'<line x1="{cx - bw / 2:.1f}" y1="{y(q["median"]):.1f}" x2="{cx + bw / 2:.1f}" '
                f'y2="{y(q["median"]):.1f}" stroke="#d62728" stroke-width="2"/>',
            ]
        parts.append(f'<text x="{cx:.1f}" y="{height - 20}" text-anchor="middle">{name}</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def run_experiment(suite: str, out_dir: str | Path, seeds: Sequence[int] | None = None,
                   config: SuiteConfig | None = None) -> ExperimentReport:
    if suite not in SUITES:
        raise ValueError(f"unknown suite {suite!r}; choose from {SUITES}")
    sc = config or SuiteConfig()
    if seeds is not None:
        sc = replace(sc, seeds=tuple(seeds))
    tasks = _tasks(suite, sc)
    if sc.jobs > 1:
        with ProcessPoolExecutor(max_workers=sc.jobs) as pool:
            rows = list(pool.map(_run_task, tasks))
    else:
        rows = [_run_task(t) for t in tasks]

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    merged = _merge_csv(out / f"{suite}.csv", rows)
    agg = aggregate(merged)
    resolved = {
        "suite": suite,
        "n": sc.n, "k": sc.k, "p_inter": sc.p_inter, "seeds": list(sc.seeds),
        "ladder": list(sc.ladder) if sc.ladder else None,
        "datasets": list(sc.datasets) if sc.datasets else None,
        "data_dir": sc.data_dir,
        "detect": sc.detect.to_dict(),
        "best_known_schedule": asdict(BEST_KNOWN_SCHEDULE),
    }
    (out / f"{suite}.json").write_text(json.dumps({"config": resolved, "aggregate": agg}, indent=2) + "\n")
    metric = HEADLINE[suite]
    groups = {d: [float(r[metric]) for r in merged if r["difficulty"] == d and r[metric] != ""]
              for d in dict.fromkeys(r["difficulty"] for r in merged)}
    (out / f"{suite}.svg").write_text(boxplot_svg(groups, f"{suite}: {metric}"))
    return ExperimentReport(suite, merged, agg, resolved)
