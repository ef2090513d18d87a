"""Real-world benchmark graphs and their best-known modularity fixtures."""

from __future__ import annotations

import json
from importlib import resources
from pathlib import Path

from ..graph import Graph, Partition, load_edge_list

REALWORLD = ("karate", "dolphins", "lesmis", "polbooks", "protein")
BUNDLED = ("karate", "lesmis")
FIXTURE_NAME = "best_known.json"


class DatasetMissing(FileNotFoundError):
    pass


def _bundled_dir() -> Path:
    return Path(str(resources.files("sepnode") / "data"))


def dataset_path(name: str, data_dir: str | Path | None = None) -> Path:
    candidates = []
    if data_dir is not None:
        candidates.append(Path(data_dir) / f"{name}.txt")
    bundled = _bundled_dir() / f"{name}.txt"
    if bundled not in candidates:
        candidates.append(bundled)
    for path in candidates:
        if path.is_file():
            return path
    raise DatasetMissing(
        f"no edge list for {name!r} (looked in {', '.join(str(p.parent) for p in candidates)}); "
        "run scripts/fetch_datasets.py --out <dir> and pass that directory"
    )


def load_dataset(name: str, data_dir: str | Path | None = None) -> Graph:
    return load_edge_list(dataset_path(name, data_dir))


def best_known(data_dir: str | Path | None = None) -> dict[str, dict]:
    """Fixture records keyed by dataset; ``data_dir`` entries override bundled ones."""
    out: dict[str, dict] = {}
    for base in (_bundled_dir(), Path(data_dir) if data_dir is not None else None):
        if base is None:
            continue
        path = base / FIXTURE_NAME
        if path.is_file():
            out.update(json.loads(path.read_text()))
    return out


def best_known_partition(name: str, data_dir: str | Path | None = None) -> Partition:
    rec = best_known(data_dir)[name]
    return Partition.from_labels(rec["partition"])
