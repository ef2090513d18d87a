"""Write the real-world benchmark graphs as edge lists.

Karate club and Les Miserables are exported from networkx (weights dropped,
nodes numbered in networkx insertion order). Dolphins and political books
are downloaded from Mark Newman's network data page when reachable; the
protein interaction network has to be supplied by hand.

    python scripts/fetch_datasets.py --out datasets/
"""

import argparse
import io
import sys
import urllib.request
import zipfile
from pathlib import Path

import networkx as nx

NEWMAN = "http://www-personal.umich.edu/~mejn/netdata/{}.zip"


def write(graph: nx.Graph, path: Path, source: str) -> None:
    index = {v: i for i, v in enumerate(graph.nodes())}
    edges = sorted({tuple(sorted((index[u], index[v]))) for u, v in graph.edges() if u != v})
    with open(path, "w", encoding="ascii") as fh:
        fh.write(f"# {source}\n# nodes {len(index)}\n")
        for u, v in edges:
            fh.write(f"{u} {v}\n")
    print(f"wrote {path} ({len(index)} nodes, {len(edges)} edges)")


def fetch_gml(name: str):
    with urllib.request.urlopen(NEWMAN.format(name), timeout=30) as resp:
        blob = resp.read()
    with zipfile.ZipFile(io.BytesIO(blob)) as zf:
        text = zf.read(f"{name}.gml").decode("ascii", errors="replace")
    return nx.parse_gml(io.StringIO(text).read().splitlines(), label="id")


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", type=Path, required=True)
    ap.add_argument("--offline", action="store_true", help="skip downloads")
    args = ap.parse_args(argv)
    args.out.mkdir(parents=True, exist_ok=True)

    write(nx.karate_club_graph(), args.out / "karate.txt", "Zachary karate club (networkx)")
    write(nx.les_miserables_graph(), args.out / "lesmis.txt", "Les Miserables co-appearance, unweighted (networkx)")
    if args.offline:
        return 0
    status = 0
    for name in ("dolphins", "polbooks"):
        try:
            write(fetch_gml(name), args.out / f"{name}.txt", f"{name} (Newman network data)")
        except Exception as exc:
            print(f"could not fetch {name}: {exc}", file=sys.stderr)
            status = 1
    return status


if __name__ == "__main__":
    sys.exit(main())
