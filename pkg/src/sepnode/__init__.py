"""Community detection through separation-node identification."""

from .graph import Graph, Partition, bfs_layers, connected_components, load_edge_list, load_partition
from .estimate import ConnectivityWeights, EdgeScoreMap, score_all_edges
from .qubo import QuboProblem, build_separation_qubo
from .solve import AnnealSchedule, SolverResult, anneal, exhaustive

__version__ = "0.1.0"
