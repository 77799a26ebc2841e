from .importance import search_graph, state_importance
from .motifs import Motif, MotifHit, detect_motifs, motifs_in_sequences, state_sequences
from .pagerank import PageRankResult, pagerank
from .paths import HOP, WALL_CLOCK, PathResult, edge_weights, shortest_path
from .projection import GraphView, Projection, ViewEdge, make_view, project
from .stats import session_stats

__all__ = [
    "GraphView", "HOP", "Motif", "MotifHit", "PageRankResult", "PathResult", "Projection",
    "ViewEdge", "WALL_CLOCK", "detect_motifs", "edge_weights", "make_view", "motifs_in_sequences",
    "pagerank", "project", "search_graph", "session_stats", "shortest_path", "state_importance",
    "state_sequences",
]
