"""JSON documents for analytics results, shared by the CLI and the service."""

from __future__ import annotations

from typing import Iterable, Optional

from .analytics import (
    Projection,
    detect_motifs,
    pagerank,
    project,
    session_stats,
    shortest_path,
    state_importance,
)
from .graph import VakgGraph
from .model import Lane


def view_for(graph: VakgGraph, lane: Optional[str] = None):
    """``lane=None`` or ``"all"``: every lane, original edges. Otherwise one lane, contracted."""
    if lane in (None, "", "all"):
        return project(graph, Projection())
    return project(graph, Projection.lane(Lane.parse(lane)))


def pagerank_doc(graph: VakgGraph, lane: Optional[str] = "computer_state", damping: float = 0.85,
                 tolerance: float = 1e-9, max_iter: int = 100) -> dict:
    result = pagerank(view_for(graph, lane), damping=damping, tolerance=tolerance, max_iter=max_iter)
    doc = result.to_dict()
    doc["lane"] = lane or "all"
    doc["ranking"] = [node for node, _ in result.ranked()]
    return doc


def path_doc(graph: VakgGraph, source: str, target: str, weight: str = "hop", lane: Optional[str] = None) -> dict:
    return {"path": shortest_path(view_for(graph, lane), source, target, weight).to_dict(), "lane": lane or "all"}


def motifs_doc(graph: VakgGraph) -> dict:
    return {"hits": [h.to_dict() for h in detect_motifs(graph)]}


def importance_doc(graph: VakgGraph, goal: str, cohort: Optional[Iterable[str]] = None) -> dict:
    ranked = state_importance(graph, goal, cohort)
    return {"goal": goal, "importance": [{"state": s, "importance": v} for s, v in ranked]}


def stats_doc(graph: VakgGraph) -> dict:
    return {"sessions": session_stats(graph)}
