"""Dijkstra shortest paths over a view, with deterministic tie-breaking."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List, Tuple

from .. import kernels
from ..errors import NoPath, UnknownNode, WeightUnavailable
from ..events import parse_timestamp
from ..model import UpdateNode
from .projection import GraphView

HOP = "hop"
WALL_CLOCK = "wall_clock"
WEIGHTS = (HOP, WALL_CLOCK)


@dataclass(frozen=True)
class PathResult:
    nodes: Tuple[str, ...]
    weight: float
    weight_tag: str

    def to_dict(self) -> dict:
        return {"nodes": list(self.nodes), "weight": self.weight, "weight_tag": self.weight_tag}


def edge_weights(view: GraphView, weight: str = HOP) -> List[float]:
    """One weight per view edge.

    Wall-clock weights are the seconds between the timestamps of the two
    endpoint updates, so every edge of the view must join two timestamped
    update nodes.
    """
    if weight == HOP:
        return [1.0] * len(view.edges)
    if weight != WALL_CLOCK:
        raise WeightUnavailable(f"unknown weight {weight!r}; choose from {', '.join(WEIGHTS)}")
    stamps = {}
    for nid in view.nodes:
        node = view.node(nid)
        if isinstance(node, UpdateNode) and node.wall_clock is not None:
            stamps[nid] = parse_timestamp(node.wall_clock)
    out = []
    for e in view.edges:
        if e.source not in stamps or e.target not in stamps:
            raise WeightUnavailable(f"edge {e.source} -> {e.target} lacks wall-clock timestamps at both ends")
        seconds = (stamps[e.target] - stamps[e.source]).total_seconds()
        if seconds < 0:
            raise WeightUnavailable(f"edge {e.source} -> {e.target} runs backwards in time")
        out.append(seconds)
    return out


def _close(a: float, b: float) -> bool:
    return abs(a - b) <= 1e-9 * max(1.0, abs(b))


def shortest_path(view: GraphView, source: str, target: str, weight: str = HOP,
                  backend: str | None = None) -> PathResult:
    """Minimum-weight path; among equal weights, the lexicographically smallest id sequence."""
    for end in (source, target):
        if end not in view:
            raise UnknownNode(f"node {end} is not in the view", node=end)
    weights = edge_weights(view, weight)
    if source == target:
        return PathResult((source,), 0.0, weight)
    csr = view.to_csr(weights)
    s, t = view.index[source], view.index[target]
    forward = kernels.dijkstra(csr, s, backend=backend)
    total = float(forward[t])
    if math.isinf(total):
        raise NoPath(f"no path from {source} to {target}")
    to_target = kernels.dijkstra(csr.reverse(), t, backend=backend)

    # Node indices follow sorted ids, so trying successors in index order
    # and keeping only edges on some shortest path yields the smallest
    # sequence first. Backtracking only matters with zero-weight edges.
    tight = {}
    for u in range(csr.n):
        best = {}
        for e in range(csr.indptr[u], csr.indptr[u + 1]):
            v, w = int(csr.indices[e]), float(csr.weights[e])
            if v not in best or w < best[v]:
                best[v] = w
        tight[u] = sorted(best.items())

    path, acc = [s], [0.0]
    on_path = {s}
    iters = [iter(tight[s])]
    while path[-1] != t:
        for v, w in iters[-1]:
            if v in on_path or math.isinf(to_target[v]):
                continue
            if _close(acc[-1] + w + float(to_target[v]), total):
                path.append(v)
                acc.append(acc[-1] + w)
                on_path.add(v)
                iters.append(iter(tight[v]))
                break
        else:
            on_path.discard(path.pop())
            acc.pop()
            iters.pop()
            if not path:  # pragma: no cover - unreachable when forward[t] is finite
                raise NoPath(f"no path from {source} to {target}")
    return PathResult(tuple(view.nodes[i] for i in path), acc[-1], weight)
