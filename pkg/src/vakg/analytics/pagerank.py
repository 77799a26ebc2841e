from __future__ import annotations

from dataclasses import dataclass
from typing import Dict

from .. import kernels
from ..errors import EmptyGraph
from .projection import GraphView


@dataclass(frozen=True)
class PageRankResult:
    scores: Dict[str, float]
    iterations: int
    converged: bool
    delta: float

    def to_dict(self) -> dict:
        return {
            "scores": dict(self.scores),
            "iterations": self.iterations,
            "converged": self.converged,
            "delta": self.delta,
        }

    def ranked(self):
        return sorted(self.scores.items(), key=lambda kv: (-kv[1], kv[0]))


def pagerank(view: GraphView, damping: float = 0.85, tolerance: float = 1e-9, max_iter: int = 100,
             backend: str | None = None) -> PageRankResult:
    """Power-iteration PageRank over a view.

    Parallel edges add weight, so transitions taken by many sessions count
    more. Dangling mass is spread uniformly over all nodes. Iteration stops
    when the L1 change drops below ``tolerance`` or after ``max_iter``
    rounds; ``converged`` tells which.
    """
    if len(view) == 0:
        raise EmptyGraph("PageRank of an empty view")
    scores, iterations, converged, delta = kernels.pagerank(
        view.to_csr(), damping, tolerance, max_iter, backend=backend
    )
    return PageRankResult(dict(zip(view.nodes, scores.tolist())), iterations, converged, delta)
