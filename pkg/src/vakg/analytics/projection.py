"""Read-only projections of a graph onto lanes, sub-task tags and sessions."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Iterable, List, Optional, Tuple

from ..graph import VakgGraph
from ..kernels import CSR
from ..model import EdgeKind, Lane, Node, StateNode, UpdateNode

TRANSITION = "Transition"
ALL_LANES = frozenset(Lane)


@dataclass(frozen=True)
class Projection:
    """What to keep.

    ``tags`` keeps nodes whose ``subtasks`` payload list contains any of the
    tags. With ``contract=True``, each dropped node between two kept nodes
    becomes a ``Transition`` edge: update lanes dropped give state to state
    edges (one per update), state lanes dropped give update to update edges
    through each shared state.
    """

    lanes: FrozenSet[Lane] = ALL_LANES
    tags: Optional[FrozenSet[str]] = None
    sessions: Optional[FrozenSet[str]] = None
    edge_kinds: Optional[FrozenSet[str]] = None
    contract: bool = False

    @classmethod
    def lane(cls, lane: Lane, **kw) -> "Projection":
        """Single lane with its transitions contracted (the usual analytic view)."""
        return cls(lanes=frozenset({Lane(lane)}), contract=True, **kw)


@dataclass(frozen=True)
class ViewEdge:
    source: str
    target: str
    kind: str
    session: Optional[str] = None
    via: Optional[str] = None


@dataclass(frozen=True)
class GraphView:
    graph: VakgGraph
    nodes: Tuple[str, ...]
    edges: Tuple[ViewEdge, ...]
    index: Dict[str, int] = field(repr=False, compare=False, hash=False, default_factory=dict)

    def __len__(self) -> int:
        return len(self.nodes)

    def __contains__(self, node_id: str) -> bool:
        return node_id in self.index

    def node(self, node_id: str) -> Node:
        return self.graph.nodes[node_id]

    def to_csr(self, weights: Optional[Iterable[float]] = None) -> CSR:
        src = [self.index[e.source] for e in self.edges]
        dst = [self.index[e.target] for e in self.edges]
        return CSR.from_edges(len(self.nodes), src, dst, None if weights is None else list(weights))


def make_view(graph: VakgGraph, nodes: Iterable[str], edges: Iterable[ViewEdge]) -> GraphView:
    ordered = tuple(sorted(set(nodes)))
    index = {n: i for i, n in enumerate(ordered)}
    return GraphView(graph, ordered, tuple(edges), index)


def project(graph: VakgGraph, projection: Projection = Projection()) -> GraphView:
    lanes = frozenset(Lane(l) for l in projection.lanes)
    sessions = projection.sessions
    kinds = projection.edge_kinds

    def session_ok(node: Node) -> bool:
        return sessions is None or not isinstance(node, UpdateNode) or node.session_id in sessions

    touched = None
    if sessions is not None:
        touched = set()
        for sid in sessions:
            cur = graph.sessions.get(sid)
            if cur is not None:
                touched.update(cur.initial.values())
                touched.update(cur.current.values())
        for node in graph.nodes.values():
            if isinstance(node, UpdateNode) and node.session_id in sessions:
                touched.update(filter(None, (graph.applied_state(node.id), graph.produced_state(node.id))))

    def keep(node: Node) -> bool:
        if node.lane not in lanes or not session_ok(node):
            return False
        if touched is not None and isinstance(node, StateNode) and node.id not in touched:
            return False
        if projection.tags is not None and not set(node.subtasks) & projection.tags:
            return False
        return True

    kept = {nid for nid, node in graph.nodes.items() if keep(node)}

    def kind_ok(kind: str) -> bool:
        return kinds is None or kind in kinds

    edges: List[ViewEdge] = []
    for e in graph.edges:
        if e.source not in kept or e.target not in kept or not kind_ok(e.kind.value):
            continue
        if sessions is not None and e.session is not None and e.session not in sessions:
            continue
        edges.append(ViewEdge(e.source, e.target, e.kind.value, e.session))
        if e.kind is EdgeKind.SYNC:
            edges.append(ViewEdge(e.target, e.source, e.kind.value, e.session))

    if projection.contract and kind_ok(TRANSITION):
        edges.extend(_contracted(graph, kept, session_ok))
    return make_view(graph, kept, edges)


def _contracted(graph: VakgGraph, kept: set, session_ok) -> List[ViewEdge]:
    out = []
    updates = sorted(
        (n for n in graph.nodes.values() if isinstance(n, UpdateNode) and session_ok(n)),
        key=lambda n: (n.session_id, n.lane.value, n.step),
    )
    for u in updates:
        if u.id in kept:
            continue
        a, b = graph.applied_state(u.id), graph.produced_state(u.id)
        if a in kept and b in kept:
            out.append(ViewEdge(a, b, TRANSITION, u.session_id, via=u.id))
    for v in updates:
        if v.id not in kept:
            continue
        s = graph.applied_state(v.id)
        if s is None or s in kept:
            continue
        for e in graph.in_edges(s, EdgeKind.PRODUCES):
            u = graph.nodes[e.source]
            if u.id in kept and session_ok(u):
                out.append(ViewEdge(u.id, v.id, TRANSITION, None, via=s))
    return out
