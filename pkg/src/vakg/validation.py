"""Structural validation of a :class:`~vakg.graph.VakgGraph`."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import List

from .errors import VakgError
from .graph import VakgGraph
from .model import Edge, EdgeKind, Side, StateNode, UpdateNode, fingerprint_state, update_id


@dataclass(frozen=True)
class Violation:
    subject: str
    rule: str
    message: str

    def to_dict(self) -> dict:
        return {"subject": self.subject, "rule": self.rule, "message": self.message}


def validate(graph: VakgGraph) -> List[Violation]:
    """Return every invariant violation; an empty list means the graph is valid."""
    out: List[Violation] = []

    def bad(subject, rule, message):
        out.append(Violation(subject, rule, message))

    for node in graph.nodes.values():
        if isinstance(node, StateNode):
            _check_state(node, bad)
        else:
            _check_update(graph, node, bad)

    for edge in graph.edges:
        _check_edge(graph, edge, bad)

    for key, steps in Counter((e.kind, e.source, e.target, e.session, e.step) for e in graph.edges).items():
        if steps > 1:
            bad(f"{key[1]}->{key[2]}", "duplicate-edge", f"{key[0].value} edge appears {steps} times")

    for sid, cursor in graph.sessions.items():
        for side in Side:
            _check_chain(graph, sid, side, bad)
        last = max((n.step for s in Side for n in graph.chain(sid, s)), default=-1)
        if cursor.next_step <= last:
            bad(sid, "cursor-step", f"next step {cursor.next_step} not after last step {last}")
        for side in Side:
            for ref in (cursor.initial[side], cursor.current[side]):
                node = graph.nodes.get(ref)
                if not isinstance(node, StateNode) or node.lane is not side.state_lane:
                    bad(sid, "cursor-state", f"cursor references {ref}, not a {side.state_lane.value} node")
    return out


def _check_state(node: StateNode, bad) -> None:
    if not node.lane.is_state:
        bad(node.id, "lane", f"state node in update lane {node.lane.value}")
        return
    try:
        fp = fingerprint_state(node.lane, node.payload)
    except VakgError as exc:
        bad(node.id, "payload", exc.message)
        return
    if fp != node.id:
        bad(node.id, "fingerprint", f"payload fingerprints to {fp}")


def _check_update(graph: VakgGraph, node: UpdateNode, bad) -> None:
    if node.lane.is_state:
        bad(node.id, "lane", f"update node in state lane {node.lane.value}")
        return
    if not node.ops:
        bad(node.id, "ops", "empty ops")
    wrong = sorted(o.value for o in node.ops if o.side is not node.side)
    if wrong:
        bad(node.id, "ops", f"ops {wrong} illegal in {node.lane.value}")
    if node.id != update_id(node.session_id, node.lane, node.step):
        bad(node.id, "update-id", "id does not match (session, lane, step)")
    if node.step < 0:
        bad(node.id, "step", "negative step")
    if node.session_id not in graph.sessions:
        bad(node.id, "session", f"unknown session {node.session_id!r}")
    incoming = graph.in_edges(node.id, EdgeKind.APPLIES_TO)
    outgoing = graph.out_edges(node.id, EdgeKind.PRODUCES)
    if len(incoming) != 1:
        bad(node.id, "applies-to", f"{len(incoming)} incoming AppliesTo edges, expected 1")
    if len(outgoing) != 1:
        bad(node.id, "produces", f"{len(outgoing)} outgoing Produces edges, expected 1")


def _side_of(graph: VakgGraph, node_id: str):
    node = graph.nodes.get(node_id)
    return None if node is None else node.side


def _check_edge(graph: VakgGraph, edge: Edge, bad) -> None:
    src, dst = graph.nodes.get(edge.source), graph.nodes.get(edge.target)
    subject = f"{edge.source}->{edge.target}"
    if src is None or dst is None:
        bad(subject, "dangling-edge", f"{edge.kind.value} edge references a missing node")
        return
    if edge.kind is EdgeKind.APPLIES_TO:
        if not (isinstance(src, StateNode) and isinstance(dst, UpdateNode) and src.side is dst.side):
            bad(subject, "applies-to", "AppliesTo must join a state to an update of the same side")
    elif edge.kind is EdgeKind.PRODUCES:
        if not (isinstance(src, UpdateNode) and isinstance(dst, StateNode) and src.side is dst.side):
            bad(subject, "produces", "Produces must join an update to a state of the same side")
    elif edge.kind is EdgeKind.TEMPORAL_NEXT:
        ok = (
            isinstance(src, UpdateNode)
            and isinstance(dst, UpdateNode)
            and src.lane is dst.lane
            and src.session_id == dst.session_id == edge.session
        )
        if not ok:
            bad(subject, "temporal-next", "TemporalNext must join updates of one lane and session")
            return
        chain = [n.id for n in graph.chain(src.session_id, src.side)]
        i = chain.index(src.id)
        if i + 1 >= len(chain) or chain[i + 1] != dst.id:
            bad(subject, "temporal-next", "TemporalNext skips or reverses the session chain")
    elif edge.kind is EdgeKind.SYNC:
        if src.side is not Side.HUMAN or dst.side is not Side.COMPUTER:
            bad(subject, "sync", "Sync must run from the human side to the computer side")
            return
        if edge.session not in graph.sessions or edge.step is None:
            bad(subject, "sync", "Sync edge without a known session and step")
            return
        if isinstance(src, StateNode) and isinstance(dst, StateNode):
            bad(subject, "sync", "Sync must touch at least one update node")
            return
        for node in (src, dst):
            if isinstance(node, UpdateNode):
                if node.session_id != edge.session or node.step != edge.step:
                    bad(subject, "sync", f"update {node.id} is not at step {edge.step} of {edge.session}")
            else:
                expected = graph.state_before(edge.session, node.side, edge.step + 1)
                if expected != node.id:
                    bad(subject, "sync", f"state {node.id} is not the {node.side.value} state at step {edge.step}")


def _check_chain(graph: VakgGraph, session_id: str, side: Side, bad) -> None:
    chain = graph.chain(session_id, side)
    cursor = graph.sessions[session_id]
    expected_state = cursor.initial[side]
    for i, node in enumerate(chain):
        if i and chain[i - 1].step >= node.step:
            bad(node.id, "step-order", "steps not strictly increasing along the chain")
        applied = graph.applied_state(node.id)
        if applied is not None and expected_state is not None and applied != expected_state:
            bad(node.id, "alternation", f"applies to {applied}, but the previous update produced {expected_state}")
        if i:
            links = [e for e in graph.out_edges(chain[i - 1].id, EdgeKind.TEMPORAL_NEXT) if e.target == node.id]
            if len(links) != 1:
                bad(node.id, "temporal-next", f"{len(links)} TemporalNext edges from the previous update")
        expected_state = graph.produced_state(node.id)
    if expected_state is not None and cursor.current[side] != expected_state:
        bad(session_id, "cursor-state", f"{side.value} cursor is not the last produced state")
