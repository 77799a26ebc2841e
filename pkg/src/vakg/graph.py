"""The append-only four-lane graph and its mutation operations."""

from __future__ import annotations

import bisect
import hashlib
import json
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Dict, Iterator, List, NamedTuple, Optional

from . import canonical
from .errors import (
    IllegalLane,
    InvalidGraph,
    NoNodesAtStep,
    SessionClosed,
    StepConflict,
    UnknownSession,
    DuplicateSessionStart,
)
from .model import (
    Edge,
    EdgeKind,
    Lane,
    Node,
    Side,
    StateNode,
    UpdateNode,
    fingerprint_state,
    ops_text,
    parse_ops,
    update_id,
)


@dataclass
class SessionCursor:
    session_id: str
    user_id: str
    initial: Dict[Side, str]
    current: Dict[Side, str]
    next_step: int = 0
    closed: bool = False

    def to_dict(self) -> dict:
        return {
            "session_id": self.session_id,
            "user_id": self.user_id,
            "initial_computer_state": self.initial[Side.COMPUTER],
            "initial_human_state": self.initial[Side.HUMAN],
            "current_computer_state": self.current[Side.COMPUTER],
            "current_human_state": self.current[Side.HUMAN],
            "next_step": self.next_step,
            "closed": self.closed,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SessionCursor":
        return cls(
            session_id=d["session_id"],
            user_id=d["user_id"],
            initial={Side.COMPUTER: d["initial_computer_state"], Side.HUMAN: d["initial_human_state"]},
            current={Side.COMPUTER: d["current_computer_state"], Side.HUMAN: d["current_human_state"]},
            next_step=int(d["next_step"]),
            closed=bool(d["closed"]),
        )


class Transition(NamedTuple):
    update_id: str
    state_id: str
    created: bool


class VakgGraph:
    """Nodes, edges and per-session cursors.

    Nothing is ever removed. The low-level :meth:`add_node` / :meth:`add_edge`
    insert without checking the lane contracts (used by importers and by
    tests that build broken graphs on purpose); everything else goes through
    :meth:`upsert_state`, :meth:`open_session`, :meth:`add_transition` and
    :meth:`add_sync`.
    """

    def __init__(self) -> None:
        self.nodes: Dict[str, Node] = {}
        self.edges: List[Edge] = []
        self.sessions: Dict[str, SessionCursor] = {}
        self._edge_set: set = set()
        self._out: Dict[str, List[Edge]] = defaultdict(list)
        self._in: Dict[str, List[Edge]] = defaultdict(list)
        # (session, side) -> update ids ordered by step
        self._chains: Dict[tuple, List[str]] = defaultdict(list)
        self._chain_steps: Dict[tuple, List[int]] = defaultdict(list)

    # -- low level -------------------------------------------------------

    def add_node(self, node: Node) -> bool:
        existing = self.nodes.get(node.id)
        if existing is not None:
            if existing != node:
                raise InvalidGraph(f"conflicting definitions for node {node.id}")
            return False
        self.nodes[node.id] = node
        if isinstance(node, UpdateNode):
            key = (node.session_id, node.side)
            steps = self._chain_steps[key]
            pos = bisect.bisect_left(steps, node.step)
            steps.insert(pos, node.step)
            self._chains[key].insert(pos, node.id)
        return True

    def add_edge(self, edge: Edge) -> None:
        for end in (edge.source, edge.target):
            if end not in self.nodes:
                raise InvalidGraph(f"edge endpoint {end} is not a node")
        self.edges.append(edge)
        self._edge_set.add(edge)
        self._out[edge.source].append(edge)
        self._in[edge.target].append(edge)

    def has_edge(self, edge: Edge) -> bool:
        return edge in self._edge_set

    # -- queries ---------------------------------------------------------

    def __len__(self) -> int:
        return len(self.nodes)

    def out_edges(self, node_id: str, kind: Optional[EdgeKind] = None) -> List[Edge]:
        edges = self._out.get(node_id, [])
        return [e for e in edges if kind is None or e.kind is kind]

    def in_edges(self, node_id: str, kind: Optional[EdgeKind] = None) -> List[Edge]:
        edges = self._in.get(node_id, [])
        return [e for e in edges if kind is None or e.kind is kind]

    def nodes_in(self, lane: Lane) -> Iterator[Node]:
        return (n for n in self.nodes.values() if n.lane is lane)

    def chain(self, session_id: str, side: Side) -> List[UpdateNode]:
        """Update nodes of one session and side, in step order."""
        return [self.nodes[i] for i in self._chains.get((session_id, side), [])]

    def update_at(self, session_id: str, side: Side, step: int) -> Optional[UpdateNode]:
        key = (session_id, side)
        steps = self._chain_steps.get(key, [])
        pos = bisect.bisect_left(steps, step)
        if pos < len(steps) and steps[pos] == step:
            return self.nodes[self._chains[key][pos]]
        return None

    def applied_state(self, update: str) -> Optional[str]:
        edges = self.in_edges(update, EdgeKind.APPLIES_TO)
        return edges[0].source if edges else None

    def produced_state(self, update: str) -> Optional[str]:
        edges = self.out_edges(update, EdgeKind.PRODUCES)
        return edges[0].target if edges else None

    def state_sequence(self, session_id: str, side: Side) -> List[str]:
        """States occupied by a session on one side, starting with its initial state."""
        cursor = self._cursor(session_id)
        seq = [cursor.initial[side]]
        for node in self.chain(session_id, side):
            produced = self.produced_state(node.id)
            if produced is not None:
                seq.append(produced)
        return seq

    def state_before(self, session_id: str, side: Side, step: int) -> str:
        """State of ``side`` after every update of that side with a smaller step."""
        cursor = self._cursor(session_id)
        key = (session_id, side)
        pos = bisect.bisect_left(self._chain_steps.get(key, []), step)
        if pos == 0:
            return cursor.initial[side]
        produced = self.produced_state(self._chains[key][pos - 1])
        return produced if produced is not None else cursor.initial[side]

    def _cursor(self, session_id: str) -> SessionCursor:
        try:
            return self.sessions[session_id]
        except KeyError:
            raise UnknownSession(f"unknown session {session_id!r}", session_id=session_id) from None

    # -- checked mutation ------------------------------------------------

    def upsert_state(self, lane: Lane, payload: dict) -> tuple:
        lane = Lane(lane)
        if not lane.is_state:
            raise IllegalLane(f"{lane.value} is not a state lane")
        payload = canonical.normalize_map(payload)
        fp = fingerprint_state(lane, payload)
        if fp in self.nodes:
            return fp, False
        self.add_node(StateNode(fp, lane, payload))
        return fp, True

    def open_session(self, session_id: str, user_id: str, initial_computer_state: dict, initial_human_state: dict) -> dict:
        if session_id in self.sessions:
            raise DuplicateSessionStart(f"session {session_id!r} already started", session_id=session_id)
        # normalize both before inserting either so a bad payload mutates nothing
        cs = canonical.normalize_map(initial_computer_state)
        hs = canonical.normalize_map(initial_human_state)
        cs_id, cs_created = self.upsert_state(Lane.COMPUTER_STATE, cs)
        hs_id, hs_created = self.upsert_state(Lane.HUMAN_STATE, hs)
        self.sessions[session_id] = SessionCursor(
            session_id,
            user_id,
            initial={Side.COMPUTER: cs_id, Side.HUMAN: hs_id},
            current={Side.COMPUTER: cs_id, Side.HUMAN: hs_id},
        )
        return {Side.COMPUTER: (cs_id, cs_created), Side.HUMAN: (hs_id, hs_created)}

    def close_session(self, session_id: str) -> None:
        cursor = self._live_cursor(session_id)
        cursor.closed = True

    def _live_cursor(self, session_id: str) -> SessionCursor:
        cursor = self._cursor(session_id)
        if cursor.closed:
            raise SessionClosed(f"session {session_id!r} is closed", session_id=session_id)
        return cursor

    def add_transition(
        self,
        session_id: str,
        side: Side,
        ops,
        update_payload: dict,
        new_state_payload: dict,
        wall_clock: Optional[str] = None,
        step: Optional[int] = None,
    ) -> Transition:
        """Apply one update to the current state of ``side``: C[t+1] = U[t](C[t]).

        ``step`` defaults to the session's next step. Passing the step that is
        currently open (next_step - 1) lets the other side join it.
        """
        side = Side(side)
        cursor = self._live_cursor(session_id)
        kinds = parse_ops(ops, side)
        update_payload = canonical.normalize_map(update_payload)
        new_state_payload = canonical.normalize_map(new_state_payload)
        if step is None:
            step = cursor.next_step
        if step not in (cursor.next_step, cursor.next_step - 1) or step < 0:
            raise StepConflict(f"step {step} is not open in session {session_id!r}", session_id=session_id)
        chain = self._chain_steps.get((session_id, side), [])
        if chain and chain[-1] >= step:
            raise StepConflict(
                f"{side.value} side of session {session_id!r} already has step {chain[-1]}",
                session_id=session_id,
            )
        lane = side.update_lane
        uid = update_id(session_id, lane, step)
        node = UpdateNode(
            id=uid,
            lane=lane,
            session_id=session_id,
            user_id=cursor.user_id,
            step=step,
            ops=kinds,
            payload=update_payload,
            wall_clock=wall_clock,
        )
        previous = self._chains[(session_id, side)][-1] if chain else None
        state_id, created = self.upsert_state(side.state_lane, new_state_payload)
        self.add_node(node)
        self.add_edge(Edge(EdgeKind.APPLIES_TO, cursor.current[side], uid))
        self.add_edge(Edge(EdgeKind.PRODUCES, uid, state_id))
        if previous is not None:
            self.add_edge(Edge(EdgeKind.TEMPORAL_NEXT, previous, uid, session=session_id))
        cursor.current[side] = state_id
        cursor.next_step = max(cursor.next_step, step + 1)
        return Transition(uid, state_id, created)

    def add_sync(self, session_id: str, step: int) -> int:
        """Link the human and computer sides of one step; returns edges added.

        With updates on both sides the two update nodes are linked. With only
        one, the update is linked to the state the other side occupied at that
        step. Edges always point from the human side to the computer side.
        """
        self._cursor(session_id)
        human = self.update_at(session_id, Side.HUMAN, step)
        computer = self.update_at(session_id, Side.COMPUTER, step)
        if human is None and computer is None:
            raise NoNodesAtStep(f"session {session_id!r} has no updates at step {step}", session_id=session_id)
        h = human.id if human else self.state_before(session_id, Side.HUMAN, step + 1)
        c = computer.id if computer else self.state_before(session_id, Side.COMPUTER, step + 1)
        edge = Edge(EdgeKind.SYNC, h, c, session=session_id, step=step)
        if self.has_edge(edge):
            return 0
        self.add_edge(edge)
        return 1

    # -- whole-graph -----------------------------------------------------

    def copy(self) -> "VakgGraph":
        g = VakgGraph()
        for node in self.nodes.values():
            g.add_node(node)
        for edge in self.edges:
            g.add_edge(edge)
        for sid, cur in self.sessions.items():
            g.sessions[sid] = SessionCursor.from_dict(cur.to_dict())
        return g

    def structure(self) -> dict:
        """Order-independent description used for equality and hashing."""
        nodes = sorted(node_record(n) for n in self.nodes.values())
        edges = sorted(edge_record(e) for e in self.edges)
        sessions = [self.sessions[s].to_dict() for s in sorted(self.sessions)]
        return {"nodes": nodes, "edges": edges, "sessions": sessions}

    def digest(self) -> str:
        text = json.dumps(self.structure(), sort_keys=True, separators=(",", ":"), ensure_ascii=False)
        return hashlib.sha256(text.encode("utf-8")).hexdigest()

    def structurally_equal(self, other: "VakgGraph") -> bool:
        return self.structure() == other.structure()

    def counts(self) -> dict:
        by_lane = {lane.value: 0 for lane in Lane}
        for n in self.nodes.values():
            by_lane[n.lane.value] += 1
        by_kind = {k.value: 0 for k in EdgeKind}
        for e in self.edges:
            by_kind[e.kind.value] += 1
        return {
            "nodes": len(self.nodes),
            "edges": len(self.edges),
            "sessions": len(self.sessions),
            "lanes": by_lane,
            "edge_kinds": by_kind,
        }


def node_record(node: Node) -> tuple:
    payload = canonical.dumps(node.payload)
    if isinstance(node, StateNode):
        return (node.id, node.lane.value, payload, "", "", -1, "", "")
    return (
        node.id,
        node.lane.value,
        payload,
        node.session_id,
        node.user_id,
        node.step,
        "".join(ops_text(node.ops)),
        node.wall_clock or "",
    )


def edge_record(edge: Edge) -> tuple:
    return (edge.kind.value, edge.source, edge.target, edge.session or "", -1 if edge.step is None else edge.step)


# Function-style aliases of the mutation API.

def upsert_state(graph: VakgGraph, lane: Lane, payload: dict) -> tuple:
    return graph.upsert_state(lane, payload)


def add_transition(graph: VakgGraph, session_id: str, side: Side, ops, update_payload: dict, new_state_payload: dict, **kw) -> Transition:
    return graph.add_transition(session_id, side, ops, update_payload, new_state_payload, **kw)


def add_sync(graph: VakgGraph, session_id: str, step: int) -> int:
    return graph.add_sync(session_id, step)
