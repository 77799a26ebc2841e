"""Turn an event stream into graph mutations, one session lifecycle at a time."""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional

from . import canonical
from .events import EventKind, EventRecord, StepPart
from .errors import OutOfOrderSeq, ReplayError, SessionClosed, UnknownSession, VakgError
from .graph import VakgGraph
from .model import OperationKind, Side, parse_ops


@dataclass
class StepResult:
    session_id: str
    kind: str
    step: Optional[int] = None
    update_ids: Dict[str, str] = field(default_factory=dict)
    state_ids: Dict[str, str] = field(default_factory=dict)
    created: Dict[str, bool] = field(default_factory=dict)
    sync_edges: int = 0

    def to_dict(self) -> dict:
        return {
            "session_id": self.session_id,
            "kind": self.kind,
            "step": self.step,
            "update_ids": dict(self.update_ids),
            "state_ids": dict(self.state_ids),
            "created": dict(self.created),
            "sync_edges": self.sync_edges,
        }


class GraphBuilder:
    """Single-writer front end of a :class:`VakgGraph`.

    Enforces contiguous per-session ``seq`` numbers and buffers annotations
    until the next human part of the same session.
    """

    def __init__(self, graph: Optional[VakgGraph] = None) -> None:
        self.graph = graph if graph is not None else VakgGraph()
        self._next_seq: Dict[str, int] = {}
        self._pending: Dict[str, List[dict]] = defaultdict(list)

    def expected_seq(self, session_id: str) -> Optional[int]:
        return self._next_seq.get(session_id)

    def ingest(self, event: EventRecord) -> StepResult:
        if event.kind is EventKind.SESSION_START:
            return self._start(event)
        sid = event.session_id
        if sid not in self._next_seq:
            raise UnknownSession(f"unknown session {sid!r}", session_id=sid)
        if self.graph.sessions[sid].closed:
            raise SessionClosed(f"session {sid!r} is closed", session_id=sid)
        self._check_seq(event)
        if event.kind is EventKind.STEP:
            result = self._step(event)
        elif event.kind is EventKind.ANNOTATION:
            self._pending[sid].append(event.payload or {})
            result = StepResult(sid, event.kind.value)
        else:
            result = self._end(event)
        self._next_seq[sid] += 1
        return result

    def _check_seq(self, event: EventRecord) -> None:
        expected = self._next_seq[event.session_id]
        if event.seq != expected:
            raise OutOfOrderSeq(
                f"session {event.session_id!r} expected seq {expected}, got {event.seq}",
                session_id=event.session_id,
                expected=expected,
            )

    def _start(self, event: EventRecord) -> StepResult:
        sid = event.session_id
        if sid not in self.graph.sessions and event.seq != 0:
            raise OutOfOrderSeq(f"SessionStart must have seq 0, got {event.seq}", session_id=sid, expected=0)
        opened = self.graph.open_session(sid, event.user_id, event.initial_computer_state, event.initial_human_state)
        self._next_seq[sid] = 1
        result = StepResult(sid, event.kind.value)
        for side, (state_id, created) in opened.items():
            result.state_ids[side.value.lower()] = state_id
            result.created[side.value.lower()] = created
        return result

    def _step(self, event: EventRecord) -> StepResult:
        sid = event.session_id
        human = event.human_part
        if human is not None and self._pending[sid]:
            human = _fold_annotations(human, self._pending[sid])
        parts = [(Side.COMPUTER, event.computer_part), (Side.HUMAN, human)]
        parts = [(side, part) for side, part in parts if part is not None]
        # reject the whole step before touching the graph
        for side, part in parts:
            parse_ops(part.ops, side)
            canonical.normalize_map(part.update_payload)
            canonical.normalize_map(part.new_state_payload)
        step = self.graph.sessions[sid].next_step
        result = StepResult(sid, event.kind.value, step=step)
        for side, part in parts:
            t = self.graph.add_transition(
                sid, side, part.ops, part.update_payload, part.new_state_payload,
                wall_clock=event.wall_clock, step=step,
            )
            key = side.value.lower()
            result.update_ids[key] = t.update_id
            result.state_ids[key] = t.state_id
            result.created[key] = t.created
        result.sync_edges = self.graph.add_sync(sid, step)
        if human is not None:
            self._pending.pop(sid, None)
        return result

    def _end(self, event: EventRecord) -> StepResult:
        sid = event.session_id
        result = StepResult(sid, event.kind.value)
        pending = self._pending.pop(sid, None)
        if pending:
            # leftover insights become their own externalization step
            graph = self.graph
            current = graph.nodes[graph.sessions[sid].current[Side.HUMAN]].payload
            new_state = dict(current)
            new_state["annotations"] = _as_list(current.get("annotations")) + pending
            step = graph.sessions[sid].next_step
            t = graph.add_transition(sid, Side.HUMAN, [OperationKind.EXTERNALIZATION.value],
                                     {"annotations": pending}, new_state, step=step)
            result.step = step
            result.update_ids["human"] = t.update_id
            result.state_ids["human"] = t.state_id
            result.created["human"] = t.created
            result.sync_edges = graph.add_sync(sid, step)
        self.graph.close_session(sid)
        return result


def _as_list(value) -> list:
    if value is None:
        return []
    return list(value) if isinstance(value, list) else [value]


def _fold_annotations(part: StepPart, pending: List[dict]) -> StepPart:
    payload = dict(part.update_payload)
    payload["annotations"] = _as_list(payload.get("annotations")) + list(pending)
    return StepPart(part.ops, payload, part.new_state_payload)


def ingest_event(builder: GraphBuilder, event: EventRecord) -> StepResult:
    return builder.ingest(event)


def replay(events: Iterable[EventRecord], builder: Optional[GraphBuilder] = None) -> VakgGraph:
    """Build a graph from an ordered event list; the first failure aborts."""
    builder = builder if builder is not None else GraphBuilder()
    for position, event in enumerate(events):
        try:
            builder.ingest(event)
        except VakgError as exc:
            raise ReplayError(position, exc) from exc
    return builder.graph
