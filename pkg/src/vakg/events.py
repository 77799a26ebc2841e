"""Event records: the unit of the append-only log."""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field
from datetime import datetime
from typing import Optional

from . import canonical
from .errors import InvalidEvent, PayloadError


class EventKind(str, enum.Enum):
    SESSION_START = "SessionStart"
    STEP = "Step"
    ANNOTATION = "Annotation"
    SESSION_END = "SessionEnd"


@dataclass(frozen=True)
class StepPart:
    ops: tuple
    update_payload: dict = field(default_factory=dict)
    new_state_payload: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "ops": list(self.ops),
            "update_payload": self.update_payload,
            "new_state_payload": self.new_state_payload,
        }

    @classmethod
    def from_dict(cls, d, where: str) -> "StepPart":
        if not isinstance(d, dict):
            raise InvalidEvent(f"{where} must be an object")
        unknown = set(d) - {"ops", "update_payload", "new_state_payload"}
        if unknown:
            raise InvalidEvent(f"{where} has unknown fields {sorted(unknown)}")
        ops = d.get("ops")
        if not isinstance(ops, list) or not all(isinstance(o, str) for o in ops):
            raise InvalidEvent(f"{where}.ops must be a list of operation letters")
        return cls(tuple(ops), _map(d.get("update_payload"), where), _map(d.get("new_state_payload"), where))


_FIELDS = {
    EventKind.SESSION_START: {"user_id", "initial_computer_state", "initial_human_state"},
    EventKind.STEP: {"computer_part", "human_part", "wall_clock"},
    EventKind.ANNOTATION: {"payload"},
    EventKind.SESSION_END: set(),
}


@dataclass(frozen=True)
class EventRecord:
    kind: EventKind
    session_id: str
    seq: int
    user_id: Optional[str] = None
    initial_computer_state: Optional[dict] = None
    initial_human_state: Optional[dict] = None
    computer_part: Optional[StepPart] = None
    human_part: Optional[StepPart] = None
    payload: Optional[dict] = None
    wall_clock: Optional[str] = None

    @classmethod
    def session_start(cls, session_id, seq, user_id, computer_state, human_state):
        return cls(EventKind.SESSION_START, session_id, seq, user_id=user_id,
                   initial_computer_state=computer_state, initial_human_state=human_state)

    @classmethod
    def step(cls, session_id, seq, computer=None, human=None, wall_clock=None):
        """``computer`` / ``human`` are ``(ops, update_payload, new_state_payload)`` triples."""
        return cls(EventKind.STEP, session_id, seq,
                   computer_part=StepPart(tuple(computer[0]), computer[1], computer[2]) if computer else None,
                   human_part=StepPart(tuple(human[0]), human[1], human[2]) if human else None,
                   wall_clock=wall_clock)

    @classmethod
    def annotation(cls, session_id, seq, payload):
        return cls(EventKind.ANNOTATION, session_id, seq, payload=payload)

    @classmethod
    def session_end(cls, session_id, seq):
        return cls(EventKind.SESSION_END, session_id, seq)

    def to_dict(self) -> dict:
        d = {"kind": self.kind.value, "session_id": self.session_id, "seq": self.seq}
        if self.kind is EventKind.SESSION_START:
            d["user_id"] = self.user_id
            d["initial_computer_state"] = self.initial_computer_state
            d["initial_human_state"] = self.initial_human_state
        elif self.kind is EventKind.STEP:
            if self.computer_part is not None:
                d["computer_part"] = self.computer_part.to_dict()
            if self.human_part is not None:
                d["human_part"] = self.human_part.to_dict()
            if self.wall_clock is not None:
                d["wall_clock"] = self.wall_clock
        elif self.kind is EventKind.ANNOTATION:
            d["payload"] = self.payload
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"), ensure_ascii=False)

    @classmethod
    def from_json(cls, text: str) -> "EventRecord":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise InvalidEvent(f"malformed JSON: {exc.msg}") from exc
        return cls.from_dict(data)

    @classmethod
    def from_dict(cls, d) -> "EventRecord":
        if not isinstance(d, dict):
            raise InvalidEvent("event must be a JSON object")
        try:
            kind = EventKind(d.get("kind"))
        except ValueError:
            raise InvalidEvent(f"unknown event kind {d.get('kind')!r}") from None
        unknown = set(d) - {"kind", "session_id", "seq"} - _FIELDS[kind]
        if unknown:
            raise InvalidEvent(f"{kind.value} event has unknown fields {sorted(unknown)}")
        sid = d.get("session_id")
        if not isinstance(sid, str) or not sid:
            raise InvalidEvent("session_id must be a non-empty string")
        seq = d.get("seq")
        if not isinstance(seq, int) or isinstance(seq, bool) or seq < 0:
            raise InvalidEvent("seq must be a non-negative integer")
        if kind is EventKind.SESSION_START:
            user = d.get("user_id")
            if not isinstance(user, str) or not user:
                raise InvalidEvent("SessionStart requires a user_id")
            return cls(kind, sid, seq, user_id=user,
                       initial_computer_state=_map(d.get("initial_computer_state"), "initial_computer_state"),
                       initial_human_state=_map(d.get("initial_human_state"), "initial_human_state"))
        if kind is EventKind.STEP:
            cp = d.get("computer_part")
            hp = d.get("human_part")
            if cp is None and hp is None:
                raise InvalidEvent("Step needs a computer_part, a human_part or both")
            wall = d.get("wall_clock")
            if wall is not None:
                check_timestamp(wall)
            return cls(kind, sid, seq,
                       computer_part=StepPart.from_dict(cp, "computer_part") if cp is not None else None,
                       human_part=StepPart.from_dict(hp, "human_part") if hp is not None else None,
                       wall_clock=wall)
        if kind is EventKind.ANNOTATION:
            return cls(kind, sid, seq, payload=_map(d.get("payload"), "payload"))
        return cls(kind, sid, seq)


def _map(value, where: str) -> dict:
    try:
        return canonical.normalize_map(value)
    except PayloadError as exc:
        raise InvalidEvent(f"{where}: {exc.message}") from exc


def parse_timestamp(text: str) -> datetime:
    if text.endswith(("Z", "z")):
        text = text[:-1] + "+00:00"
    stamp = datetime.fromisoformat(text)
    if stamp.tzinfo is None:
        raise ValueError("missing UTC offset")
    return stamp


def check_timestamp(text) -> None:
    if not isinstance(text, str):
        raise InvalidEvent("wall_clock must be an RFC 3339 string")
    try:
        parse_timestamp(text)
    except ValueError as exc:
        raise InvalidEvent(f"wall_clock {text!r} is not RFC 3339: {exc}") from None
