"""Node, edge and lane types of the four-lane workflow graph."""

from __future__ import annotations

import enum
import hashlib
from dataclasses import dataclass, field
from typing import Optional, Union

from . import canonical
from .errors import IllegalLane, IllegalOps


class Lane(str, enum.Enum):
    COMPUTER_STATE = "ComputerState"
    HUMAN_STATE = "HumanState"
    COMPUTER_UPDATE = "ComputerUpdate"
    HUMAN_UPDATE = "HumanUpdate"

    @property
    def is_state(self) -> bool:
        return self in (Lane.COMPUTER_STATE, Lane.HUMAN_STATE)

    @property
    def side(self) -> "Side":
        if self in (Lane.COMPUTER_STATE, Lane.COMPUTER_UPDATE):
            return Side.COMPUTER
        return Side.HUMAN

    @classmethod
    def parse(cls, text: str) -> "Lane":
        """Accept ``ComputerState`` as well as ``computer_state``."""
        for lane in cls:
            if text in (lane.value, lane.snake):
                return lane
        raise ValueError(f"unknown lane {text!r}")

    @property
    def snake(self) -> str:
        return {
            Lane.COMPUTER_STATE: "computer_state",
            Lane.HUMAN_STATE: "human_state",
            Lane.COMPUTER_UPDATE: "computer_update",
            Lane.HUMAN_UPDATE: "human_update",
        }[self]


class Side(str, enum.Enum):
    COMPUTER = "Computer"
    HUMAN = "Human"

    @property
    def state_lane(self) -> Lane:
        return Lane.COMPUTER_STATE if self is Side.COMPUTER else Lane.HUMAN_STATE

    @property
    def update_lane(self) -> Lane:
        return Lane.COMPUTER_UPDATE if self is Side.COMPUTER else Lane.HUMAN_UPDATE

    @property
    def other(self) -> "Side":
        return Side.HUMAN if self is Side.COMPUTER else Side.COMPUTER


class OperationKind(str, enum.Enum):
    EXTERNALIZATION = "X"
    PERCEPTION = "P"
    EXPLORATION = "E"
    VISUALIZATION = "V"
    AUTOMATIC_ANALYSIS = "A"

    @property
    def side(self) -> Side:
        if self in (OperationKind.VISUALIZATION, OperationKind.AUTOMATIC_ANALYSIS):
            return Side.COMPUTER
        return Side.HUMAN


HUMAN_OPS = frozenset({OperationKind.EXTERNALIZATION, OperationKind.PERCEPTION, OperationKind.EXPLORATION})
COMPUTER_OPS = frozenset({OperationKind.VISUALIZATION, OperationKind.AUTOMATIC_ANALYSIS})


def parse_ops(ops, side: Side) -> frozenset:
    """Coerce op letters to :class:`OperationKind` and check the lane restriction."""
    try:
        kinds = frozenset(OperationKind(o) for o in ops)
    except (ValueError, TypeError) as exc:
        raise IllegalOps(f"unknown operation kind in {ops!r}") from exc
    if not kinds:
        raise IllegalOps("ops must be non-empty")
    bad = sorted(k.value for k in kinds if k.side is not side)
    if bad:
        raise IllegalOps(f"ops {bad} are not legal on the {side.value} side")
    return kinds


def ops_text(ops) -> list:
    """Ops in a fixed order, for serialization."""
    order = "XPEVA"
    return sorted((o.value for o in ops), key=order.index)


class EdgeKind(str, enum.Enum):
    TEMPORAL_NEXT = "TemporalNext"
    APPLIES_TO = "AppliesTo"
    PRODUCES = "Produces"
    SYNC = "Sync"


def fingerprint_state(lane: Lane, payload: dict) -> str:
    lane = Lane(lane)
    if not lane.is_state:
        raise IllegalLane(f"{lane.value} is not a state lane")
    data = canonical.state_bytes(lane.value, canonical.normalize_map(payload))
    return hashlib.sha256(data).hexdigest()


def update_id(session_id: str, lane: Lane, step: int) -> str:
    return f"({session_id}, {Lane(lane).value}, {step})"


@dataclass(frozen=True, eq=True)
class StateNode:
    id: str
    lane: Lane
    payload: dict = field(default_factory=dict, compare=True, hash=False)

    @property
    def side(self) -> Side:
        return self.lane.side

    @property
    def subtasks(self) -> list:
        return list(self.payload.get("subtasks", ()))


@dataclass(frozen=True, eq=True)
class UpdateNode:
    id: str
    lane: Lane
    session_id: str
    user_id: str
    step: int
    ops: frozenset
    payload: dict = field(default_factory=dict, hash=False)
    wall_clock: Optional[str] = None

    @property
    def side(self) -> Side:
        return self.lane.side

    @property
    def subtasks(self) -> list:
        return list(self.payload.get("subtasks", ()))


Node = Union[StateNode, UpdateNode]


@dataclass(frozen=True, order=True)
class Edge:
    """A typed link.

    ``session`` is set for TemporalNext and Sync edges; ``step`` only for Sync.
    """

    kind: EdgeKind
    source: str
    target: str
    session: Optional[str] = None
    step: Optional[int] = None

    def sort_key(self):
        return (self.kind.value, self.source, self.target, self.session or "", -1 if self.step is None else self.step)
