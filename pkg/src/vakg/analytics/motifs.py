"""Cross-session usage motifs.

The predicates, over the state sequences ``a`` and ``b`` (initial state
first) of sessions in one state lane:

Divergence(a, b, s)
    ``s`` occurs in both, both sequences continue after some occurrence of
    ``s``, and the sets of states that follow ``s`` differ.
Convergence(a, b, s)
    ``s`` occurs in both, both reached ``s`` from some earlier state, and
    the sets of states that precede ``s`` differ. ``shares_goal`` is set
    when the two sessions also end in the same state.
Backtrack(a, s)
    ``s`` occurs at two positions ``i < j`` of ``a`` and the states that
    follow those two occurrences differ.
Loop(a, s)
    ``s`` occurs at two or more positions of ``a`` and no pair of them is a
    Backtrack. Every recurring state is thus exactly one of Loop or
    Backtrack.

One hit is reported per (motif, lane, anchor state, session set).
"""

from __future__ import annotations

import enum
import itertools
from collections import defaultdict
from dataclasses import dataclass
from typing import Dict, Iterable, List, Tuple

from ..errors import InvalidGraph
from ..graph import VakgGraph
from ..model import Lane
from ..validation import validate

STATE_LANES = (Lane.COMPUTER_STATE, Lane.HUMAN_STATE)


class Motif(str, enum.Enum):
    DIVERGENCE = "Divergence"
    CONVERGENCE = "Convergence"
    BACKTRACK = "Backtrack"
    LOOP = "Loop"


@dataclass(frozen=True)
class MotifHit:
    motif: Motif
    lane: Lane
    anchor: str
    sessions: Tuple[str, ...]
    # per session, the positions of the anchor in its state sequence
    positions: Tuple[Tuple[int, ...], ...] = ()
    shares_goal: bool = False

    @property
    def key(self) -> tuple:
        return (self.motif.value, self.lane.value, self.anchor, self.sessions)

    def to_dict(self) -> dict:
        return {
            "motif": self.motif.value,
            "lane": self.lane.value,
            "anchor": self.anchor,
            "sessions": list(self.sessions),
            "positions": [list(p) for p in self.positions],
            "shares_goal": self.shares_goal,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "MotifHit":
        return cls(
            Motif(d["motif"]),
            Lane(d["lane"]),
            d["anchor"],
            tuple(d["sessions"]),
            tuple(tuple(p) for p in d.get("positions", ())),
            bool(d.get("shares_goal", False)),
        )


def state_sequences(graph: VakgGraph, lane: Lane) -> Dict[str, List[str]]:
    side = Lane(lane).side
    return {sid: graph.state_sequence(sid, side) for sid in sorted(graph.sessions)}


class _Profile:
    __slots__ = ("seq", "occ", "succ", "pred")

    def __init__(self, seq: List[str]) -> None:
        self.seq = seq
        self.occ = defaultdict(list)
        self.succ = defaultdict(set)
        self.pred = defaultdict(set)
        for i, s in enumerate(seq):
            self.occ[s].append(i)
            if i + 1 < len(seq):
                self.succ[s].add(seq[i + 1])
            if i:
                self.pred[s].add(seq[i - 1])


def motifs_in_sequences(sequences: Dict[str, List[str]], lane: Lane) -> List[MotifHit]:
    lane = Lane(lane)
    profiles = {sid: _Profile(seq) for sid, seq in sequences.items()}
    hits: List[MotifHit] = []
    for sid in sorted(profiles):
        p = profiles[sid]
        for s, where in p.occ.items():
            if len(where) < 2:
                continue
            followers = {p.seq[i + 1] for i in where if i + 1 < len(p.seq)}
            motif = Motif.BACKTRACK if len(followers) > 1 else Motif.LOOP
            hits.append(MotifHit(motif, lane, s, (sid,), (tuple(where),)))
    for a, b in itertools.combinations(sorted(profiles), 2):
        pa, pb = profiles[a], profiles[b]
        for s in pa.occ.keys() & pb.occ.keys():
            where = (tuple(pa.occ[s]), tuple(pb.occ[s]))
            if pa.succ[s] and pb.succ[s] and pa.succ[s] != pb.succ[s]:
                hits.append(MotifHit(Motif.DIVERGENCE, lane, s, (a, b), where))
            if pa.pred[s] and pb.pred[s] and pa.pred[s] != pb.pred[s]:
                goal = pa.seq[-1] == pb.seq[-1]
                hits.append(MotifHit(Motif.CONVERGENCE, lane, s, (a, b), where, shares_goal=goal))
    return sorted(hits, key=lambda h: h.key)


def detect_motifs(graph: VakgGraph, lanes: Iterable[Lane] = STATE_LANES, check: bool = True) -> List[MotifHit]:
    """All motif hits in the given state lanes."""
    if check:
        problems = validate(graph)
        if problems:
            raise InvalidGraph(f"graph has {len(problems)} violations; first: {problems[0].message}")
    hits: List[MotifHit] = []
    for lane in lanes:
        lane = Lane(lane)
        if not lane.is_state:
            raise ValueError(f"motifs are defined over state lanes, not {lane.value}")
        hits.extend(motifs_in_sequences(state_sequences(graph, lane), lane))
    return sorted(hits, key=lambda h: h.key)
