from __future__ import annotations

from collections import Counter
from typing import Dict

from ..events import parse_timestamp
from ..graph import VakgGraph
from ..model import Side


def session_stats(graph: VakgGraph) -> Dict[str, dict]:
    """Per-session update counts, distinct states, recurring states and time span.

    ``distinct_*_states`` count the different states the session's updates
    led to, so a session that never acted reports zeros. ``loops`` counts
    states (in either lane, initial state included) occupied more than once.
    """
    out = {}
    for sid in sorted(graph.sessions):
        cursor = graph.sessions[sid]
        computer = graph.chain(sid, Side.COMPUTER)
        human = graph.chain(sid, Side.HUMAN)
        cseq = graph.state_sequence(sid, Side.COMPUTER)
        hseq = graph.state_sequence(sid, Side.HUMAN)
        moved_c = cseq[1:]
        moved_h = hseq[1:]
        loops = sum(1 for c in Counter(cseq).values() if c > 1) + sum(1 for c in Counter(hseq).values() if c > 1)
        stamps = [parse_timestamp(n.wall_clock) for n in computer + human if n.wall_clock]
        span = (max(stamps) - min(stamps)).total_seconds() if stamps else None
        out[sid] = {
            "user_id": cursor.user_id,
            "human_updates": len(human),
            "computer_updates": len(computer),
            "distinct_computer_states": len(set(moved_c)),
            "distinct_human_states": len(set(moved_h)),
            "distinct_states": len(set(moved_c)) + len(set(moved_h)),
            "loops": loops,
            "steps": cursor.next_step,
            "closed": cursor.closed,
            "wall_clock_span": span,
        }
    return out
