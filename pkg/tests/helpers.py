"""Event-script builders shared by the tests."""

from __future__ import annotations

from vakg.events import EventRecord
from vakg.model import Lane, fingerprint_state


def cs(label):
    return {"chart": label}


def hs(label):
    return {"knowledge": label}


def cfp(label):
    return fingerprint_state(Lane.COMPUTER_STATE, cs(label))


def hfp(label):
    return fingerprint_state(Lane.HUMAN_STATE, hs(label))


def session_events(sid, computer, human=None, user=None, start_human="k0", wall=False):
    """Events for one session.

    ``computer`` lists computer-state labels, initial first. ``human`` maps a
    step index to the human-state label reached at that step (steps count
    from 0). Extra steps beyond the computer script carry only a human part;
    script positions with neither part are skipped.
    """
    human = human or {}
    events = [EventRecord.session_start(sid, 0, user or f"user-{sid}", cs(computer[0]), hs(start_human))]
    steps = max(len(computer) - 1, max(human, default=-1) + 1)
    for k in range(steps):
        comp = (["V"], {"to": computer[k + 1]}, cs(computer[k + 1])) if k + 1 < len(computer) else None
        hum = (["P"], {"saw": k}, hs(human[k])) if k in human else None
        if comp is None and hum is None:
            continue
        stamp = f"2024-01-01T00:{k // 60:02d}:{k % 60:02d}Z" if wall else None
        events.append(EventRecord.step(sid, len(events), computer=comp, human=hum, wall_clock=stamp))
    events.append(EventRecord.session_end(sid, len(events)))
    return events


def script(sessions, humans=None, **kw):
    """Concatenate sessions given as ``{sid: computer labels}``."""
    humans = humans or {}
    out = []
    for sid, seq in sessions.items():
        out.extend(session_events(sid, seq, humans.get(sid), **kw))
    return out


MOTIF_FIXTURES = {
    # shared prefix [B, a1], then distinct
    "A": {"s1": ["B", "a1", "x1", "x2"], "s2": ["B", "a1", "y1", "y2"]},
    # different starts meet at M and share the end E
    "B": {"s1": ["B1", "p1", "M", "E"], "s2": ["B2", "q1", "M", "E"]},
    # leaves a, comes back and takes another way
    "C": {"s1": ["B", "a", "b", "a", "c", "E"]},
    # returns to the start and stops
    "D": {"s1": ["B", "a", "b", "B"]},
}

MOTIF_EXPECTED = {
    "A": ("Divergence", "a1", ("s1", "s2")),
    "B": ("Convergence", "M", ("s1", "s2")),
    "C": ("Backtrack", "a", ("s1",)),
    "D": ("Loop", "B", ("s1",)),
}
