"""Seeded generator of multi-user sessions with known motifs.

Randomness is keyed by ``(seed, session, step, purpose)`` through Philox
counter-based streams, so each draw is independent of generation order.

Every injected motif gets reserved anchor states that occur nowhere else,
which makes the injected hit present by construction:

* divergence: ``[s, x]`` in one session and ``[s, y]`` in another;
* convergence: ``[p, s]`` and ``[q, s]``;
* backtrack: ``[s, r1, s, r2]`` within one session;
* loop: ``[s, r, s]`` closing a session.

Filler states drawn from the remaining alphabet pad each session to its
sampled length and may add further, unlabelled motifs.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from datetime import datetime, timedelta, timezone
from pathlib import Path
from typing import Dict, List, Tuple

import numpy as np

from .analytics.motifs import Motif, MotifHit
from .errors import InfeasibleConfig
from .events import EventRecord
from .model import Lane, fingerprint_state

OPS = ("X", "P", "E", "V", "A")
MOTIF_KEYS = ("divergence", "convergence", "backtrack", "loop")
_RESERVED = {"divergence": 3, "convergence": 3, "backtrack": 3, "loop": 2}

# stream purposes
_ASSIGN, _LAYOUT, _FILLER, _OP, _HUMAN, _CLOCK = range(1, 7)

EPOCH = datetime(2024, 1, 1, tzinfo=timezone.utc)


def default_mix() -> Dict[str, float]:
    return {"X": 0.15, "P": 0.2, "E": 0.15, "V": 0.3, "A": 0.2}


@dataclass(frozen=True)
class ScenarioConfig:
    seed: int = 0
    users: int = 2
    steps: Tuple[int, int] = (4, 8)
    alphabet: int = 8
    motifs: Dict[str, int] = field(default_factory=dict)
    op_mix: Dict[str, float] = field(default_factory=default_mix)

    def motif_count(self, name: str) -> int:
        return int(self.motifs.get(name, 0))

    def check(self) -> None:
        unknown = set(self.motifs) - set(MOTIF_KEYS)
        if unknown:
            raise InfeasibleConfig(f"unknown motif kinds {sorted(unknown)}")
        if any(int(v) < 0 for v in self.motifs.values()):
            raise InfeasibleConfig("motif counts must be non-negative")
        if set(self.op_mix) != set(OPS):
            raise InfeasibleConfig(f"op_mix must give a probability for each of {OPS}")
        if any(p < 0 for p in self.op_mix.values()) or not math.isclose(sum(self.op_mix.values()), 1.0, abs_tol=1e-9):
            raise InfeasibleConfig("op_mix probabilities must be non-negative and sum to 1")
        if self.users < 1:
            raise InfeasibleConfig("need at least one user")
        lo, hi = self.steps
        if lo < 0 or lo > hi:
            raise InfeasibleConfig(f"bad step range {self.steps}")
        pairs = self.motif_count("divergence") + self.motif_count("convergence")
        if pairs and self.users < 2:
            raise InfeasibleConfig("divergence and convergence need two users")
        if self.motif_count("loop") > self.users:
            raise InfeasibleConfig("each loop closes a session, so loops cannot exceed users")
        if self.reserved_states() > self.alphabet:
            raise InfeasibleConfig(
                f"motifs need {self.reserved_states()} reserved states but the alphabet has {self.alphabet}"
            )

    def reserved_states(self) -> int:
        return sum(_RESERVED[k] * self.motif_count(k) for k in MOTIF_KEYS)

    def to_dict(self) -> dict:
        return {
            "seed": self.seed,
            "users": self.users,
            "steps": list(self.steps),
            "alphabet": self.alphabet,
            "motifs": {k: self.motif_count(k) for k in MOTIF_KEYS},
            "op_mix": dict(self.op_mix),
        }


@dataclass
class GroundTruth:
    config: dict
    hits: List[MotifHit]
    # session -> lane name -> state fingerprints, initial state first
    sequences: Dict[str, Dict[str, List[str]]]
    labels: Dict[str, Dict[str, List[str]]]

    def to_dict(self) -> dict:
        return {
            "config": self.config,
            "hits": [h.to_dict() for h in self.hits],
            "sequences": self.sequences,
            "labels": self.labels,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "GroundTruth":
        return cls(d["config"], [MotifHit.from_dict(h) for h in d["hits"]], d["sequences"], d["labels"])


def _rng(seed: int, session: int, step: int, purpose: int) -> np.random.Generator:
    seq = np.random.SeedSequence([seed & 0xFFFFFFFFFFFFFFFF, session, step, purpose])
    return np.random.Generator(np.random.Philox(seq))


def computer_payload(label: str) -> dict:
    tag = "prepare-data" if int(label[1:]) % 3 == 0 else "explore"
    return {"chart": label, "subtasks": [tag]}


def human_payload(label: str) -> dict:
    return {"knowledge": label}


def _layout(config: ScenarioConfig):
    """Per session: ordered motif segments and the labelled injections."""
    n = config.users
    labels = [f"c{i}" for i in range(config.alphabet)]
    reserved = iter(reversed(labels))
    segments: Dict[int, list] = {i: [] for i in range(n)}
    closing: Dict[int, list] = {}
    injections = []
    counter = 0
    for kind in MOTIF_KEYS:
        for _ in range(config.motif_count(kind)):
            rng = _rng(config.seed, 0, counter, _ASSIGN)
            counter += 1
            if kind in ("divergence", "convergence"):
                a, b = sorted(int(i) for i in rng.choice(n, size=2, replace=False))
                s, u, v = next(reserved), next(reserved), next(reserved)
                if kind == "divergence":
                    segments[a].append([s, u])
                    segments[b].append([s, v])
                    injections.append((Motif.DIVERGENCE, s, (a, b)))
                else:
                    segments[a].append([u, s])
                    segments[b].append([v, s])
                    injections.append((Motif.CONVERGENCE, s, (a, b)))
            elif kind == "backtrack":
                a = int(rng.integers(n))
                s, r1, r2 = next(reserved), next(reserved), next(reserved)
                segments[a].append([s, r1, s, r2])
                injections.append((Motif.BACKTRACK, s, (a,)))
            else:
                free = [i for i in range(n) if i not in closing]
                a = free[int(rng.integers(len(free)))]
                s, r = next(reserved), next(reserved)
                closing[a] = [s, r, s]
                injections.append((Motif.LOOP, s, (a,)))
    filler = labels[: config.alphabet - config.reserved_states()]
    return segments, closing, injections, filler


def _computer_sequence(config: ScenarioConfig, i: int, segs: list, close, filler: list) -> List[str]:
    rng = _rng(config.seed, i + 1, 0, _LAYOUT)
    order = [segs[j] for j in rng.permutation(len(segs))] if segs else []
    needed = sum(len(s) for s in order) + (len(close) if close else 0)
    lo, hi = config.steps
    if not filler:
        length = needed - 1
        if needed == 0 or not lo <= length <= hi:
            raise InfeasibleConfig(f"session {i} cannot be padded: no filler states left in the alphabet")
    else:
        lo = max(lo, needed - 1)
        if lo > hi:
            raise InfeasibleConfig(f"session {i} needs {needed} states but at most {hi + 1} fit the step range")
        length = int(rng.integers(lo, hi + 1))
    pad = length + 1 - needed
    gaps = rng.multinomial(pad, [1.0 / (len(order) + 1)] * (len(order) + 1)) if pad else [0] * (len(order) + 1)
    seq: List[str] = []

    def fill(count):
        for _ in range(int(count)):
            r = _rng(config.seed, i + 1, len(seq) + 1, _FILLER)
            seq.append(filler[int(r.integers(len(filler)))])

    for gap, seg in zip(gaps, order):
        fill(gap)
        seq.extend(seg)
    fill(gaps[-1])
    if close:
        seq.extend(close)
    return seq


def generate(config: ScenarioConfig) -> Tuple[List[EventRecord], GroundTruth]:
    config.check()
    segments, closing, injections, filler = _layout(config)
    ops_p = np.array([config.op_mix[o] for o in OPS], dtype=float)
    per_session: List[List[EventRecord]] = []
    sequences, labels = {}, {}
    sids = [f"s{i:02d}" for i in range(config.users)]
    for i, sid in enumerate(sids):
        cseq = _computer_sequence(config, i, segments[i], closing.get(i), filler)
        hseq = ["k0"]
        events = [EventRecord.session_start(sid, 0, f"u{i:02d}", computer_payload(cseq[0]), human_payload("k0"))]
        clock = EPOCH + timedelta(minutes=i)
        for k in range(len(cseq) - 1):
            op = OPS[int(_rng(config.seed, i + 1, k + 1, _OP).choice(len(OPS), p=ops_p))]
            clock += timedelta(seconds=int(_rng(config.seed, i + 1, k + 1, _CLOCK).integers(1, 31)))
            target = cseq[k + 1]
            computer_op = op if op in ("V", "A") else "V"
            computer = ([computer_op], {"action": f"{computer_op}:{target}"}, computer_payload(target))
            human = None
            if op in ("X", "P", "E"):
                knowledge = f"k{int(_rng(config.seed, i + 1, k + 1, _HUMAN).integers(config.alphabet))}"
                hseq.append(knowledge)
                human = ([op], {"interest": f"{op}:{knowledge}"}, human_payload(knowledge))
            stamp = clock.strftime("%Y-%m-%dT%H:%M:%SZ")
            events.append(EventRecord.step(sid, k + 1, computer=computer, human=human, wall_clock=stamp))
        events.append(EventRecord.session_end(sid, len(events)))
        per_session.append(events)
        labels[sid] = {Lane.COMPUTER_STATE.value: cseq, Lane.HUMAN_STATE.value: hseq}
        sequences[sid] = {
            Lane.COMPUTER_STATE.value: [fingerprint_state(Lane.COMPUTER_STATE, computer_payload(c)) for c in cseq],
            Lane.HUMAN_STATE.value: [fingerprint_state(Lane.HUMAN_STATE, human_payload(h)) for h in hseq],
        }

    hits = []
    for motif, label, members in injections:
        anchor = fingerprint_state(Lane.COMPUTER_STATE, computer_payload(label))
        sess = tuple(sids[m] for m in members)
        positions = tuple(
            tuple(j for j, c in enumerate(labels[s][Lane.COMPUTER_STATE.value]) if c == label) for s in sess
        )
        hits.append(MotifHit(motif, Lane.COMPUTER_STATE, anchor, sess, positions))
    hits.sort(key=lambda h: h.key)

    # round-robin interleaving across sessions
    events: List[EventRecord] = []
    for k in range(max(len(e) for e in per_session)):
        for evs in per_session:
            if k < len(evs):
                events.append(evs[k])
    return events, GroundTruth(config.to_dict(), hits, sequences, labels)


def truth_path(log_path) -> Path:
    """Sidecar location: ``a.jsonl`` -> ``a.truth.json``."""
    p = Path(log_path)
    return p.with_name(p.stem + ".truth.json")


def write_ground_truth(path, truth: GroundTruth) -> None:
    Path(path).write_text(json.dumps(truth.to_dict(), sort_keys=True, indent=1) + "\n", encoding="utf-8")


def load_ground_truth(path) -> GroundTruth:
    return GroundTruth.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))
