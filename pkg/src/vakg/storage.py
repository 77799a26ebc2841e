"""Event-log persistence and graph import/export."""

from __future__ import annotations

import csv
import io
import json
import os
import xml.etree.ElementTree as ET
from pathlib import Path
from typing import List, Optional, Union

from . import canonical
from .errors import InvalidEvent, InvalidGraph, LogClosed, ParseError, SchemaMismatch, UnsupportedFormat
from .events import EventRecord
from .graph import SessionCursor, VakgGraph
from .model import Edge, EdgeKind, Lane, OperationKind, StateNode, UpdateNode, ops_text

PathLike = Union[str, os.PathLike]


class LogHandle:
    """Append-only JSON-lines event log.

    With ``fsync=True`` every append is flushed to stable storage before the
    offset is returned.
    """

    def __init__(self, path: PathLike, fsync: bool = False) -> None:
        self.path = Path(path)
        self.fsync = fsync
        self._fh = open(self.path, "ab")
        self._fh.seek(0, os.SEEK_END)
        self.offset = self._fh.tell()

    @property
    def closed(self) -> bool:
        return self._fh is None

    def append(self, event: EventRecord) -> int:
        if self._fh is None:
            raise LogClosed(f"log {self.path} is closed")
        start = self.offset
        line = (event.to_json() + "\n").encode("utf-8")
        self._fh.write(line)
        self._fh.flush()
        if self.fsync:
            os.fsync(self._fh.fileno())
        self.offset = start + len(line)
        return start

    def close(self) -> None:
        if self._fh is not None:
            self._fh.close()
            self._fh = None

    def __enter__(self) -> "LogHandle":
        return self

    def __exit__(self, *exc) -> None:
        self.close()


def open_log(path: PathLike, fsync: bool = False) -> LogHandle:
    return LogHandle(path, fsync=fsync)


def append_event(log: LogHandle, event: EventRecord) -> int:
    return log.append(event)


def load_log(path: PathLike) -> List[EventRecord]:
    with open(path, "rb") as fh:
        data = fh.read()
    return parse_log(data)


def parse_log(data: bytes) -> List[EventRecord]:
    events = []
    lines = data.split(b"\n")
    if lines and lines[-1] == b"":
        lines.pop()
    for number, raw in enumerate(lines, start=1):
        try:
            text = raw.decode("utf-8")
        except UnicodeDecodeError:
            raise ParseError("invalid UTF-8", number) from None
        try:
            events.append(EventRecord.from_json(text))
        except InvalidEvent as exc:
            raise ParseError(exc.message, number) from exc
    return events


def write_log(path: PathLike, events) -> None:
    with open(path, "wb") as fh:
        for event in events:
            fh.write((event.to_json() + "\n").encode("utf-8"))


# -- export -----------------------------------------------------------------

FORMATS = ("graphml", "dot", "csv")

GRAPHML_NS = "http://graphml.graphdrawing.org/xmlns"

# (id, domain, type)
_KEYS = [
    ("lane", "node", "string"),
    ("payload", "node", "string"),
    ("session", "all", "string"),
    ("step", "all", "int"),
    ("user", "node", "string"),
    ("ops", "node", "string"),
    ("wall_clock", "node", "string"),
    ("kind", "edge", "string"),
    ("sessions", "graph", "string"),
]

_CLUSTERS = {
    Lane.COMPUTER_STATE: "computer_states",
    Lane.HUMAN_STATE: "human_states",
    Lane.COMPUTER_UPDATE: "computer_updates",
    Lane.HUMAN_UPDATE: "human_updates",
}


def export_graph(graph: VakgGraph, fmt: str) -> bytes:
    fmt = fmt.lower()
    if fmt not in FORMATS:
        raise UnsupportedFormat(f"unsupported export format {fmt!r}; choose from {', '.join(FORMATS)}")
    from .validation import validate

    problems = validate(graph)
    if problems:
        raise InvalidGraph(f"graph has {len(problems)} violations; first: {problems[0].message}")
    return {"graphml": to_graphml, "dot": to_dot, "csv": to_csv}[fmt](graph)


def _sorted_nodes(graph: VakgGraph):
    return sorted(graph.nodes.values(), key=lambda n: (list(Lane).index(n.lane), n.id))


def _sorted_edges(graph: VakgGraph):
    return sorted(graph.edges, key=Edge.sort_key)


def to_graphml(graph: VakgGraph) -> bytes:
    ET.register_namespace("", GRAPHML_NS)
    root = ET.Element(f"{{{GRAPHML_NS}}}graphml")
    for key, domain, typ in _KEYS:
        ET.SubElement(root, f"{{{GRAPHML_NS}}}key", {"id": key, "for": domain, "attr.name": key, "attr.type": typ})
    g = ET.SubElement(root, f"{{{GRAPHML_NS}}}graph", {"id": "vakg", "edgedefault": "directed"})

    def data(parent, key, value):
        el = ET.SubElement(parent, f"{{{GRAPHML_NS}}}data", {"key": key})
        el.text = str(value)

    sessions = [graph.sessions[s].to_dict() for s in sorted(graph.sessions)]
    data(g, "sessions", json.dumps(sessions, sort_keys=True, separators=(",", ":"), ensure_ascii=False))
    for node in _sorted_nodes(graph):
        el = ET.SubElement(g, f"{{{GRAPHML_NS}}}node", {"id": node.id})
        data(el, "lane", node.lane.value)
        data(el, "payload", canonical.dumps(node.payload))
        if isinstance(node, UpdateNode):
            data(el, "session", node.session_id)
            data(el, "step", node.step)
            data(el, "user", node.user_id)
            data(el, "ops", "".join(ops_text(node.ops)))
            if node.wall_clock is not None:
                data(el, "wall_clock", node.wall_clock)
    for i, edge in enumerate(_sorted_edges(graph)):
        el = ET.SubElement(g, f"{{{GRAPHML_NS}}}edge", {"id": f"e{i}", "source": edge.source, "target": edge.target})
        data(el, "kind", edge.kind.value)
        if edge.session is not None:
            data(el, "session", edge.session)
        if edge.step is not None:
            data(el, "step", edge.step)
    ET.indent(root)
    return ET.tostring(root, encoding="utf-8", xml_declaration=True) + b"\n"


def import_graphml(data: bytes) -> VakgGraph:
    try:
        root = ET.fromstring(data)
    except ET.ParseError as exc:
        raise SchemaMismatch(f"not well-formed XML: {exc}") from exc
    ns = {"g": GRAPHML_NS}
    if root.tag != f"{{{GRAPHML_NS}}}graphml":
        raise SchemaMismatch("root element is not graphml")
    declared = {k.get("id") for k in root.findall("g:key", ns)}
    missing = {"lane", "kind", "session", "step", "payload"} - declared
    if missing:
        raise SchemaMismatch(f"missing attribute keys {sorted(missing)}")
    g_el = root.find("g:graph", ns)
    if g_el is None:
        raise SchemaMismatch("no graph element")

    def values(el):
        return {d.get("key"): d.text or "" for d in el.findall("g:data", ns)}

    graph = VakgGraph()
    try:
        for el in g_el.findall("g:node", ns):
            v = values(el)
            lane = Lane(v["lane"])
            payload = canonical.normalize_map(json.loads(v["payload"]))
            if lane.is_state:
                graph.add_node(StateNode(el.get("id"), lane, payload))
            else:
                graph.add_node(UpdateNode(
                    id=el.get("id"),
                    lane=lane,
                    session_id=v["session"],
                    user_id=v["user"],
                    step=int(v["step"]),
                    ops=frozenset(OperationKind(c) for c in v["ops"]),
                    payload=payload,
                    wall_clock=v.get("wall_clock"),
                ))
        for el in g_el.findall("g:edge", ns):
            v = values(el)
            graph.add_edge(Edge(
                EdgeKind(v["kind"]),
                el.get("source"),
                el.get("target"),
                session=v.get("session"),
                step=int(v["step"]) if "step" in v else None,
            ))
        sessions = json.loads(values(g_el).get("sessions", "[]"))
        for d in sessions:
            cursor = SessionCursor.from_dict(d)
            graph.sessions[cursor.session_id] = cursor
    except (KeyError, ValueError, TypeError, InvalidGraph) as exc:
        raise SchemaMismatch(f"document does not match the export schema: {exc}") from exc
    return graph


def _dot_id(text: str) -> str:
    return '"' + text.replace("\\", "\\\\").replace('"', '\\"') + '"'


def to_dot(graph: VakgGraph) -> bytes:
    lines = ["digraph vakg {", "  rankdir=LR;"]
    nodes = _sorted_nodes(graph)
    for lane, name in _CLUSTERS.items():
        lines.append(f"  subgraph {name} {{")
        lines.append("    cluster=true;")
        lines.append(f"    label={_dot_id(name)};")
        for node in nodes:
            if node.lane is lane:
                attrs = {"lane": lane.value, "payload": canonical.dumps(node.payload)}
                if isinstance(node, UpdateNode):
                    attrs.update(session=node.session_id, step=str(node.step), ops="".join(ops_text(node.ops)))
                    label = f"{node.session_id}:{node.step} {''.join(ops_text(node.ops))}"
                else:
                    label = node.id[:8]
                attrs["label"] = label
                rendered = ", ".join(f"{k}={_dot_id(v)}" for k, v in attrs.items())
                lines.append(f"    {_dot_id(node.id)} [{rendered}];")
        lines.append("  }")
    for edge in _sorted_edges(graph):
        attrs = {"kind": edge.kind.value}
        if edge.session is not None:
            attrs["session"] = edge.session
        if edge.step is not None:
            attrs["step"] = str(edge.step)
        if edge.kind is EdgeKind.SYNC:
            attrs["style"] = "dashed"
        rendered = ", ".join(f"{k}={_dot_id(v)}" for k, v in attrs.items())
        lines.append(f"  {_dot_id(edge.source)} -> {_dot_id(edge.target)} [{rendered}];")
    lines.append("}")
    return ("\n".join(lines) + "\n").encode("utf-8")


CSV_HEADER = ["source", "target", "kind", "session", "step", "source_lane", "target_lane"]


def to_csv(graph: VakgGraph) -> bytes:
    """Edge list; nodes without any edge appear as rows of kind ``Node``."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    touched = set()
    for edge in _sorted_edges(graph):
        touched.update((edge.source, edge.target))
        w.writerow([
            edge.source,
            edge.target,
            edge.kind.value,
            edge.session or "",
            "" if edge.step is None else edge.step,
            graph.nodes[edge.source].lane.value,
            graph.nodes[edge.target].lane.value,
        ])
    for node in _sorted_nodes(graph):
        if node.id not in touched:
            w.writerow([node.id, "", "Node", "", "", node.lane.value, ""])
    return buf.getvalue().encode("utf-8")
