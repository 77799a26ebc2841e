"""HTTP ingestion and query service.

Accepted events are appended to ``<data_dir>/events.jsonl`` before the
response is sent; on start-up the log is replayed, so an acknowledged event
survives a restart.
"""

from __future__ import annotations

import contextlib
import json
import logging
import os
import socket
import threading
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse, Response

from . import queries
from .errors import (
    BindFailure,
    ConfigError,
    InvalidEvent,
    PayloadTooLarge,
    VakgError,
)
from .events import EventKind, EventRecord
from .graph import VakgGraph
from .ingest import GraphBuilder, StepResult, replay
from .storage import LogHandle, export_graph, load_log

log = logging.getLogger(__name__)

STATUS = {
    "InvalidEvent": 400,
    "ParseError": 400,
    "PayloadError": 400,
    "UnsupportedFormat": 400,
    "UnknownSession": 404,
    "UnknownNode": 404,
    "NoPath": 404,
    "OutOfOrderSeq": 409,
    "DuplicateSessionStart": 409,
    "SessionClosed": 409,
    "StepConflict": 409,
    "PayloadTooLarge": 413,
    "IllegalOps": 422,
    "IllegalLane": 422,
    "UnreachableGoal": 422,
    "EmptyGraph": 422,
    "WeightUnavailable": 422,
    "InvalidGraph": 500,
}

MEDIA = {"graphml": "application/graphml+xml", "dot": "text/vnd.graphviz", "csv": "text/csv"}


@dataclass
class ServiceConfig:
    data_dir: Path
    listen: str = "127.0.0.1:8080"
    fsync: bool = True
    max_body_size: int = 1 << 20

    @classmethod
    def from_env(cls, **overrides) -> "ServiceConfig":
        values = {
            "data_dir": Path(os.environ.get("VAKG_DATA_DIR", "./vakg-data")),
            "listen": os.environ.get("VAKG_LISTEN", "127.0.0.1:8080"),
        }
        values.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**values)

    @property
    def host_port(self):
        host, _, port = self.listen.rpartition(":")
        if not host or not port.isdigit():
            raise ConfigError(f"listen address {self.listen!r} is not host:port")
        return host, int(port)

    def check(self) -> None:
        self.host_port
        if self.max_body_size <= 0:
            raise ConfigError("max_body_size must be positive")
        try:
            self.data_dir.mkdir(parents=True, exist_ok=True)
            probe = self.data_dir / ".write-probe"
            probe.write_bytes(b"")
            probe.unlink()
        except OSError as exc:
            raise ConfigError(f"data directory {self.data_dir} is not writable: {exc}") from exc


class Engine:
    """Builder, log and snapshot behind one writer lock.

    The single lock gives every session a total order; analytics read a
    copy of the graph taken after the most recent write.
    """

    def __init__(self, config: ServiceConfig) -> None:
        config.check()
        self.config = config
        self.log_path = config.data_dir / "events.jsonl"
        self._lock = threading.Lock()
        self._version = 0
        self._snapshot: Optional[VakgGraph] = None
        self._snapshot_version = -1
        self._load()

    def _load(self) -> None:
        events = load_log(self.log_path) if self.log_path.exists() else []
        self.builder = GraphBuilder()
        replay(events, self.builder)
        self.log = LogHandle(self.log_path, fsync=self.config.fsync)
        self._version += 1
        log.info("replayed %d events from %s", len(events), self.log_path)

    def submit(self, event: EventRecord) -> StepResult:
        with self._lock:
            result = self.builder.ingest(event)
            try:
                self.log.append(event)
            except OSError:
                # the in-memory graph is ahead of the log; rebuild from disk
                self.log.close()
                self._load()
                raise
            self._version += 1
            return result

    def snapshot(self) -> VakgGraph:
        with self._lock:
            if self._snapshot_version != self._version:
                self._snapshot = self.builder.graph.copy()
                self._snapshot_version = self._version
            return self._snapshot

    def close(self) -> None:
        with self._lock:
            self.log.close()


def _error(exc: VakgError) -> JSONResponse:
    return JSONResponse(exc.to_dict(), status_code=STATUS.get(exc.code, 400))


def create_app(config: ServiceConfig) -> FastAPI:
    engine = Engine(config)

    @contextlib.asynccontextmanager
    async def lifespan(app):
        yield
        engine.close()

    app = FastAPI(title="vakg", version="0.1.0", lifespan=lifespan)
    app.state.engine = engine

    @app.exception_handler(VakgError)
    async def _on_domain_error(request: Request, exc: VakgError):
        return _error(exc)

    async def read_event(request: Request, session_id: Optional[str] = None) -> EventRecord:
        body = await request.body()
        if len(body) > config.max_body_size:
            raise PayloadTooLarge(f"body exceeds {config.max_body_size} bytes")
        try:
            data = json.loads(body)
        except (json.JSONDecodeError, UnicodeDecodeError) as exc:
            raise InvalidEvent(f"body is not JSON: {exc}") from None
        if not isinstance(data, dict):
            raise InvalidEvent("body must be a JSON object")
        if session_id is not None:
            if data.setdefault("session_id", session_id) != session_id:
                raise InvalidEvent("session_id in body does not match the URL")
        return EventRecord.from_dict(data)

    @app.post("/v1/sessions", status_code=201)
    async def start_session(request: Request):
        event = await read_event(request)
        if event.kind is not EventKind.SESSION_START:
            raise InvalidEvent("POST /v1/sessions takes a SessionStart event")
        result = engine.submit(event)
        return {"session_id": event.session_id, "result": result.to_dict()}

    @app.post("/v1/sessions/{session_id}/events")
    async def post_event(session_id: str, request: Request):
        event = await read_event(request, session_id)
        if event.kind is EventKind.SESSION_START:
            raise InvalidEvent("start sessions with POST /v1/sessions")
        return engine.submit(event).to_dict()

    @app.get("/v1/graph/export")
    def export(format: str = "graphml"):
        data = export_graph(engine.snapshot(), format)
        return Response(data, media_type=MEDIA.get(format.lower(), "application/octet-stream"))

    @app.get("/v1/analytics/pagerank")
    def pagerank(lane: str = "computer_state", damping: float = 0.85, tolerance: float = 1e-9, max_iter: int = 100):
        try:
            return queries.pagerank_doc(engine.snapshot(), lane, damping, tolerance, max_iter)
        except ValueError as exc:
            raise InvalidEvent(str(exc)) from None

    @app.get("/v1/analytics/shortest-path")
    def shortest_path(request: Request, to: str, weight: str = "hop", lane: Optional[str] = None):
        source = request.query_params.get("from")
        if source is None:
            raise InvalidEvent("missing query parameter 'from'")
        return queries.path_doc(engine.snapshot(), source, to, weight, lane)

    @app.get("/v1/analytics/motifs")
    def motifs():
        return queries.motifs_doc(engine.snapshot())

    @app.get("/v1/analytics/importance")
    def importance(goal: str, cohort: Optional[str] = None):
        members = [s for s in cohort.split(",") if s] if cohort else None
        return queries.importance_doc(engine.snapshot(), goal, members)

    @app.get("/v1/analytics/stats")
    def stats():
        return queries.stats_doc(engine.snapshot())

    return app


def serve(config: ServiceConfig) -> None:
    """Run the service until interrupted."""
    import uvicorn

    config.check()
    host, port = config.host_port
    try:
        with socket.create_server((host, port)):
            pass
    except OSError as exc:
        raise BindFailure(f"cannot bind {config.listen}: {exc}") from exc
    uvicorn.run(create_app(config), host=host, port=port, log_level="info")
