"""Read-only JSON HTTP API over an immutable network snapshot.

GET  /datasets?FIELD=VALUE...&predicate=contains|equals
GET  /datasets/{entity_id}
GET  /datasets/{entity_id}/similar?k=5&c=0.15
GET  /papers/{paper_id}/datasets
GET  /stats
POST /admin/reload      re-read the snapshot file and swap it in atomically
"""
from __future__ import annotations

import json
import logging
import threading
from dataclasses import dataclass
from http import HTTPStatus
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path
from typing import Any
from urllib.parse import parse_qs, unquote, urlsplit

from ..errors import NotFound, QueryError
from ..model import PaperDatasetNetwork
from ..store import compute_stats, load_network
from .query import Clause, Predicate, QueryFilter, query_datasets
from .rwr import RwrParams, WalkGraph, similar_datasets

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class Snapshot:
    network: PaperDatasetNetwork
    runs: tuple[dict, ...]
    walk: WalkGraph

    @classmethod
    def load(cls, path: str | Path) -> Snapshot:
        net, runs = load_network(path)
        return cls(net, tuple(runs), WalkGraph.of(net))


class SnapshotHolder:
    """Readers grab ``current`` once per request; reload swaps the reference."""

    def __init__(self, path: str | Path):
        self.path = Path(path)
        self._lock = threading.Lock()
        self.current = Snapshot.load(self.path)

    def reload(self) -> Snapshot:
        fresh = Snapshot.load(self.path)
        with self._lock:
            self.current = fresh
        return fresh


class BadRequest(Exception):
    pass


def _entity_json(net: PaperDatasetNetwork, entity_id: str) -> dict:
    ent = net.entities[entity_id]
    data = ent.to_dict()
    data["papers"] = net.papers_of_entity(entity_id)
    return data


def handle(snap: Snapshot, path: str, query: dict[str, list[str]]) -> Any:
    """Route a GET request; returns a JSON-serializable body."""
    net = snap.network
    parts = [unquote(p) for p in path.strip("/").split("/") if p]
    if parts == ["datasets"]:
        predicate = query.pop("predicate", ["contains"])[-1]
        try:
            pred = Predicate(predicate)
        except ValueError:
            raise BadRequest(f"predicate must be 'contains' or 'equals', not {predicate!r}") from None
        clauses = tuple(Clause(f, pred, v) for f, values in sorted(query.items()) for v in values)
        if not clauses:
            raise BadRequest("give at least one FIELD=VALUE filter")
        return [d.to_dict() for d in query_datasets(net.descriptions.values(), QueryFilter(clauses))]
    if len(parts) == 2 and parts[0] == "datasets":
        if parts[1] not in net.entities:
            raise NotFound(f"unknown dataset {parts[1]!r}")
        return _entity_json(net, parts[1])
    if len(parts) == 3 and parts[0] == "datasets" and parts[2] == "similar":
        try:
            k = int(query.get("k", ["5"])[-1])
            c = float(query.get("c", ["0.15"])[-1])
            params = RwrParams(restart_prob=c, top_k=k)
        except ValueError as exc:
            raise BadRequest(str(exc)) from None
        ranked = similar_datasets(net, parts[1], params, snap.walk)
        return [
            {"entity_id": eid, "canonical_name": net.entities[eid].canonical_name, "score": score}
            for eid, score in ranked
        ]
    if len(parts) == 3 and parts[0] == "papers" and parts[2] == "datasets":
        if parts[1] not in net.papers:
            raise NotFound(f"unknown paper {parts[1]!r}")
        return [_entity_json(net, eid) for eid in net.entities_of_paper(parts[1])]
    if parts == ["stats"]:
        return compute_stats(net, snap.runs).to_dict()
    raise NotFound(f"no route for {path}")


def make_handler(holder: SnapshotHolder) -> type[BaseHTTPRequestHandler]:
    class Handler(BaseHTTPRequestHandler):
        server_version = "pdnet"

        def _send(self, status: HTTPStatus, body: Any) -> None:
            data = json.dumps(body, ensure_ascii=False, sort_keys=True).encode("utf-8")
            self.send_response(status)
            self.send_header("Content-Type", "application/json; charset=utf-8")
            self.send_header("Content-Length", str(len(data)))
            self.end_headers()
            self.wfile.write(data)

        def do_GET(self) -> None:  # noqa: N802
            url = urlsplit(self.path)
            try:
                body = handle(holder.current, url.path, parse_qs(url.query, keep_blank_values=True))
            except (BadRequest, QueryError) as exc:
                self._send(HTTPStatus.BAD_REQUEST, {"error": str(exc)})
            except NotFound as exc:
                self._send(HTTPStatus.NOT_FOUND, {"error": exc.args[0] if exc.args else "not found"})
            else:
                self._send(HTTPStatus.OK, body)

        def do_POST(self) -> None:  # noqa: N802
            if urlsplit(self.path).path.rstrip("/") != "/admin/reload":
                self._send(HTTPStatus.NOT_FOUND, {"error": "no route"})
                return
            try:
                snap = holder.reload()
            except (OSError, ValueError) as exc:
                self._send(HTTPStatus.INTERNAL_SERVER_ERROR, {"error": f"reload failed: {exc}"})
                return
            self._send(HTTPStatus.OK, {"reloaded": True, "papers": len(snap.network.papers)})

        def log_message(self, format: str, *args: Any) -> None:  # noqa: A002
            log.info("%s - %s", self.address_string(), format % args)

    return Handler


def make_server(snapshot_path: str | Path, host: str = "127.0.0.1", port: int = 8000) -> ThreadingHTTPServer:
    holder = SnapshotHolder(snapshot_path)
    server = ThreadingHTTPServer((host, port), make_handler(holder))
    server.holder = holder  # type: ignore[attr-defined]
    return server


def serve(snapshot_path: str | Path, host: str = "127.0.0.1", port: int = 8000) -> None:
    """Blocking.  Bind failures surface as OSError before serving starts."""
    server = make_server(snapshot_path, host, port)
    log.info("serving %s on http://%s:%d", snapshot_path, *server.server_address[:2])
    try:
        server.serve_forever()
    finally:
        server.server_close()
