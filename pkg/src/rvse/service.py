"""HTTP/1.1 JSON API in front of the repository store.

All routes live under ``/api/v1`` and authenticate with static bearer tokens
(``Authorization: Bearer <token>``). Errors come back as
``{"error": code, "detail": text}`` with conventional status codes; failed
scenario validation (422) embeds the full ValidationReport. Responses carry
permissive CORS headers so the browser webapp can talk to the service
directly. One line per request is logged to stderr.
"""

from __future__ import annotations

import json
import re
import threading
from hashlib import sha256
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from typing import Dict, Optional
from urllib.parse import unquote

from .store import (
    MalformedBatch,
    NotFound,
    OutOfOrderBatch,
    Principal,
    RepositoryStore,
    Unauthorized,
    UnknownScenario,
    ValidationFailed,
)
from .scenario import MalformedDocument, SchemaViolation

__all__ = ["RepositoryServer"]

_ROUTES = [
    ("POST", re.compile(r"^/api/v1/scenarios$"), "upload"),
    ("GET", re.compile(r"^/api/v1/catalog$"), "catalog"),
    ("GET", re.compile(r"^/api/v1/scenarios/([^/]+)/(\d+)$"), "fetch"),
    ("POST", re.compile(r"^/api/v1/sessions/([^/]+)/events$"), "ingest"),
    ("GET", re.compile(r"^/api/v1/dashboards/learner/([^/]+)$"), "learner_dashboard"),
    ("GET", re.compile(r"^/api/v1/dashboards/cohort/([^/]+)$"), "cohort_dashboard"),
    ("GET", re.compile(r"^/api/v1/alarms$"), "alarms"),
    ("PUT", re.compile(r"^/api/v1/media/([^/]+)/(.+)$"), "media_put"),
    ("GET", re.compile(r"^/api/v1/media/([^/]+)/(.+)$"), "media_get"),
]


class _Handler(BaseHTTPRequestHandler):
    protocol_version = "HTTP/1.1"
    server: "RepositoryServer"

    # -- plumbing -----------------------------------------------------------

    def _respond(self, status: int, body: bytes, content_type: str,
                 extra_headers: Optional[dict] = None) -> None:
        self.send_response(status)
        self.send_header("Content-Type", content_type)
        self.send_header("Content-Length", str(len(body)))
        self.send_header("Access-Control-Allow-Origin", "*")
        for name, value in (extra_headers or {}).items():
            self.send_header(name, value)
        self.end_headers()
        self.wfile.write(body)

    def _json(self, status: int, payload, extra_headers: Optional[dict] = None) -> None:
        body = json.dumps(payload, sort_keys=True).encode("utf-8")
        self._respond(status, body, "application/json", extra_headers)

    def _error(self, status: int, code: str, detail: str, **extra) -> None:
        self._json(status, {"error": code, "detail": detail, **extra})

    def _body(self) -> bytes:
        length = int(self.headers.get("Content-Length") or 0)
        return self.rfile.read(length) if length else b""

    def _principal(self) -> Principal:
        header = self.headers.get("Authorization") or ""
        if not header.startswith("Bearer "):
            raise Unauthorized("missing bearer token")
        principal = self.server.principals.get(header[len("Bearer "):].strip())
        if principal is None:
            raise Unauthorized("unknown token")
        return principal

    def _dispatch(self, method: str) -> None:
        path = self.path.split("?", 1)[0]
        for route_method, pattern, name in _ROUTES:
            if route_method != method:
                continue
            match = pattern.match(path)
            if match:
                args = tuple(unquote(g) for g in match.groups())
                try:
                    getattr(self, f"_op_{name}")(*args)
                except Unauthorized as exc:
                    self._error(401, "unauthorized", str(exc))
                except UnknownScenario as exc:
                    self._error(404, "unknown_scenario", str(exc))
                except NotFound as exc:
                    self._error(404, "not_found", str(exc))
                except OutOfOrderBatch as exc:
                    self._error(409, "out_of_order", str(exc))
                except (MalformedBatch, MalformedDocument, SchemaViolation) as exc:
                    self._error(400, "malformed", str(exc))
                except ValidationFailed as exc:
                    self._error(422, "validation_failed", "scenario is not deployable",
                                report=exc.report.to_dict())
                return
        self._error(404, "not_found", f"no route for {method} {path}")

    def do_GET(self) -> None:  # noqa: N802  (http.server naming)
        self._dispatch("GET")

    def do_POST(self) -> None:  # noqa: N802
        self._dispatch("POST")

    def do_PUT(self) -> None:  # noqa: N802
        self._dispatch("PUT")

    def do_OPTIONS(self) -> None:  # noqa: N802  (CORS preflight)
        self.send_response(204)
        self.send_header("Access-Control-Allow-Origin", "*")
        self.send_header("Access-Control-Allow-Methods", "GET, POST, PUT, OPTIONS")
        self.send_header("Access-Control-Allow-Headers", "Authorization, Content-Type")
        self.send_header("Content-Length", "0")
        self.end_headers()

    # -- operations ---------------------------------------------------------

    def _op_upload(self) -> None:
        principal = self._principal()
        receipt = self.server.store.upload_scenario(principal, self._body())
        self._json(201, receipt.to_dict())

    def _op_catalog(self) -> None:
        principal = self._principal()
        entries = self.server.store.list_catalog(principal)
        self._json(200, [e.to_dict() for e in entries])

    def _op_fetch(self, scenario_id: str, version: str) -> None:
        principal = self._principal()
        data = self.server.store.fetch_scenario(principal, scenario_id, int(version))
        digest = sha256(data).hexdigest()
        self._respond(200, data, "application/json",
                      {"ETag": f'"{digest}"', "X-Checksum": digest})

    def _op_ingest(self, session_id: str) -> None:
        principal = self._principal()
        try:
            batch = json.loads(self._body().decode("utf-8"))
        except (UnicodeDecodeError, json.JSONDecodeError) as exc:
            self._error(400, "malformed", f"body is not valid JSON: {exc}")
            return
        if not isinstance(batch, list):
            self._error(400, "malformed", "body must be a JSON array of events")
            return
        accepted = self.server.store.ingest_events(principal, session_id, batch)
        self._json(200, {"accepted": accepted})

    def _op_learner_dashboard(self, learner_id: str) -> None:
        principal = self._principal()
        self._json(200, self.server.store.learner_dashboard(principal, learner_id))

    def _op_cohort_dashboard(self, cohort_id: str) -> None:
        principal = self._principal()
        self._json(200, self.server.store.cohort_dashboards(principal, cohort_id))

    def _op_alarms(self) -> None:
        principal = self._principal()
        self._json(200, self.server.store.get_alarms(principal))

    def _op_media_put(self, scenario_id: str, rel_path: str) -> None:
        principal = self._principal()
        self.server.store.media_put(principal, scenario_id, rel_path, self._body())
        self._respond(204, b"", "application/octet-stream")

    def _op_media_get(self, scenario_id: str, rel_path: str) -> None:
        principal = self._principal()
        data = self.server.store.media_get(principal, scenario_id, rel_path)
        self._respond(200, data, "application/octet-stream")


class RepositoryServer(ThreadingHTTPServer):
    """Threaded HTTP server bound to a store and a token table.

    ``port=0`` binds an ephemeral port; read it back from ``.port``.
    """

    daemon_threads = True

    def __init__(self, store: RepositoryStore, principals: Dict[str, Principal],
                 host: str = "127.0.0.1", port: int = 0):
        self.store = store
        self.principals = principals
        self._thread: Optional[threading.Thread] = None
        super().__init__((host, port), _Handler)

    @property
    def port(self) -> int:
        return self.server_address[1]

    @property
    def base_url(self) -> str:
        return f"http://{self.server_address[0]}:{self.port}"

    def start(self) -> None:
        """Serve in a background thread (for tests and embedding)."""
        self._thread = threading.Thread(target=self.serve_forever, daemon=True)
        self._thread.start()

    def stop(self) -> None:
        self.shutdown()
        self.server_close()
        if self._thread is not None:
            self._thread.join(timeout=5)
            self._thread = None
