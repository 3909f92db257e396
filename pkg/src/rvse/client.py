"""Small urllib client for the repository API, used by tests and tooling."""

from __future__ import annotations

import json
from typing import List, Optional, Sequence, Tuple
from urllib import error, request

__all__ = ["ApiError", "RepositoryClient"]


class ApiError(Exception):
    """Non-2xx response: carries status, error code, detail, optional report."""

    def __init__(self, status: int, code: str, detail: str, report: Optional[dict] = None):
        super().__init__(f"{status} {code}: {detail}")
        self.status = status
        self.code = code
        self.detail = detail
        self.report = report


class RepositoryClient:
    def __init__(self, base_url: str, token: str, timeout: float = 30.0):
        self.base_url = base_url.rstrip("/")
        self.token = token
        self.timeout = timeout

    def _call(self, method: str, path: str, body: Optional[bytes] = None,
              content_type: str = "application/json") -> Tuple[int, bytes, dict]:
        req = request.Request(self.base_url + path, data=body, method=method)
        req.add_header("Authorization", f"Bearer {self.token}")
        if body is not None:
            req.add_header("Content-Type", content_type)
        try:
            with request.urlopen(req, timeout=self.timeout) as resp:
                return resp.status, resp.read(), dict(resp.headers)
        except error.HTTPError as exc:
            raw = exc.read()
            try:
                payload = json.loads(raw.decode("utf-8"))
            except (ValueError, UnicodeDecodeError):
                payload = {}
            raise ApiError(
                exc.code,
                payload.get("error", "error"),
                payload.get("detail", raw.decode("utf-8", "replace")),
                payload.get("report"),
            ) from None

    def upload_scenario(self, document: bytes) -> dict:
        _, body, _ = self._call("POST", "/api/v1/scenarios", document)
        return json.loads(body)

    def catalog(self) -> List[dict]:
        _, body, _ = self._call("GET", "/api/v1/catalog")
        return json.loads(body)

    def fetch_scenario(self, scenario_id: str, version: int) -> Tuple[bytes, str]:
        """Returns (canonical bytes, checksum from the response headers)."""
        _, body, headers = self._call("GET", f"/api/v1/scenarios/{scenario_id}/{version}")
        return body, headers.get("X-Checksum", "")

    def ingest_events(self, session_id: str, records: Sequence[dict]) -> int:
        data = json.dumps(list(records)).encode("utf-8")
        _, body, _ = self._call("POST", f"/api/v1/sessions/{session_id}/events", data)
        return json.loads(body)["accepted"]

    def learner_dashboard(self, learner_id: str) -> dict:
        _, body, _ = self._call("GET", f"/api/v1/dashboards/learner/{learner_id}")
        return json.loads(body)

    def cohort_dashboard(self, cohort_id: str) -> dict:
        _, body, _ = self._call("GET", f"/api/v1/dashboards/cohort/{cohort_id}")
        return json.loads(body)

    def alarms(self) -> List[dict]:
        _, body, _ = self._call("GET", "/api/v1/alarms")
        return json.loads(body)

    def media_put(self, scenario_id: str, rel_path: str, data: bytes) -> None:
        self._call("PUT", f"/api/v1/media/{scenario_id}/{rel_path}", data,
                   content_type="application/octet-stream")

    def media_get(self, scenario_id: str, rel_path: str) -> bytes:
        _, body, _ = self._call("GET", f"/api/v1/media/{scenario_id}/{rel_path}")
        return body
