"""The remote repository: versioned scenario storage, event ingestion, dashboards.

Persistence is a plain directory tree, inspectable and backupable with no
database: canonical scenario bytes under ``scenarios/{id}/{version}.rvs.json``,
session logs under ``events/{session_id}.events.jsonl``, opaque media under
``media/{scenario_id}/...``, plus one ``index.json`` rewritten atomically.

Writes are serialized (version assignment store-wide, event appends per
session); reads go straight to the immutable stored bytes. Role checks live
here so every entry point enforces the same matrix:

    creator: upload scenarios, put media, read alarms
    tutor:   catalog, fetch, media, cohort dashboards
    learner: catalog, fetch, media, ingest events, own dashboard
"""

from __future__ import annotations

import hashlib
import json
import os
import re
import threading
from dataclasses import dataclass
from datetime import datetime, timezone
from enum import Enum
from pathlib import Path
from typing import Dict, List, Mapping, Optional, Sequence

from . import analytics
from .analytics import DetectorConfig, SessionSummary
from .engine import check_event_record, dump_event_lines, load_event_lines
from .scenario import (
    SchemaViolation,
    ValidationReport,
    canonical_serialize,
    parse_scenario,
    validate,
)

__all__ = [
    "CatalogEntry",
    "MalformedBatch",
    "NotFound",
    "OutOfOrderBatch",
    "Principal",
    "RepositoryStore",
    "Role",
    "StoreError",
    "Unauthorized",
    "UnknownScenario",
    "UploadReceipt",
    "ValidationFailed",
    "load_principals",
]


class StoreError(Exception):
    pass


class Unauthorized(StoreError):
    pass


class NotFound(StoreError):
    pass


class UnknownScenario(StoreError):
    pass


class OutOfOrderBatch(StoreError):
    pass


class MalformedBatch(StoreError):
    pass


class ValidationFailed(StoreError):
    def __init__(self, report: ValidationReport):
        super().__init__("scenario has validation errors")
        self.report = report


class Role(str, Enum):
    CREATOR = "creator"
    TUTOR = "tutor"
    LEARNER = "learner"


@dataclass(frozen=True)
class Principal:
    token: str
    name: str
    role: Role
    cohort_id: Optional[str] = None


@dataclass(frozen=True)
class CatalogEntry:
    id: str
    latest_version: int
    title: str
    tags: tuple
    checksum: str
    published_at: str

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "latest_version": self.latest_version,
            "title": self.title,
            "tags": list(self.tags),
            "checksum": self.checksum,
            "published_at": self.published_at,
        }


@dataclass(frozen=True)
class UploadReceipt:
    id: str
    version: int
    checksum: str

    def to_dict(self) -> dict:
        return {"id": self.id, "version": self.version, "checksum": self.checksum}


def load_principals(raw: Mapping) -> Dict[str, Principal]:
    """Build the token table from config data: {token: {name, role, cohort_id?}}."""
    principals = {}
    for token, entry in raw.items():
        if not isinstance(entry, dict):
            raise ValueError(f"principal for token {token!r} must be an object")
        unknown = set(entry) - {"name", "role", "cohort_id"}
        if unknown:
            raise ValueError(f"unknown principal keys {sorted(unknown)} for token {token!r}")
        try:
            role = Role(entry["role"])
        except (KeyError, ValueError):
            raise ValueError(f"principal for token {token!r} needs a role "
                             f"in {[r.value for r in Role]}") from None
        name = entry.get("name")
        if not name or not isinstance(name, str):
            raise ValueError(f"principal for token {token!r} needs a nonempty name")
        principals[token] = Principal(
            token=token, name=name, role=role, cohort_id=entry.get("cohort_id"),
        )
    return principals


def _utc_now() -> str:
    return datetime.now(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


# ids arriving over URLs become file names; "." and ".." never qualify
_SAFE_ID = re.compile(r"^(?!\.\.?$)[A-Za-z0-9._~-]+$")


def _check_id(value: str, what: str) -> str:
    if not _SAFE_ID.match(value):
        raise NotFound(f"no such {what}: {value!r}")
    return value


class RepositoryStore:
    """Filesystem-backed repository. Safe for concurrent use from threads."""

    def __init__(self, root: Path, cohort_of: Optional[Mapping] = None,
                 detector_config: Optional[DetectorConfig] = None):
        self.root = Path(root)
        self.scenarios_dir = self.root / "scenarios"
        self.events_dir = self.root / "events"
        self.media_dir = self.root / "media"
        for d in (self.scenarios_dir, self.events_dir, self.media_dir):
            d.mkdir(parents=True, exist_ok=True)
        self.index_path = self.root / "index.json"
        self.cohort_of = dict(cohort_of or {})
        self.detector_config = detector_config or DetectorConfig()
        self._lock = threading.Lock()
        self._session_locks: Dict[str, threading.Lock] = {}
        self._session_locks_guard = threading.Lock()
        self._index = self._load_index()

    # -- index persistence ---------------------------------------------------

    def _load_index(self) -> dict:
        if self.index_path.exists():
            return json.loads(self.index_path.read_text("utf-8"))
        return {"scenarios": {}}

    def _write_index(self) -> None:
        tmp = self.index_path.with_suffix(".json.tmp")
        tmp.write_text(json.dumps(self._index, indent=2, sort_keys=True), "utf-8")
        os.replace(tmp, self.index_path)

    # -- roles ---------------------------------------------------------------

    @staticmethod
    def _require(principal: Principal, *roles: Role) -> None:
        if principal.role not in roles:
            raise Unauthorized(f"role {principal.role.value} may not perform this operation")

    # -- scenario content ------------------------------------------------------

    def upload_scenario(self, principal: Principal, document: bytes) -> UploadReceipt:
        """Validate and store a scenario under the next server-assigned version."""
        self._require(principal, Role.CREATOR)
        scenario = parse_scenario(document)
        report = validate(scenario)
        if report.errors:
            raise ValidationFailed(report)
        with self._lock:
            entry = self._index["scenarios"].get(scenario.id)
            version = (entry["latest"] if entry else 0) + 1
            stored = scenario.with_version(version)
            data = canonical_serialize(stored)
            digest = hashlib.sha256(data).hexdigest()
            target_dir = self.scenarios_dir / scenario.id
            target_dir.mkdir(parents=True, exist_ok=True)
            (target_dir / f"{version}.rvs.json").write_bytes(data)
            self._index["scenarios"][scenario.id] = {
                "latest": version,
                "title": stored.meta.title,
                "tags": list(stored.meta.tags),
                "checksum": digest,
                "published_at": _utc_now(),
                "author": principal.name,
            }
            self._write_index()
        return UploadReceipt(id=scenario.id, version=version, checksum=digest)

    def list_catalog(self, principal: Principal) -> List[CatalogEntry]:
        self._require(principal, Role.TUTOR, Role.LEARNER)
        with self._lock:
            snapshot = {sid: dict(e) for sid, e in self._index["scenarios"].items()}
        return [
            CatalogEntry(
                id=sid,
                latest_version=e["latest"],
                title=e["title"],
                tags=tuple(e["tags"]),
                checksum=e["checksum"],
                published_at=e["published_at"],
            )
            for sid, e in sorted(snapshot.items())
        ]

    def fetch_scenario(self, principal: Principal, scenario_id: str, version: int) -> bytes:
        self._require(principal, Role.TUTOR, Role.LEARNER)
        _check_id(scenario_id, "scenario")
        path = self.scenarios_dir / scenario_id / f"{version}.rvs.json"
        if not path.is_file():
            raise NotFound(f"no scenario {scenario_id!r} version {version}")
        return path.read_bytes()

    def scenario_exists(self, scenario_id: str, version: int) -> bool:
        if not _SAFE_ID.match(scenario_id):
            return False
        return (self.scenarios_dir / scenario_id / f"{version}.rvs.json").is_file()

    # -- event ingestion -------------------------------------------------------

    def _session_lock(self, session_id: str) -> threading.Lock:
        with self._session_locks_guard:
            return self._session_locks.setdefault(session_id, threading.Lock())

    def ingest_events(self, principal: Principal, session_id: str,
                      batch: Sequence[dict]) -> int:
        """Append a batch to the session's durable log; exact duplicates are
        dropped, so re-sending a batch never changes analytics."""
        self._require(principal, Role.LEARNER)
        if not _SAFE_ID.match(session_id):
            raise MalformedBatch(f"session id {session_id!r} is not URL-safe")
        for i, record in enumerate(batch):
            try:
                check_event_record(record, f"/{i}")
            except SchemaViolation as exc:
                raise MalformedBatch(str(exc)) from None
            if record["session_id"] != session_id:
                raise MalformedBatch(f"/{i}: session_id does not match the endpoint")
        for prev, cur in zip(batch, batch[1:]):
            if cur["t_ms"] < prev["t_ms"]:
                raise OutOfOrderBatch("batch is not ordered by t_ms")
        refs = {(r["scenario_id"], r["scenario_version"]) for r in batch}
        for scenario_id, version in sorted(refs):
            if not self.scenario_exists(scenario_id, version):
                raise UnknownScenario(f"no scenario {scenario_id!r} version {version}")

        path = self.events_dir / f"{session_id}.events.jsonl"
        with self._session_lock(session_id):
            seen = set()
            if path.exists():
                for record in load_event_lines(path.read_bytes()):
                    seen.add(self._dedup_key(record))
            fresh = []
            for record in batch:
                key = self._dedup_key(record)
                if key not in seen:
                    seen.add(key)
                    fresh.append(record)
            if fresh:
                with open(path, "ab") as fh:
                    fh.write(dump_event_lines(fresh))
        return len(fresh)

    @staticmethod
    def _dedup_key(record: dict) -> tuple:
        payload = json.dumps(record["payload"], sort_keys=True, separators=(",", ":"))
        return (record["session_id"], record["t_ms"], record["kind"], payload)

    # -- analytics over the event store ---------------------------------------

    def build_summaries(self) -> List[SessionSummary]:
        """Summarize every stored session, in session-id order; corrupt logs
        are skipped (the repository must stay serviceable)."""
        summaries = []
        for path in sorted(self.events_dir.glob("*.events.jsonl")):
            try:
                lines = load_event_lines(path.read_bytes())
                learner_id = lines[0]["payload"].get("learner_id", "") if lines else ""
                cohort = self.cohort_of.get(learner_id, "default")
                summaries.append(analytics.summarize_session(lines, cohort))
            except (SchemaViolation, analytics.AnalyticsError):
                continue
        return summaries

    def learner_dashboard(self, principal: Principal, learner_id: str) -> dict:
        self._require(principal, Role.LEARNER)
        if principal.name != learner_id:
            raise Unauthorized("learners may only read their own dashboard")
        mine = [s for s in self.build_summaries() if s.learner_id == learner_id]
        if not mine:
            raise NotFound(f"no sessions for learner {learner_id!r}")
        return analytics.learner_dashboard(mine).to_dict()

    def cohort_dashboards(self, principal: Principal, cohort_id: str) -> dict:
        self._require(principal, Role.TUTOR)
        result = analytics.analyze_corpus(
            [s for s in self.build_summaries() if s.cohort_id == cohort_id],
            self.detector_config,
        )
        if not result.cohort_dashboards:
            raise NotFound(f"no sessions for cohort {cohort_id!r}")
        return {
            "cohort_id": cohort_id,
            "dashboards": [result.cohort_dashboards[key].to_dict()
                           for key in sorted(result.cohort_dashboards)],
        }

    def get_alarms(self, principal: Principal,
                   emitted_at: Optional[str] = None) -> List[dict]:
        """Run the detectors over everything this creator authored, newest first."""
        self._require(principal, Role.CREATOR)
        with self._lock:
            authored = {sid for sid, e in self._index["scenarios"].items()
                        if e.get("author") == principal.name}
        if not authored:
            return []
        summaries = [s for s in self.build_summaries() if s.scenario_id in authored]
        result = analytics.analyze_corpus(summaries, self.detector_config,
                                          emitted_at=emitted_at)
        ordered = sorted(
            result.alarms,
            key=lambda a: (a.emitted_at, a.scenario_id, a.detector_id, a.locus or ""),
            reverse=True,
        )
        return [a.to_dict() for a in ordered]

    # -- media blobs -----------------------------------------------------------

    def _media_path(self, scenario_id: str, rel_path: str) -> Path:
        _check_id(scenario_id, "scenario")
        parts = rel_path.replace("\\", "/").split("/")
        if rel_path.startswith("/") or ".." in parts or not rel_path:
            raise NotFound("media paths must be relative, no parent segments")
        return self.media_dir / scenario_id / rel_path

    def media_put(self, principal: Principal, scenario_id: str,
                  rel_path: str, data: bytes) -> None:
        self._require(principal, Role.CREATOR)
        path = self._media_path(scenario_id, rel_path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_bytes(data)

    def media_get(self, principal: Principal, scenario_id: str, rel_path: str) -> bytes:
        self._require(principal, Role.TUTOR, Role.LEARNER)
        path = self._media_path(scenario_id, rel_path)
        if not path.is_file():
            raise NotFound(f"no media {rel_path!r} for scenario {scenario_id!r}")
        return path.read_bytes()
