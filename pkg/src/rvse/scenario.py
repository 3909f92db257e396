"""Scenario document model: parsing, canonical serialization, checksums, validation.

A scenario is a directed timed graph of clinical states plus an action
catalog. Documents are single JSON objects (`.rvs.json`). Parsing is strict
(unknown keys and ill-typed fields are rejected with a path), while graph-level
problems (dangling targets, unreachable states, dead ends, ...) are reported
by :func:`validate` as data so authoring tools can show them inline.

All types are immutable values; every operation here is a pure function.
"""

from __future__ import annotations

import hashlib
import json
import math
import re
from dataclasses import dataclass, field, replace
from datetime import datetime, timezone
from enum import Enum
from typing import Any, Iterator, Mapping, Optional, Union

__all__ = [
    "ActionDef",
    "ActionCategory",
    "ActionEffect",
    "Finding",
    "GoalMode",
    "GoalSpec",
    "MalformedDocument",
    "Representation",
    "RepresentationKind",
    "Scenario",
    "ScenarioError",
    "ScenarioMeta",
    "SchemaViolation",
    "StateNode",
    "TerminalOutcome",
    "ValidationReport",
    "canonical_serialize",
    "checksum",
    "parse_scenario",
    "scenario_to_dict",
    "validate",
]

DEFAULT_SESSION_LIMIT_MS = 600_000  # ten-minute bounded activity

_ID_RE = re.compile(r"^[A-Za-z0-9._~-]+$")


class ScenarioError(Exception):
    """Base class for scenario document failures."""


class MalformedDocument(ScenarioError):
    """The input is not a JSON object at all."""


class SchemaViolation(ScenarioError):
    """A field is missing, ill-typed, or breaks a structural invariant.

    ``path`` is a JSON-pointer-style location of the offending field.
    """

    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path
        self.message = message


class RepresentationKind(str, Enum):
    TEXT = "text"
    PHOTO = "photo"
    VIDEO = "video"


class GoalMode(str, Enum):
    ANY = "any"
    ALL = "all"


class ActionCategory(str, Enum):
    DIAGNOSTIC = "diagnostic"
    THERAPEUTIC = "therapeutic"
    OTHER = "other"


class TerminalOutcome(str, Enum):
    STABILIZED = "stabilized"
    DECEASED = "deceased"
    TIMED_OUT = "timed_out"  # reserved for session-limit expiry, never authored


Number = Union[int, float]
VitalSignSet = dict  # vital-sign name -> finite number


@dataclass(frozen=True)
class Representation:
    """What the learner sees in a state: text body or a relative media path."""

    kind: RepresentationKind
    content: str


@dataclass(frozen=True)
class GoalSpec:
    """The priority action(s) that trigger a state's improvement transition.

    ``any``: one listed action suffices. ``all``: every listed action must be
    performed before the timeout.
    """

    action_ids: tuple
    mode: GoalMode = GoalMode.ANY


@dataclass(frozen=True)
class ActionDef:
    id: str
    label: str
    category: ActionCategory


@dataclass(frozen=True)
class ActionEffect:
    """Consequence of a non-goal action: a forced transition and/or a change
    to the current state's effective duration."""

    transition: Optional[str] = None
    duration_delta_ms: Optional[int] = None


@dataclass(frozen=True)
class StateNode:
    id: str
    vitals: VitalSignSet
    representation: Representation
    drift_to: Optional[VitalSignSet] = None
    goal: Optional[GoalSpec] = None
    duration_ms: Optional[int] = None
    on_timeout: Optional[str] = None
    on_goal: Optional[str] = None
    effects: Mapping = field(default_factory=dict)  # action id -> ActionEffect
    terminal: Optional[TerminalOutcome] = None

    @property
    def is_terminal(self) -> bool:
        return self.terminal is not None


@dataclass(frozen=True)
class ScenarioMeta:
    title: str
    author: str
    tags: tuple = ()
    learning_objectives: tuple = ()
    created_at: datetime = datetime(1970, 1, 1, tzinfo=timezone.utc)


@dataclass(frozen=True)
class Scenario:
    id: str
    version: int
    meta: ScenarioMeta
    initial_state: str
    states: Mapping  # state id -> StateNode
    actions: Mapping  # action id -> ActionDef
    session_limit_ms: int = DEFAULT_SESSION_LIMIT_MS

    def with_version(self, version: int) -> "Scenario":
        return replace(self, version=version)


@dataclass(frozen=True)
class Finding:
    code: str
    subject_id: Optional[str]
    message: str

    def to_dict(self) -> dict:
        return {
            "code": self.code,
            "state_or_action_id": self.subject_id,
            "message": self.message,
        }


@dataclass(frozen=True)
class ValidationReport:
    errors: tuple = ()
    warnings: tuple = ()

    @property
    def deployable(self) -> bool:
        return not self.errors

    def to_dict(self) -> dict:
        return {
            "deployable": self.deployable,
            "errors": [f.to_dict() for f in self.errors],
            "warnings": [f.to_dict() for f in self.warnings],
        }


# ---------------------------------------------------------------------------
# Parsing
# ---------------------------------------------------------------------------


def _reject_constant(token: str) -> None:
    raise SchemaViolation("/", f"non-finite number {token!r} not allowed")


class _Obj:
    """Cursor over one JSON object enforcing known keys and field types."""

    def __init__(self, raw: Any, path: str):
        if not isinstance(raw, dict):
            raise SchemaViolation(path or "/", "expected a JSON object")
        self.raw = raw
        self.path = path
        self.seen = set()

    def _at(self, key: str) -> str:
        return f"{self.path}/{key}"

    def take(self, key: str, required: bool = True) -> Any:
        self.seen.add(key)
        if key not in self.raw:
            if required:
                raise SchemaViolation(self._at(key), "missing required field")
            return None
        return self.raw[key]

    def string(self, key: str, required: bool = True, nonempty: bool = True) -> Optional[str]:
        v = self.take(key, required)
        if v is None:
            return None
        if not isinstance(v, str):
            raise SchemaViolation(self._at(key), "expected a string")
        if nonempty and not v:
            raise SchemaViolation(self._at(key), "must be nonempty")
        return v

    def positive_int(self, key: str, required: bool = True) -> Optional[int]:
        v = self.take(key, required)
        if v is None:
            return None
        if not isinstance(v, int) or isinstance(v, bool) or v <= 0:
            raise SchemaViolation(self._at(key), "expected a positive integer")
        return v

    def signed_int(self, key: str, required: bool = True) -> Optional[int]:
        v = self.take(key, required)
        if v is None:
            return None
        if not isinstance(v, int) or isinstance(v, bool):
            raise SchemaViolation(self._at(key), "expected an integer")
        return v

    def string_list(self, key: str, required: bool = True, nonempty: bool = False) -> tuple:
        v = self.take(key, required)
        if v is None:
            return ()
        if not isinstance(v, list) or any(not isinstance(x, str) for x in v):
            raise SchemaViolation(self._at(key), "expected a list of strings")
        if nonempty and not v:
            raise SchemaViolation(self._at(key), "must be nonempty")
        return tuple(v)

    def enum(self, key: str, kind: type, required: bool = True):
        v = self.take(key, required)
        if v is None:
            return None
        try:
            return kind(v)
        except ValueError:
            allowed = ", ".join(m.value for m in kind)
            raise SchemaViolation(self._at(key), f"expected one of: {allowed}") from None

    def obj(self, key: str, required: bool = True) -> Optional["_Obj"]:
        v = self.take(key, required)
        if v is None:
            return None
        return _Obj(v, self._at(key))

    def finish(self) -> None:
        unknown = sorted(set(self.raw) - self.seen)
        if unknown:
            raise SchemaViolation(self._at(unknown[0]), "unknown field")


def _normalize_number(value: Any, path: str) -> Number:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise SchemaViolation(path, "expected a number")
    if isinstance(value, float):
        if not math.isfinite(value):
            raise SchemaViolation(path, "must be finite")
        if value.is_integer():
            return int(value)  # 80.0 and 80 are the same vital value
    return value


def _parse_vitals(raw: Any, path: str) -> VitalSignSet:
    if not isinstance(raw, dict) or not raw:
        raise SchemaViolation(path, "expected a nonempty object of vital signs")
    out = {}
    for name, value in raw.items():
        if not name:
            raise SchemaViolation(path, "vital-sign names must be nonempty")
        out[name] = _normalize_number(value, f"{path}/{name}")
    return out


def _parse_timestamp(raw: str, path: str) -> datetime:
    text = raw
    if text.endswith(("Z", "z")):
        text = text[:-1] + "+00:00"
    try:
        dt = datetime.fromisoformat(text)
    except ValueError:
        raise SchemaViolation(path, "expected an RFC 3339 timestamp") from None
    if dt.tzinfo is None or dt.utcoffset().total_seconds() != 0:
        raise SchemaViolation(path, "timestamp must be UTC")
    return dt.astimezone(timezone.utc)


def _parse_representation(o: _Obj) -> Representation:
    kind = o.enum("kind", RepresentationKind)
    content = o.string("content")
    if kind is not RepresentationKind.TEXT:
        parts = content.replace("\\", "/").split("/")
        if content.startswith("/") or ".." in parts:
            raise SchemaViolation(o._at("content"), "media path must be relative, no parent segments")
    o.finish()
    return Representation(kind=kind, content=content)


def _parse_goal(o: _Obj) -> GoalSpec:
    ids = o.string_list("action_ids", nonempty=True)
    if len(set(ids)) != len(ids):
        raise SchemaViolation(o._at("action_ids"), "duplicate action ids")
    mode = o.enum("mode", GoalMode, required=False) or GoalMode.ANY
    o.finish()
    return GoalSpec(action_ids=tuple(sorted(ids)), mode=mode)


def _parse_effect(o: _Obj) -> ActionEffect:
    transition = o.string("transition", required=False)
    delta = o.signed_int("duration_delta_ms", required=False)
    if transition is None and delta is None:
        raise SchemaViolation(o.path, "effect needs a transition and/or duration_delta_ms")
    o.finish()
    return ActionEffect(transition=transition, duration_delta_ms=delta)


def _parse_state(state_id: str, raw: Any, path: str) -> StateNode:
    o = _Obj(raw, path)
    vitals = _parse_vitals(o.take("vitals"), o._at("vitals"))
    raw_drift = o.take("drift_to", required=False)
    drift_to = None
    if raw_drift is not None:
        drift_to = _parse_vitals(raw_drift, o._at("drift_to"))
        if set(drift_to) != set(vitals):
            raise SchemaViolation(o._at("drift_to"), "keys must match vitals exactly")
    representation = _parse_representation(o.obj("representation"))
    goal_obj = o.obj("goal", required=False)
    goal = _parse_goal(goal_obj) if goal_obj else None
    duration_ms = o.positive_int("duration_ms", required=False)
    on_timeout = o.string("on_timeout", required=False)
    on_goal = o.string("on_goal", required=False)
    terminal = o.enum("terminal", TerminalOutcome, required=False)

    effects = {}
    raw_effects = o.take("effects", required=False)
    if raw_effects is not None:
        if not isinstance(raw_effects, dict):
            raise SchemaViolation(o._at("effects"), "expected an object keyed by action id")
        for action_id, raw_effect in raw_effects.items():
            effects[action_id] = _parse_effect(_Obj(raw_effect, f"{o._at('effects')}/{action_id}"))
    o.finish()

    if terminal is TerminalOutcome.TIMED_OUT:
        raise SchemaViolation(f"{path}/terminal", "timed_out is reserved for session-limit expiry")
    if terminal is not None and duration_ms is not None:
        raise SchemaViolation(f"{path}/duration_ms", "terminal states carry no duration")
    if terminal is None and duration_ms is None:
        raise SchemaViolation(f"{path}/duration_ms", "non-terminal states need a positive duration")
    if (goal is None) != (on_goal is None):
        raise SchemaViolation(f"{path}/on_goal", "goal and on_goal must be declared together")
    if goal is not None:
        overlap = sorted(set(effects) & set(goal.action_ids))
        if overlap:
            raise SchemaViolation(
                f"{path}/effects/{overlap[0]}", "effect actions must not also be goal actions"
            )
    return StateNode(
        id=state_id,
        vitals=vitals,
        drift_to=drift_to,
        representation=representation,
        goal=goal,
        duration_ms=duration_ms,
        on_timeout=on_timeout,
        on_goal=on_goal,
        effects=effects,
        terminal=terminal,
    )


def _parse_meta(o: _Obj) -> ScenarioMeta:
    title = o.string("title")
    author = o.string("author")
    tags = o.string_list("tags", required=False)
    objectives = o.string_list("learning_objectives", nonempty=True)
    created_at = _parse_timestamp(o.string("created_at"), o._at("created_at"))
    o.finish()
    return ScenarioMeta(
        title=title,
        author=author,
        tags=tags,
        learning_objectives=objectives,
        created_at=created_at,
    )


def parse_scenario(data: Union[bytes, str]) -> Scenario:
    """Parse a scenario document (UTF-8 JSON) into a Scenario value.

    Raises MalformedDocument for non-JSON input and SchemaViolation (with a
    path) for missing, ill-typed, or structurally invalid fields. Graph-level
    rules are deliberately *not* checked here; see :func:`validate`.
    """
    if isinstance(data, bytes):
        try:
            data = data.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise MalformedDocument(f"not valid UTF-8: {exc}") from None
    try:
        raw = json.loads(data, parse_constant=_reject_constant)
    except json.JSONDecodeError as exc:
        raise MalformedDocument(f"not valid JSON: {exc}") from None

    top = _Obj(raw, "")
    scenario_id = top.string("id")
    if not _ID_RE.match(scenario_id):
        raise SchemaViolation("/id", "must be URL-safe ([A-Za-z0-9._~-]+)")
    version = top.positive_int("version")
    meta = _parse_meta(top.obj("meta"))
    initial_state = top.string("initial_state")
    session_limit_ms = top.positive_int("session_limit_ms", required=False)
    if session_limit_ms is None:
        session_limit_ms = DEFAULT_SESSION_LIMIT_MS

    raw_states = top.take("states")
    if not isinstance(raw_states, dict):
        raise SchemaViolation("/states", "expected an object keyed by state id")
    states = {}
    for state_id, raw_state in raw_states.items():
        if not state_id:
            raise SchemaViolation("/states", "state ids must be nonempty")
        states[state_id] = _parse_state(state_id, raw_state, f"/states/{state_id}")

    raw_actions = top.take("actions")
    if not isinstance(raw_actions, dict):
        raise SchemaViolation("/actions", "expected an object keyed by action id")
    actions = {}
    for action_id, raw_action in raw_actions.items():
        if not action_id:
            raise SchemaViolation("/actions", "action ids must be nonempty")
        o = _Obj(raw_action, f"/actions/{action_id}")
        actions[action_id] = ActionDef(
            id=action_id,
            label=o.string("label"),
            category=o.enum("category", ActionCategory),
        )
        o.finish()
    top.finish()

    return Scenario(
        id=scenario_id,
        version=version,
        meta=meta,
        initial_state=initial_state,
        states=states,
        actions=actions,
        session_limit_ms=session_limit_ms,
    )


# ---------------------------------------------------------------------------
# Canonical serialization and checksums
# ---------------------------------------------------------------------------


def _format_timestamp(dt: datetime) -> str:
    dt = dt.astimezone(timezone.utc)
    base = dt.strftime("%Y-%m-%dT%H:%M:%S")
    if dt.microsecond:
        base += f".{dt.microsecond:06d}".rstrip("0")
    return base + "Z"


def _state_to_dict(s: StateNode) -> dict:
    out: dict = {"vitals": dict(s.vitals), "representation": {
        "kind": s.representation.kind.value,
        "content": s.representation.content,
    }}
    if s.drift_to is not None:
        out["drift_to"] = dict(s.drift_to)
    if s.goal is not None:
        out["goal"] = {"mode": s.goal.mode.value, "action_ids": list(s.goal.action_ids)}
    if s.duration_ms is not None:
        out["duration_ms"] = s.duration_ms
    if s.on_timeout is not None:
        out["on_timeout"] = s.on_timeout
    if s.on_goal is not None:
        out["on_goal"] = s.on_goal
    if s.effects:
        effects = {}
        for action_id, effect in s.effects.items():
            e: dict = {}
            if effect.transition is not None:
                e["transition"] = effect.transition
            if effect.duration_delta_ms is not None:
                e["duration_delta_ms"] = effect.duration_delta_ms
            effects[action_id] = e
        out["effects"] = effects
    if s.terminal is not None:
        out["terminal"] = s.terminal.value
    return out


def scenario_to_dict(s: Scenario) -> dict:
    """Plain-dict form of a scenario, shaped exactly like the JSON document."""
    return {
        "id": s.id,
        "version": s.version,
        "meta": {
            "title": s.meta.title,
            "author": s.meta.author,
            "tags": list(s.meta.tags),
            "learning_objectives": list(s.meta.learning_objectives),
            "created_at": _format_timestamp(s.meta.created_at),
        },
        "initial_state": s.initial_state,
        "session_limit_ms": s.session_limit_ms,
        "states": {sid: _state_to_dict(node) for sid, node in s.states.items()},
        "actions": {
            aid: {"label": a.label, "category": a.category.value}
            for aid, a in s.actions.items()
        },
    }


def canonical_serialize(s: Scenario) -> bytes:
    """Deterministic byte form: UTF-8, sorted keys, no insignificant whitespace.

    Depends only on the scenario value, never on input key order, so it is
    the basis for checksums and store/fetch fidelity.
    """
    return json.dumps(
        scenario_to_dict(s), sort_keys=True, separators=(",", ":"), ensure_ascii=False
    ).encode("utf-8")


def checksum(s: Scenario) -> str:
    """Lowercase hex SHA-256 of the canonical serialization."""
    return hashlib.sha256(canonical_serialize(s)).hexdigest()


# ---------------------------------------------------------------------------
# Validation (graph-level rules; findings are data, not failures)
# ---------------------------------------------------------------------------


def _transition_targets(node: StateNode) -> Iterator[tuple]:
    if node.on_timeout is not None:
        yield "on_timeout", node.on_timeout
    if node.on_goal is not None:
        yield "on_goal", node.on_goal
    for action_id, effect in node.effects.items():
        if effect.transition is not None:
            yield f"effects/{action_id}", effect.transition


def validate(s: Scenario) -> ValidationReport:
    """Check deployability rules E1-E7 and hygiene warnings W1-W3."""
    errors = []
    warnings = []

    # E1: dangling transition targets (including the initial state pointer)
    initial_ok = s.initial_state in s.states
    if not initial_ok:
        errors.append(Finding("E1", None, f"initial_state references unknown state '{s.initial_state}'"))
    for node in s.states.values():
        for where, target in _transition_targets(node):
            if target not in s.states:
                errors.append(Finding("E1", node.id, f"{where} references unknown state '{target}'"))

    # E2: goal/effect actions missing from the catalog
    for node in s.states.values():
        referenced = list(node.goal.action_ids) if node.goal else []
        referenced += list(node.effects)
        for action_id in referenced:
            if action_id not in s.actions:
                errors.append(Finding("E2", node.id, f"action '{action_id}' is not in the catalog"))

    # E3: states unreachable from the initial state
    if initial_ok:
        reached = {s.initial_state}
        frontier = [s.initial_state]
        while frontier:
            node = s.states[frontier.pop()]
            for _, target in _transition_targets(node):
                if target in s.states and target not in reached:
                    reached.add(target)
                    frontier.append(target)
        for state_id in s.states:
            if state_id not in reached:
                errors.append(Finding("E3", state_id, "state is unreachable from the initial state"))

    # E4/E5/E7: local transition rules
    for node in s.states.values():
        if node.is_terminal:
            if node.goal or node.on_goal or node.on_timeout or node.effects:
                errors.append(Finding("E7", node.id, "terminal state must not carry transitions"))
        else:
            if node.on_timeout is None:
                errors.append(Finding("E4", node.id, "non-terminal state has no on_timeout"))
            elif node.on_timeout == node.id:
                errors.append(Finding("E5", node.id, "timeout must not loop back to the same state"))

    # E6: non-terminal states from which no terminal state is reachable
    predecessors: dict = {state_id: set() for state_id in s.states}
    for node in s.states.values():
        for _, target in _transition_targets(node):
            if target in predecessors:
                predecessors[target].add(node.id)
    can_finish = {state_id for state_id, node in s.states.items() if node.is_terminal}
    frontier = list(can_finish)
    while frontier:
        for pred in predecessors[frontier.pop()]:
            if pred not in can_finish:
                can_finish.add(pred)
                frontier.append(pred)
    for state_id, node in s.states.items():
        if not node.is_terminal and state_id not in can_finish:
            errors.append(Finding("E6", state_id, "no terminal state is reachable from here (dead end)"))

    # W1: state outlives the session limit
    for node in s.states.values():
        if node.duration_ms is not None and node.duration_ms > s.session_limit_ms:
            warnings.append(Finding("W1", node.id, "duration exceeds the session limit"))

    # W2: catalog actions never referenced by any goal or effect
    referenced_actions = set()
    for node in s.states.values():
        if node.goal:
            referenced_actions.update(node.goal.action_ids)
        referenced_actions.update(node.effects)
    for action_id in s.actions:
        if action_id not in referenced_actions:
            warnings.append(Finding("W2", action_id, "action is never used by any state"))

    # W3: no learning objective mentions any goal action
    goal_terms = []
    for node in s.states.values():
        if node.goal:
            for action_id in node.goal.action_ids:
                goal_terms.append(action_id.lower())
                if action_id in s.actions:
                    goal_terms.append(s.actions[action_id].label.lower())
    if goal_terms:
        objectives = " \n ".join(s.meta.learning_objectives).lower()
        if not any(term in objectives for term in goal_terms):
            warnings.append(Finding("W3", None, "no learning objective mentions any goal action"))

    return ValidationReport(errors=tuple(errors), warnings=tuple(warnings))
