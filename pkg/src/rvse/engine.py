"""Deterministic execution of scenarios against virtual time.

The engine never looks at a wall clock: callers supply integer-millisecond
timestamps, which makes every session a pure function of (scenario, inputs)
and makes replays bit-identical across runs and platforms. A Session is a
single-writer state machine; distinct sessions are independent.

Timing rules, pinned once so every client agrees:

* A state's timeout fires at exactly ``entered_at + effective_duration_ms``.
  Chained timeouts land at exact prefix sums (integer arithmetic, no drift).
* At a timeout boundary the timeout wins: an action timestamped exactly at
  the boundary is applied in the successor state.
* Reaching ``session_limit_ms`` in a non-terminal state ends the session as
  ``timed_out`` at exactly the limit. A deterioration scheduled at the limit
  still fires first; its destination decides the outcome.
* Effects may shrink a state's duration, but never below ``elapsed + 1`` ms,
  so a timeout can never be scheduled in the past.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, List, Optional, Tuple, Union

from .scenario import (
    GoalMode,
    Scenario,
    SchemaViolation,
    StateNode,
    TerminalOutcome,
    ValidationReport,
    checksum,
    validate,
)

__all__ = [
    "ActionScript",
    "DisplayFrame",
    "EventKind",
    "InvalidScenario",
    "Session",
    "SessionEnded",
    "SessionEvent",
    "SessionStatus",
    "SimulationError",
    "TimeReversal",
    "UnknownAction",
    "check_event_record",
    "dump_event_lines",
    "event_log_lines",
    "load_event_lines",
    "parse_action_script",
    "render_frame",
    "replay",
    "start_session",
    "vitals_at",
]


class SimulationError(Exception):
    """Base class for engine failures."""


class InvalidScenario(SimulationError):
    def __init__(self, report: ValidationReport):
        super().__init__("scenario has validation errors: "
                         + ", ".join(f.code for f in report.errors))
        self.report = report


class TimeReversal(SimulationError):
    pass


class SessionEnded(SimulationError):
    pass


class UnknownAction(SimulationError):
    pass


class EventKind(str, Enum):
    SESSION_START = "session_start"
    STATE_ENTERED = "state_entered"
    ACTION_PERFORMED = "action_performed"
    GOAL_ACHIEVED = "goal_achieved"
    TIMEOUT_DETERIORATION = "timeout_deterioration"
    SESSION_END = "session_end"


class SessionStatus(str, Enum):
    RUNNING = "running"
    ENDED = "ended"


@dataclass(frozen=True)
class SessionEvent:
    t_ms: int
    kind: EventKind
    payload: dict


@dataclass(frozen=True)
class DisplayFrame:
    """Snapshot for a client UI: interpolated vitals, representation,
    elapsed time in state, performed actions, session status."""

    vitals: dict
    representation: object
    elapsed_in_state_ms: int
    history: tuple  # performed action ids, in order
    status: SessionStatus
    outcome: Optional[TerminalOutcome] = None


@dataclass(frozen=True)
class ActionScript:
    """Headless play script: timed actions plus a final time to advance to."""

    actions: tuple  # of (t_ms, action_id), t strictly increasing
    final_t_ms: int


def vitals_at(state: StateNode, elapsed_ms: int, effective_duration_ms: int) -> dict:
    """Vital signs at ``elapsed_ms`` into a state.

    Linear per-sign interpolation from the entry values toward ``drift_to``
    over the effective duration; states without drift (and terminal states)
    hold their entry values.
    """
    if state.is_terminal or state.drift_to is None:
        return dict(state.vitals)
    fraction = elapsed_ms / effective_duration_ms
    return {
        name: value + (state.drift_to[name] - value) * fraction
        for name, value in state.vitals.items()
    }


class Session:
    """One learner's play-through. Operations must be externally serialized."""

    def __init__(self, scenario: Scenario, session_id: str, learner_id: str):
        self.scenario = scenario
        self.session_id = session_id
        self.learner_id = learner_id
        self.scenario_ref = (scenario.id, scenario.version, checksum(scenario))
        self.current_state = scenario.initial_state
        self.state_entered_at = 0
        self.effective_duration_ms = 0
        self.goals_satisfied: set = set()
        self.now = 0
        self.status = SessionStatus.RUNNING
        self.outcome: Optional[TerminalOutcome] = None
        self.history: List[SessionEvent] = []

    # -- event emission ----------------------------------------------------

    def _emit(self, t_ms: int, kind: EventKind, payload: dict) -> None:
        self.history.append(SessionEvent(t_ms=t_ms, kind=kind, payload=payload))

    def _enter(self, state_id: str, t_ms: int) -> None:
        node = self.scenario.states[state_id]
        self.current_state = state_id
        self.state_entered_at = t_ms
        self.effective_duration_ms = node.duration_ms or 0
        self.goals_satisfied = set()
        payload = {"state_id": state_id}
        if node.goal is not None:
            payload["goal_action_ids"] = list(node.goal.action_ids)
        self._emit(t_ms, EventKind.STATE_ENTERED, payload)
        if node.is_terminal:
            self._end(node.terminal, t_ms, "terminal")

    def _end(self, outcome: TerminalOutcome, t_ms: int, reason: str) -> None:
        self.status = SessionStatus.ENDED
        self.outcome = outcome
        self.now = t_ms
        self._emit(t_ms, EventKind.SESSION_END, {"outcome": outcome.value, "reason": reason})

    # -- virtual-time advancement -------------------------------------------

    def _advance(self, target_ms: int) -> None:
        limit = self.scenario.session_limit_ms
        while self.status is SessionStatus.RUNNING:
            boundary = self.state_entered_at + self.effective_duration_ms
            if min(boundary, limit) > target_ms:
                self.now = target_ms
                return
            if boundary <= limit:
                # timeout fires exactly at the boundary, then the limit check
                # runs against whatever state we land in
                self.now = boundary
                self._emit(boundary, EventKind.TIMEOUT_DETERIORATION,
                           {"state_id": self.current_state})
                node = self.scenario.states[self.current_state]
                self._enter(node.on_timeout, boundary)
                if self.status is SessionStatus.RUNNING and boundary == limit:
                    self._end(TerminalOutcome.TIMED_OUT, limit, "session_limit")
            else:
                self._end(TerminalOutcome.TIMED_OUT, limit, "session_limit")

    def advance_to(self, t_ms: int) -> List[SessionEvent]:
        """Advance virtual time, firing every timeout boundary up to ``t_ms``.

        Returns the newly emitted events.
        """
        if self.status is SessionStatus.ENDED:
            raise SessionEnded(f"session {self.session_id} already ended")
        if t_ms < self.now:
            raise TimeReversal(f"t={t_ms} is before now={self.now}")
        mark = len(self.history)
        self._advance(t_ms)
        return self.history[mark:]

    def perform_action(self, t_ms: int, action_id: str) -> List[SessionEvent]:
        """Perform an action at virtual time ``t_ms``.

        Time advances first, so timeouts at or before ``t_ms`` win and the
        action lands in whatever state results. If that advancement ends the
        session, SessionEnded is raised; the elapsed-time events remain in
        the history.
        """
        if self.status is SessionStatus.ENDED:
            raise SessionEnded(f"session {self.session_id} already ended")
        if action_id not in self.scenario.actions:
            raise UnknownAction(action_id)
        if t_ms < self.now:
            raise TimeReversal(f"t={t_ms} is before now={self.now}")
        mark = len(self.history)
        self._advance(t_ms)
        if self.status is SessionStatus.ENDED:
            raise SessionEnded(f"session ended at t={self.now}, before the action at t={t_ms}")

        node = self.scenario.states[self.current_state]
        achieved = False
        disposition = "none"
        if node.goal is not None and action_id in node.goal.action_ids:
            if node.goal.mode is GoalMode.ANY:
                achieved = True
            else:
                self.goals_satisfied.add(action_id)
                achieved = set(node.goal.action_ids) <= self.goals_satisfied
            disposition = "goal" if achieved else "goal_partial"
        elif action_id in node.effects:
            disposition = "effect"

        self._emit(t_ms, EventKind.ACTION_PERFORMED,
                   {"action_id": action_id, "disposition": disposition})
        if achieved:
            self._emit(t_ms, EventKind.GOAL_ACHIEVED,
                       {"state_id": node.id, "action_id": action_id})
            self._enter(node.on_goal, t_ms)
        elif disposition == "effect":
            effect = node.effects[action_id]
            if effect.transition is not None:
                self._enter(effect.transition, t_ms)
            if effect.duration_delta_ms is not None and self.status is SessionStatus.RUNNING:
                current = self.scenario.states[self.current_state]
                if not current.is_terminal:
                    elapsed = t_ms - self.state_entered_at
                    self.effective_duration_ms = max(
                        self.effective_duration_ms + effect.duration_delta_ms, elapsed + 1
                    )
        return self.history[mark:]

    def frame(self, t_ms: int) -> DisplayFrame:
        """Advance to ``t_ms`` and snapshot what a client should display."""
        if self.status is SessionStatus.RUNNING:
            self.advance_to(t_ms)
        elif t_ms < self.now:
            raise TimeReversal(f"t={t_ms} is before now={self.now}")
        node = self.scenario.states[self.current_state]
        elapsed = self.now - self.state_entered_at
        actions = tuple(
            e.payload["action_id"] for e in self.history
            if e.kind is EventKind.ACTION_PERFORMED
        )
        return DisplayFrame(
            vitals=vitals_at(node, elapsed, self.effective_duration_ms),
            representation=node.representation,
            elapsed_in_state_ms=elapsed,
            history=actions,
            status=self.status,
            outcome=self.outcome,
        )


def start_session(scenario: Scenario, session_id: str, learner_id: str) -> Session:
    """Begin a session at virtual time 0. The scenario must validate cleanly."""
    report = validate(scenario)
    if report.errors:
        raise InvalidScenario(report)
    sess = Session(scenario, session_id, learner_id)
    sess._emit(0, EventKind.SESSION_START,
               {"learner_id": learner_id, "scenario_checksum": sess.scenario_ref[2]})
    sess._enter(scenario.initial_state, 0)
    return sess


def render_frame(sess: Session, t_ms: int) -> DisplayFrame:
    return sess.frame(t_ms)


def replay(scenario: Scenario, script: ActionScript,
           session_id: str = "replay", learner_id: str = "replay") -> List[SessionEvent]:
    """Run a script headlessly and return the complete event log.

    Scripted actions that fall after the session has ended are skipped (the
    session's log is already complete); the result is a pure function of
    (scenario, script, ids).
    """
    sess = start_session(scenario, session_id, learner_id)
    for t_ms, action_id in script.actions:
        if sess.status is SessionStatus.ENDED:
            break
        try:
            sess.perform_action(t_ms, action_id)
        except SessionEnded:
            break
    if sess.status is SessionStatus.RUNNING:
        sess.advance_to(max(sess.now, script.final_t_ms))
    return list(sess.history)


# ---------------------------------------------------------------------------
# Wire formats: action scripts and JSON Lines event logs
# ---------------------------------------------------------------------------


def parse_action_script(data: Union[bytes, str]) -> ActionScript:
    """Parse a script file: a JSON array of {"t_ms", "action_id"} entries
    whose last element is {"final_t_ms": N}."""
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    try:
        raw = json.loads(data)
    except json.JSONDecodeError as exc:
        raise SchemaViolation("/", f"not valid JSON: {exc}") from None
    if not isinstance(raw, list) or not raw:
        raise SchemaViolation("/", "expected a nonempty JSON array")
    tail = raw[-1]
    if not isinstance(tail, dict) or set(tail) != {"final_t_ms"} \
            or not isinstance(tail["final_t_ms"], int) or tail["final_t_ms"] < 0:
        raise SchemaViolation(f"/{len(raw) - 1}", 'last element must be {"final_t_ms": <ms>}')
    actions = []
    last_t = -1
    for i, entry in enumerate(raw[:-1]):
        if not isinstance(entry, dict) or set(entry) != {"t_ms", "action_id"}:
            raise SchemaViolation(f"/{i}", 'expected {"t_ms", "action_id"}')
        t_ms, action_id = entry["t_ms"], entry["action_id"]
        if not isinstance(t_ms, int) or t_ms < 0:
            raise SchemaViolation(f"/{i}/t_ms", "expected a non-negative integer")
        if not isinstance(action_id, str) or not action_id:
            raise SchemaViolation(f"/{i}/action_id", "expected a nonempty string")
        if t_ms <= last_t:
            raise SchemaViolation(f"/{i}/t_ms", "timestamps must be strictly increasing")
        last_t = t_ms
        actions.append((t_ms, action_id))
    return ActionScript(actions=tuple(actions), final_t_ms=tail["final_t_ms"])


def event_log_lines(sess: Session) -> List[dict]:
    """Session history as JSON Lines records (plain dicts)."""
    scenario_id, scenario_version, _ = sess.scenario_ref
    return [
        {
            "t_ms": e.t_ms,
            "kind": e.kind.value,
            "session_id": sess.session_id,
            "scenario_id": scenario_id,
            "scenario_version": scenario_version,
            "payload": e.payload,
        }
        for e in sess.history
    ]


def dump_event_lines(lines: Iterable[dict]) -> bytes:
    """Serialize event records as deterministic JSONL (sorted keys, compact)."""
    out = []
    for line in lines:
        out.append(json.dumps(line, sort_keys=True, separators=(",", ":"), ensure_ascii=False))
    return ("\n".join(out) + "\n").encode("utf-8") if out else b""


_LINE_KEYS = {"t_ms", "kind", "session_id", "scenario_id", "scenario_version", "payload"}
_KINDS = {k.value for k in EventKind}


def check_event_record(record: object, where: str = "") -> dict:
    """Shape-check one event record; returns it unchanged."""
    if not isinstance(record, dict) or set(record) != _LINE_KEYS:
        raise SchemaViolation(where or "/", f"expected exactly the keys {sorted(_LINE_KEYS)}")
    if not isinstance(record["t_ms"], int) or isinstance(record["t_ms"], bool) or record["t_ms"] < 0:
        raise SchemaViolation(f"{where}/t_ms", "expected a non-negative integer")
    if record["kind"] not in _KINDS:
        raise SchemaViolation(f"{where}/kind", f"unknown event kind {record['kind']!r}")
    if not isinstance(record["payload"], dict):
        raise SchemaViolation(f"{where}/payload", "expected an object")
    if not isinstance(record["session_id"], str) or not isinstance(record["scenario_id"], str):
        raise SchemaViolation(where or "/", "session_id and scenario_id must be strings")
    if not isinstance(record["scenario_version"], int) or isinstance(record["scenario_version"], bool):
        raise SchemaViolation(f"{where}/scenario_version", "expected an integer")
    return record


def load_event_lines(data: Union[bytes, str]) -> List[dict]:
    """Parse a `.events.jsonl` document, checking each record's shape."""
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    lines = []
    for i, raw_line in enumerate(data.splitlines()):
        if not raw_line.strip():
            continue
        try:
            record = json.loads(raw_line)
        except json.JSONDecodeError as exc:
            raise SchemaViolation(f"/{i}", f"not valid JSON: {exc}") from None
        lines.append(check_event_record(record, f"/{i}"))
    return lines
