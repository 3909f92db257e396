"""Event-log analytics: session summaries, dashboards, trouble detectors.

Everything here is a pure function over parsed `.events.jsonl` records (and a
detector config), so results are reproducible from the raw logs alone. The
detectors map threshold violations onto the three trouble hypotheses carried
by every alarm:

* D1 ``ill_designed`` - a state fails (times out) in *every* eligible cohort.
* D2 ``learner_level_dissonance`` - one cohort stabilizes, another does not.
* D3 ``teaching_gap`` - a goal action is missed in some cohort but performed
  fine in another, while the struggling cohort handles its other states well.

The all-cohorts-vs-one-cohort split is what separates D1 from D3: a universal
failure points at the design, a localized one at what that cohort was taught.
"""

from __future__ import annotations

import random
import re
from dataclasses import dataclass, field
from datetime import datetime, timezone
from enum import Enum
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

from .engine import EventKind, SessionStatus, event_log_lines, start_session
from .scenario import GoalMode, Scenario, TerminalOutcome

__all__ = [
    "Alarm",
    "AnalysisResult",
    "AnalyticsError",
    "CohortDashboard",
    "CohortStateAggregate",
    "CorruptLog",
    "DetectorConfig",
    "EmptyInput",
    "Hypothesis",
    "IncompleteLog",
    "LearnerDashboard",
    "LearnerScenarioView",
    "MixedCohort",
    "SessionSummary",
    "StateRecord",
    "SynthProfile",
    "aggregate_cohort",
    "analyze_corpus",
    "detect_troubles",
    "learner_dashboard",
    "parse_profile",
    "summarize_session",
    "synth_cohort",
]

OFF_GOAL_PENALTY = 5  # score points per off-goal action


class AnalyticsError(Exception):
    pass


class IncompleteLog(AnalyticsError):
    pass


class CorruptLog(AnalyticsError):
    pass


class MixedCohort(AnalyticsError):
    pass


class EmptyInput(AnalyticsError):
    pass


class Hypothesis(str, Enum):
    ILL_DESIGNED = "ill_designed"
    LEARNER_LEVEL_DISSONANCE = "learner_level_dissonance"
    TEACHING_GAP = "teaching_gap"


DETECTOR_HYPOTHESIS = {
    "D1": Hypothesis.ILL_DESIGNED,
    "D2": Hypothesis.LEARNER_LEVEL_DISSONANCE,
    "D3": Hypothesis.TEACHING_GAP,
}


@dataclass(frozen=True)
class DetectorConfig:
    theta_state_fail: float = 0.8
    theta_cohort_fail: float = 0.6
    theta_action_miss: float = 0.7
    min_sessions: int = 10

    def __post_init__(self):
        for name in ("theta_state_fail", "theta_cohort_fail", "theta_action_miss"):
            value = getattr(self, name)
            if not 0 < value <= 1:
                raise ValueError(f"{name} must be in (0, 1]")
        if self.min_sessions < 1:
            raise ValueError("min_sessions must be >= 1")

    @classmethod
    def from_dict(cls, raw: Mapping) -> "DetectorConfig":
        unknown = set(raw) - {"theta_state_fail", "theta_cohort_fail",
                              "theta_action_miss", "min_sessions"}
        if unknown:
            raise ValueError(f"unknown detector config keys: {sorted(unknown)}")
        return cls(**raw)


@dataclass(frozen=True)
class StateRecord:
    state_id: str
    entered_at_ms: int
    exited_by: str  # goal | timeout | effect | session_end
    time_to_goal_ms: Optional[int]
    off_goal_action_count: int
    wrong_action_ids: tuple  # every off-goal occurrence, in order
    goal_action_ids: tuple  # the state's goal set, () if no goal

    def to_dict(self) -> dict:
        out = {
            "state_id": self.state_id,
            "entered_at_ms": self.entered_at_ms,
            "exited_by": self.exited_by,
            "time_to_goal_ms": self.time_to_goal_ms,
            "off_goal_action_count": self.off_goal_action_count,
            "wrong_action_ids": list(self.wrong_action_ids),
            "goal_action_ids": list(self.goal_action_ids),
        }
        return out


@dataclass(frozen=True)
class SessionSummary:
    session_id: str
    learner_id: str
    cohort_id: str
    scenario_id: str
    scenario_version: int
    outcome: TerminalOutcome
    total_ms: int
    states: tuple  # StateRecord, ordered by entered_at_ms
    goals_hit: int
    goals_possible: int
    score: float

    def to_dict(self) -> dict:
        return {
            "session_id": self.session_id,
            "learner_id": self.learner_id,
            "cohort_id": self.cohort_id,
            "scenario_id": self.scenario_id,
            "scenario_version": self.scenario_version,
            "outcome": self.outcome.value,
            "total_ms": self.total_ms,
            "states": [r.to_dict() for r in self.states],
            "goals_hit": self.goals_hit,
            "goals_possible": self.goals_possible,
            "score": self.score,
        }


@dataclass(frozen=True)
class CohortStateAggregate:
    state_id: str
    n_entered: int
    n_goal: int
    n_timeout: int
    goal_rate: float
    timeout_rate: float
    median_time_to_goal_ms: Optional[int]
    goal_action_ids: tuple
    top_wrong_actions: tuple  # of (action_id, count), count desc

    def to_dict(self) -> dict:
        return {
            "state_id": self.state_id,
            "n_entered": self.n_entered,
            "n_goal": self.n_goal,
            "n_timeout": self.n_timeout,
            "goal_rate": self.goal_rate,
            "timeout_rate": self.timeout_rate,
            "median_time_to_goal_ms": self.median_time_to_goal_ms,
            "goal_action_ids": list(self.goal_action_ids),
            "top_wrong_actions": [[a, c] for a, c in self.top_wrong_actions],
        }


@dataclass(frozen=True)
class CohortDashboard:
    cohort_id: str
    scenario_id: str
    scenario_version: int
    n_sessions: int
    outcome_rates: dict  # outcome value -> fraction, sums to 1
    states: tuple  # CohortStateAggregate, sorted by state_id
    score_distribution: dict  # min, p25, median, p75, max

    def to_dict(self) -> dict:
        return {
            "cohort_id": self.cohort_id,
            "scenario_id": self.scenario_id,
            "scenario_version": self.scenario_version,
            "n_sessions": self.n_sessions,
            "outcome_rates": dict(self.outcome_rates),
            "states": [s.to_dict() for s in self.states],
            "score_distribution": dict(self.score_distribution),
        }


@dataclass(frozen=True)
class LearnerScenarioView:
    scenario_id: str
    attempts: tuple  # of {session_id, scenario_version, score, outcome, total_ms}
    latest_score: float
    weak_states: tuple  # states timed out in the latest attempt

    def to_dict(self) -> dict:
        return {
            "scenario_id": self.scenario_id,
            "attempts": [dict(a) for a in self.attempts],
            "latest_score": self.latest_score,
            "weak_states": list(self.weak_states),
        }


@dataclass(frozen=True)
class LearnerDashboard:
    learner_id: str
    scenarios: tuple  # LearnerScenarioView, sorted by scenario_id

    def to_dict(self) -> dict:
        return {
            "learner_id": self.learner_id,
            "scenarios": [s.to_dict() for s in self.scenarios],
        }


@dataclass(frozen=True)
class Alarm:
    scenario_id: str
    scenario_version: int
    detector_id: str
    hypothesis: Hypothesis
    locus: Optional[str]
    evidence: dict  # metric, value, threshold
    emitted_at: str

    def to_dict(self) -> dict:
        return {
            "scenario_id": self.scenario_id,
            "scenario_version": self.scenario_version,
            "detector_id": self.detector_id,
            "hypothesis": self.hypothesis.value,
            "locus": self.locus,
            "evidence": dict(self.evidence),
            "emitted_at": self.emitted_at,
        }


# ---------------------------------------------------------------------------
# Session summaries
# ---------------------------------------------------------------------------

_CAUSE_KINDS = {
    EventKind.SESSION_START.value,
    EventKind.GOAL_ACHIEVED.value,
    EventKind.TIMEOUT_DETERIORATION.value,
}


def summarize_session(events: Sequence[dict], cohort_id: str) -> SessionSummary:
    """Reduce one complete, ordered event log to a SessionSummary.

    Works purely from the log: the engine stamps each state_entered with the
    state's goal set and each action_performed with its disposition, so no
    scenario lookup is needed here.
    """
    if not events:
        raise IncompleteLog("empty event log")
    first, last = events[0], events[-1]
    if first["kind"] != EventKind.SESSION_START.value or first["t_ms"] != 0:
        raise CorruptLog("log must open with session_start at t=0")
    if last["kind"] != EventKind.SESSION_END.value:
        raise IncompleteLog("log has no session_end")
    session_ids = {e["session_id"] for e in events}
    refs = {(e["scenario_id"], e["scenario_version"]) for e in events}
    if len(session_ids) != 1 or len(refs) != 1:
        raise CorruptLog("log mixes sessions or scenario versions")
    learner_id = first["payload"].get("learner_id")
    if not learner_id:
        raise CorruptLog("session_start payload carries no learner_id")

    records: List[StateRecord] = []
    open_state: Optional[dict] = None
    outcome: Optional[TerminalOutcome] = None
    prev_t = -1
    for i, e in enumerate(events):
        t, kind = e["t_ms"], e["kind"]
        if t < prev_t:
            raise CorruptLog(f"timestamps go backwards at record {i}")
        prev_t = t
        if i > 0 and kind == EventKind.SESSION_START.value:
            raise CorruptLog("session_start appears twice")
        if outcome is not None:
            raise CorruptLog("events after session_end")

        if kind == EventKind.STATE_ENTERED.value:
            prev = events[i - 1] if i else None
            caused = prev is not None and prev["t_ms"] == t and (
                prev["kind"] in _CAUSE_KINDS
                or (prev["kind"] == EventKind.ACTION_PERFORMED.value
                    and prev["payload"].get("disposition") == "effect")
            )
            if not caused:
                raise CorruptLog(f"state_entered at t={t} has no cause")
            if open_state is not None:
                records.append(_close_record(open_state, prev))
            open_state = {
                "state_id": e["payload"]["state_id"],
                "entered_at": t,
                "goal_action_ids": tuple(e["payload"].get("goal_action_ids", ())),
                "wrong": [],
            }
        elif kind == EventKind.ACTION_PERFORMED.value:
            if open_state is None:
                raise CorruptLog("action before any state was entered")
            if e["payload"].get("disposition") in ("effect", "none"):
                open_state["wrong"].append(e["payload"]["action_id"])
        elif kind == EventKind.SESSION_END.value:
            outcome = TerminalOutcome(e["payload"]["outcome"])
            if open_state is None:
                raise CorruptLog("session_end before any state was entered")
            records.append(_close_record(open_state, None))
            open_state = None

    total_ms = last["t_ms"]
    states_entered_with_goal = {r.state_id for r in records if r.goal_action_ids}
    states_goaled = {r.state_id for r in records if r.exited_by == "goal"}
    goals_possible = len(states_entered_with_goal)
    goals_hit = len(states_goaled)
    base = 100.0 * (goals_hit / goals_possible) if goals_possible else 100.0
    off_goal_total = sum(r.off_goal_action_count for r in records)
    score = max(0.0, min(100.0, base - OFF_GOAL_PENALTY * off_goal_total))

    scenario_id, scenario_version = next(iter(refs))
    return SessionSummary(
        session_id=next(iter(session_ids)),
        learner_id=learner_id,
        cohort_id=cohort_id,
        scenario_id=scenario_id,
        scenario_version=scenario_version,
        outcome=outcome,
        total_ms=total_ms,
        states=tuple(records),
        goals_hit=goals_hit,
        goals_possible=goals_possible,
        score=score,
    )


def _close_record(open_state: dict, cause: Optional[dict]) -> StateRecord:
    exited_by = "session_end"
    time_to_goal = None
    if cause is not None:
        kind = cause["kind"]
        if kind == EventKind.GOAL_ACHIEVED.value:
            exited_by = "goal"
            time_to_goal = cause["t_ms"] - open_state["entered_at"]
        elif kind == EventKind.TIMEOUT_DETERIORATION.value:
            exited_by = "timeout"
        elif kind == EventKind.ACTION_PERFORMED.value:
            exited_by = "effect"
    return StateRecord(
        state_id=open_state["state_id"],
        entered_at_ms=open_state["entered_at"],
        exited_by=exited_by,
        time_to_goal_ms=time_to_goal,
        off_goal_action_count=len(open_state["wrong"]),
        wrong_action_ids=tuple(open_state["wrong"]),
        goal_action_ids=open_state["goal_action_ids"],
    )


# ---------------------------------------------------------------------------
# Dashboards
# ---------------------------------------------------------------------------


def _lower_quantile(sorted_values: Sequence, q: float):
    # lower-index convention keeps every aggregate exact in integer arithmetic
    return sorted_values[int((len(sorted_values) - 1) * q)]


def lower_median(values: Iterable):
    ordered = sorted(values)
    if not ordered:
        return None
    return ordered[(len(ordered) - 1) // 2]


def aggregate_cohort(summaries: Sequence[SessionSummary]) -> CohortDashboard:
    """Aggregate one cohort's summaries for one scenario version.

    Per-state counting is session-level (a session counts once per state no
    matter how often it re-enters); wrong-action counts keep multiplicity.
    """
    if not summaries:
        raise EmptyInput("no summaries to aggregate")
    keys = {(s.cohort_id, s.scenario_id, s.scenario_version) for s in summaries}
    if len(keys) != 1:
        raise MixedCohort(f"summaries span {len(keys)} (cohort, scenario) groups")
    cohort_id, scenario_id, scenario_version = next(iter(keys))

    n = len(summaries)
    outcome_rates = {o.value: 0 for o in TerminalOutcome}
    for s in summaries:
        outcome_rates[s.outcome.value] += 1
    outcome_rates = {k: v / n for k, v in outcome_rates.items()}

    per_state: Dict[str, dict] = {}
    for s in summaries:
        seen_here: Dict[str, dict] = {}
        for r in s.states:
            agg = per_state.setdefault(r.state_id, {
                "entered": 0, "goal": 0, "timeout": 0,
                "goal_times": [], "wrong": {}, "goal_action_ids": set(),
            })
            flags = seen_here.setdefault(r.state_id, {"entered": False, "goal": False,
                                                      "timeout": False})
            if not flags["entered"]:
                agg["entered"] += 1
                flags["entered"] = True
            if r.exited_by == "goal":
                agg["goal_times"].append(r.time_to_goal_ms)
                if not flags["goal"]:
                    agg["goal"] += 1
                    flags["goal"] = True
            if r.exited_by == "timeout" and not flags["timeout"]:
                agg["timeout"] += 1
                flags["timeout"] = True
            agg["goal_action_ids"].update(r.goal_action_ids)
            for action_id in r.wrong_action_ids:
                agg["wrong"][action_id] = agg["wrong"].get(action_id, 0) + 1

    aggregates = []
    for state_id in sorted(per_state):
        agg = per_state[state_id]
        top_wrong = sorted(agg["wrong"].items(), key=lambda kv: (-kv[1], kv[0]))[:5]
        aggregates.append(CohortStateAggregate(
            state_id=state_id,
            n_entered=agg["entered"],
            n_goal=agg["goal"],
            n_timeout=agg["timeout"],
            goal_rate=agg["goal"] / agg["entered"],
            timeout_rate=agg["timeout"] / agg["entered"],
            median_time_to_goal_ms=lower_median(agg["goal_times"]),
            goal_action_ids=tuple(sorted(agg["goal_action_ids"])),
            top_wrong_actions=tuple(top_wrong),
        ))

    scores = sorted(s.score for s in summaries)
    distribution = {
        "min": scores[0],
        "p25": _lower_quantile(scores, 0.25),
        "median": _lower_quantile(scores, 0.5),
        "p75": _lower_quantile(scores, 0.75),
        "max": scores[-1],
    }
    return CohortDashboard(
        cohort_id=cohort_id,
        scenario_id=scenario_id,
        scenario_version=scenario_version,
        n_sessions=n,
        outcome_rates=outcome_rates,
        states=tuple(aggregates),
        score_distribution=distribution,
    )


def learner_dashboard(summaries: Sequence[SessionSummary]) -> LearnerDashboard:
    """Per-learner view: score trajectory per scenario plus current weaknesses.

    Attempts keep the caller's order, which is expected to be chronological.
    """
    if not summaries:
        raise EmptyInput("no summaries for learner")
    learners = {s.learner_id for s in summaries}
    if len(learners) != 1:
        raise MixedCohort(f"summaries span {len(learners)} learners")

    by_scenario: Dict[str, List[SessionSummary]] = {}
    for s in summaries:
        by_scenario.setdefault(s.scenario_id, []).append(s)

    views = []
    for scenario_id in sorted(by_scenario):
        attempts_src = by_scenario[scenario_id]
        attempts = tuple(
            {
                "session_id": s.session_id,
                "scenario_version": s.scenario_version,
                "score": s.score,
                "outcome": s.outcome.value,
                "total_ms": s.total_ms,
            }
            for s in attempts_src
        )
        latest = attempts_src[-1]
        weak = tuple(sorted({r.state_id for r in latest.states if r.exited_by == "timeout"}))
        views.append(LearnerScenarioView(
            scenario_id=scenario_id,
            attempts=attempts,
            latest_score=latest.score,
            weak_states=weak,
        ))
    return LearnerDashboard(learner_id=next(iter(learners)), scenarios=tuple(views))


# ---------------------------------------------------------------------------
# Trouble detectors
# ---------------------------------------------------------------------------


def _now_utc() -> str:
    return datetime.now(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


def detect_troubles(dashboards: Sequence[CohortDashboard], cfg: DetectorConfig,
                    emitted_at: Optional[str] = None) -> List[Alarm]:
    """Run D1/D2/D3 over the cohort dashboards of one scenario version.

    Cohorts below cfg.min_sessions are ignored. Detectors are independent;
    zero or several alarms may come back, deterministically ordered.
    """
    if not dashboards:
        return []
    refs = {(d.scenario_id, d.scenario_version) for d in dashboards}
    if len(refs) != 1:
        raise MixedCohort("dashboards span multiple scenario versions")
    scenario_id, scenario_version = next(iter(refs))
    eligible = [d for d in dashboards if d.n_sessions >= cfg.min_sessions]
    if not eligible:
        return []
    stamp = emitted_at if emitted_at is not None else _now_utc()

    def alarm(detector_id: str, locus: Optional[str], metric: str,
              value: float, threshold: float) -> Alarm:
        return Alarm(
            scenario_id=scenario_id,
            scenario_version=scenario_version,
            detector_id=detector_id,
            hypothesis=DETECTOR_HYPOTHESIS[detector_id],
            locus=locus,
            evidence={"metric": metric, "value": value, "threshold": threshold},
            emitted_at=stamp,
        )

    alarms: List[Alarm] = []
    state_index = [{a.state_id: a for a in d.states} for d in eligible]

    # D1: a state that times out in every eligible cohort
    all_states = sorted({sid for idx in state_index for sid in idx})
    for state_id in all_states:
        rates = [
            idx[state_id].timeout_rate if state_id in idx and idx[state_id].n_entered else 0.0
            for idx in state_index
        ]
        if min(rates) >= cfg.theta_state_fail:
            alarms.append(alarm("D1", state_id, "timeout_rate_min_across_cohorts",
                                min(rates), cfg.theta_state_fail))

    # D2: weak cohort alongside a strong one
    stab = {d.cohort_id: d.outcome_rates.get(TerminalOutcome.STABILIZED.value, 0.0)
            for d in eligible}
    strong = {c for c, rate in stab.items() if rate >= cfg.theta_cohort_fail}
    for cohort_id in sorted(stab):
        if stab[cohort_id] <= 1 - cfg.theta_cohort_fail and strong - {cohort_id}:
            alarms.append(alarm("D2", cohort_id, "stabilized_rate",
                                stab[cohort_id], 1 - cfg.theta_cohort_fail))

    # D3: a goal action missed in one cohort but fine in another
    def miss_rate(action_id: str, d: CohortDashboard) -> float:
        rates = [a.n_timeout / d.n_sessions for a in d.states
                 if action_id in a.goal_action_ids and a.n_entered]
        return max(rates, default=0.0)

    tripped: Dict[str, float] = {}
    for d in eligible:
        for agg in d.states:
            if not agg.goal_action_ids or not agg.n_entered:
                continue
            state_miss = agg.n_timeout / d.n_sessions
            if state_miss < cfg.theta_action_miss:
                continue
            others_ok = all(
                other.goal_rate >= 0.5
                for other in d.states
                if other.state_id != agg.state_id and other.goal_action_ids and other.n_entered
            )
            if not others_ok:
                continue
            for action_id in agg.goal_action_ids:
                taught_elsewhere = any(
                    other_d is not d and miss_rate(action_id, other_d) < cfg.theta_action_miss
                    for other_d in eligible
                )
                if taught_elsewhere:
                    tripped[action_id] = max(tripped.get(action_id, 0.0), state_miss)
    for action_id in sorted(tripped):
        alarms.append(alarm("D3", action_id, "goal_action_miss_rate",
                            tripped[action_id], cfg.theta_action_miss))
    return alarms


# ---------------------------------------------------------------------------
# Whole-corpus pipeline
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class AnalysisResult:
    summaries: tuple
    learner_dashboards: dict  # learner_id -> LearnerDashboard
    cohort_dashboards: dict  # (scenario_id, version, cohort_id) -> CohortDashboard
    alarms: tuple


def analyze_corpus(summaries: Sequence[SessionSummary], cfg: DetectorConfig,
                   emitted_at: Optional[str] = None) -> AnalysisResult:
    """Build every dashboard and run the detectors over a summary corpus."""
    by_learner: Dict[str, List[SessionSummary]] = {}
    by_group: Dict[Tuple[str, int, str], List[SessionSummary]] = {}
    for s in summaries:
        by_learner.setdefault(s.learner_id, []).append(s)
        by_group.setdefault((s.scenario_id, s.scenario_version, s.cohort_id), []).append(s)

    learner_dashboards = {lid: learner_dashboard(group)
                          for lid, group in sorted(by_learner.items())}
    cohort_dashboards = {key: aggregate_cohort(group)
                         for key, group in sorted(by_group.items())}

    alarms: List[Alarm] = []
    by_scenario: Dict[Tuple[str, int], List[CohortDashboard]] = {}
    for (scenario_id, version, _), dash in sorted(cohort_dashboards.items()):
        by_scenario.setdefault((scenario_id, version), []).append(dash)
    for key in sorted(by_scenario):
        alarms.extend(detect_troubles(by_scenario[key], cfg, emitted_at=emitted_at))

    return AnalysisResult(
        summaries=tuple(summaries),
        learner_dashboards=learner_dashboards,
        cohort_dashboards=cohort_dashboards,
        alarms=tuple(alarms),
    )


# ---------------------------------------------------------------------------
# Synthetic cohorts (test harness for trouble detection)
# ---------------------------------------------------------------------------

_PROFILE_KINDS = {"competent", "weak", "confused_at", "untaught"}
_TAG_SAFE = re.compile(r"[^A-Za-z0-9._~-]")


@dataclass(frozen=True)
class SynthProfile:
    """A scripted learner policy.

    competent    - performs each goal near mid-duration
    confused_at  - competent, but never acts in the target state
    untaught     - competent, but never performs the target action
    weak         - performs the goal with probability 0.2 per state
    """

    kind: str
    target: Optional[str] = None

    def __post_init__(self):
        if self.kind not in _PROFILE_KINDS:
            raise ValueError(f"unknown profile kind {self.kind!r}")
        if self.kind in ("confused_at", "untaught") and not self.target:
            raise ValueError(f"profile {self.kind} needs a target")
        if self.kind in ("competent", "weak") and self.target:
            raise ValueError(f"profile {self.kind} takes no target")

    @property
    def tag(self) -> str:
        raw = self.kind if self.target is None else f"{self.kind}-{self.target}"
        return _TAG_SAFE.sub("_", raw)


def parse_profile(text: str) -> SynthProfile:
    """Parse CLI-style profile syntax: competent | weak | confused_at:STATE |
    untaught:ACTION."""
    kind, sep, target = text.partition(":")
    return SynthProfile(kind=kind, target=target if sep else None)


def synth_cohort(scenario: Scenario, profile: SynthProfile, n: int, seed: int,
                 learner_prefix: Optional[str] = None) -> List[List[dict]]:
    """Generate n deterministic event logs by playing the engine with a policy.

    Logs are real engine traces (never hand-forged), so they satisfy every
    engine invariant by construction. Same (scenario, profile, n, seed) gives
    identical logs.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    prefix = learner_prefix or f"{profile.tag}-{seed}"
    logs = []
    for i in range(n):
        rng = random.Random(f"{seed}:{profile.tag}:{i}")
        session_id = f"{scenario.id}-{prefix}-{i:04d}"
        learner_id = f"{prefix}-L{i:04d}"
        sess = start_session(scenario, session_id, learner_id)
        steps = 0
        while sess.status is SessionStatus.RUNNING:
            steps += 1
            if steps > 100_000:
                raise RuntimeError("synthetic policy did not terminate")
            node = scenario.states[sess.current_state]
            act = _policy_acts(profile, node, rng)
            performed = False
            if act and node.goal is not None:
                available = [a for a in node.goal.action_ids
                             if not (profile.kind == "untaught" and a == profile.target)]
                complete = bool(available) if node.goal.mode is GoalMode.ANY \
                    else set(available) == set(node.goal.action_ids)
                if available:
                    t = sess.state_entered_at + sess.effective_duration_ms // 2
                    boundary = sess.state_entered_at + sess.effective_duration_ms
                    todo = available[:1] if node.goal.mode is GoalMode.ANY else available
                    for k, action_id in enumerate(todo):
                        sess.perform_action(min(t + k, boundary - 1), action_id)
                        if sess.status is SessionStatus.ENDED:
                            break
                    performed = complete
            if sess.status is SessionStatus.ENDED:
                break
            if not performed:
                # wait for the deterioration timeout (or the session limit)
                boundary = sess.state_entered_at + sess.effective_duration_ms
                sess.advance_to(min(boundary, scenario.session_limit_ms))
        logs.append(event_log_lines(sess))
    return logs


def _policy_acts(profile: SynthProfile, node, rng: random.Random) -> bool:
    if profile.kind == "competent" or profile.kind == "untaught":
        return True
    if profile.kind == "confused_at":
        return node.id != profile.target
    return rng.random() < 0.2  # weak
