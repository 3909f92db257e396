"""rvse: a rapid virtual simulation ecosystem.

Author timed branching patient-deterioration scenarios, validate and version
them in a repository service, play them deterministically against virtual
time, and turn the resulting event logs into dashboards and trouble alarms.
"""

from .scenario import (
    ActionCategory,
    ActionDef,
    ActionEffect,
    Finding,
    GoalMode,
    GoalSpec,
    MalformedDocument,
    Representation,
    RepresentationKind,
    Scenario,
    ScenarioMeta,
    SchemaViolation,
    StateNode,
    TerminalOutcome,
    ValidationReport,
    canonical_serialize,
    checksum,
    parse_scenario,
    validate,
)
from .engine import (
    ActionScript,
    DisplayFrame,
    EventKind,
    InvalidScenario,
    Session,
    SessionEnded,
    SessionEvent,
    SessionStatus,
    TimeReversal,
    UnknownAction,
    dump_event_lines,
    event_log_lines,
    load_event_lines,
    parse_action_script,
    render_frame,
    replay,
    start_session,
    vitals_at,
)
from .analytics import (
    Alarm,
    CohortDashboard,
    DetectorConfig,
    Hypothesis,
    LearnerDashboard,
    SessionSummary,
    SynthProfile,
    aggregate_cohort,
    analyze_corpus,
    detect_troubles,
    learner_dashboard,
    parse_profile,
    summarize_session,
    synth_cohort,
)
from .store import CatalogEntry, Principal, RepositoryStore, Role, UploadReceipt
from .service import RepositoryServer
from .client import ApiError, RepositoryClient

__version__ = "0.1.0"
