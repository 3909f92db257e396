/** Wire formats shared with the repository service (scenario documents,
 * event logs, catalog, dashboards, alarms). */

export type RepresentationKind = "text" | "photo" | "video";
export type GoalMode = "any" | "all";
export type ActionCategory = "diagnostic" | "therapeutic" | "other";
export type AuthoredOutcome = "stabilized" | "deceased";
export type TerminalOutcome = AuthoredOutcome | "timed_out";

export interface Representation {
  kind: RepresentationKind;
  content: string;
}

export interface GoalSpec {
  mode: GoalMode;
  action_ids: string[];
}

export interface ActionEffect {
  transition?: string;
  duration_delta_ms?: number;
}

export interface StateNode {
  vitals: Record<string, number>;
  drift_to?: Record<string, number>;
  representation: Representation;
  goal?: GoalSpec;
  duration_ms?: number;
  on_timeout?: string;
  on_goal?: string;
  effects?: Record<string, ActionEffect>;
  terminal?: AuthoredOutcome;
}

export interface ActionDef {
  label: string;
  category: ActionCategory;
}

export interface ScenarioMeta {
  title: string;
  author: string;
  tags: string[];
  learning_objectives: string[];
  created_at: string;
}

export interface ScenarioDoc {
  id: string;
  version: number;
  meta: ScenarioMeta;
  initial_state: string;
  session_limit_ms: number;
  states: Record<string, StateNode>;
  actions: Record<string, ActionDef>;
}

export const DEFAULT_SESSION_LIMIT_MS = 600000;

export type EventKind =
  | "session_start"
  | "state_entered"
  | "action_performed"
  | "goal_achieved"
  | "timeout_deterioration"
  | "session_end";

export interface EventRecord {
  t_ms: number;
  kind: EventKind;
  session_id: string;
  scenario_id: string;
  scenario_version: number;
  payload: Record<string, unknown>;
}

export interface UploadReceipt {
  id: string;
  version: number;
  checksum: string;
}

export interface CatalogEntry {
  id: string;
  latest_version: number;
  title: string;
  tags: string[];
  checksum: string;
  published_at: string;
}

export interface Finding {
  code: string;
  subjectId: string | null;
  message: string;
}

export interface CohortStateRow {
  state_id: string;
  n_entered: number;
  n_goal: number;
  n_timeout: number;
  goal_rate: number;
  timeout_rate: number;
  median_time_to_goal_ms: number | null;
  goal_action_ids: string[];
  top_wrong_actions: [string, number][];
}

export interface CohortDashboardDoc {
  cohort_id: string;
  scenario_id: string;
  scenario_version: number;
  n_sessions: number;
  outcome_rates: Record<TerminalOutcome, number>;
  states: CohortStateRow[];
  score_distribution: { min: number; p25: number; median: number; p75: number; max: number };
}

export interface CohortDashboardsResponse {
  cohort_id: string;
  dashboards: CohortDashboardDoc[];
}

export interface LearnerAttempt {
  session_id: string;
  scenario_version: number;
  score: number;
  outcome: TerminalOutcome;
  total_ms: number;
}

export interface LearnerDashboardDoc {
  learner_id: string;
  scenarios: {
    scenario_id: string;
    attempts: LearnerAttempt[];
    latest_score: number;
    weak_states: string[];
  }[];
}
