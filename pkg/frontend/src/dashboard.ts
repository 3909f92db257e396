/** Tutor dashboard rendering. Every number comes verbatim from the API
 * response; this module only formats, it never recomputes. */

import { el } from "./dom.js";
import type { CohortDashboardDoc, LearnerDashboardDoc } from "./types.js";

const pct = (rate: number) => `${(rate * 100).toFixed(0)}%`;
const ms = (value: number | null) => (value === null ? "-" : `${(value / 1000).toFixed(1)}s`);

export function renderCohortDashboard(dash: CohortDashboardDoc): HTMLElement {
  const bar = (rate: number, cls: string) =>
    el("div", { class: "bar" },
      el("div", { class: `bar-fill ${cls}`, style: `width:${rate * 100}%` }),
      el("span", { class: "bar-label" }, pct(rate)));

  const outcomeRow = el("div", { class: "outcome-rates" },
    ...Object.entries(dash.outcome_rates).map(([outcome, rate]) =>
      el("span", { class: `outcome outcome-${outcome}`, "data-rate": String(rate) },
        `${outcome}: ${pct(rate)}`)));

  const stateRows = dash.states.map((row) =>
    el("tr", { "data-state": row.state_id },
      el("td", {}, row.state_id),
      el("td", {}, String(row.n_entered)),
      el("td", {}, bar(row.goal_rate, "goal")),
      el("td", {}, bar(row.timeout_rate, "timeout")),
      el("td", {}, ms(row.median_time_to_goal_ms)),
      el("td", {}, row.top_wrong_actions.map(([a, c]) => `${a} (${c})`).join(", ") || "-"),
    ));

  const dist = dash.score_distribution;
  return el("section", { class: "cohort-dashboard", "data-cohort": dash.cohort_id },
    el("h3", {}, `${dash.scenario_id} v${dash.scenario_version} - ` +
      `${dash.n_sessions} session(s)`),
    outcomeRow,
    el("p", { class: "scores" },
      `scores: min ${dist.min.toFixed(0)} / p25 ${dist.p25.toFixed(0)} / ` +
      `median ${dist.median.toFixed(0)} / p75 ${dist.p75.toFixed(0)} / ` +
      `max ${dist.max.toFixed(0)}`),
    el("table", { class: "state-table" },
      el("thead", {},
        el("tr", {},
          el("th", {}, "state"), el("th", {}, "entered"), el("th", {}, "goal"),
          el("th", {}, "timeout"), el("th", {}, "median time to goal"),
          el("th", {}, "top wrong actions"))),
      el("tbody", {}, ...stateRows)),
  );
}

export function renderLearnerDashboard(dash: LearnerDashboardDoc): HTMLElement {
  return el("section", { class: "learner-dashboard" },
    el("h3", {}, `Learner ${dash.learner_id}`),
    ...dash.scenarios.map((view) =>
      el("div", { class: "trajectory", "data-scenario": view.scenario_id },
        el("h4", {}, view.scenario_id),
        el("ol", {}, ...view.attempts.map((a) =>
          el("li", {}, `${a.outcome}, score ${a.score.toFixed(0)} ` +
            `(${(a.total_ms / 1000).toFixed(0)}s)`))),
        el("p", {}, view.weak_states.length
          ? `needs work on: ${view.weak_states.join(", ")}`
          : "no weak states in the latest attempt"))),
  );
}
