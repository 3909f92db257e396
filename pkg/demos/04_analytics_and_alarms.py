"""Detect trouble in synthetic cohorts: one class was never taught to give
antibiotics; the detectors should blame the action, not the scenario.

Run:  python demos/04_analytics_and_alarms.py
"""

import json
from pathlib import Path

from rvse import (
    DetectorConfig,
    SynthProfile,
    aggregate_cohort,
    detect_troubles,
    parse_scenario,
    summarize_session,
    synth_cohort,
)

HERE = Path(__file__).parent
scenario = parse_scenario((HERE / "sepsis-ward.rvs.json").read_bytes())

cohorts = {
    "spring-class": SynthProfile("competent"),
    "autumn-class": SynthProfile("untaught", "give-antibiotics"),
}

dashboards = []
for cohort_id, profile in cohorts.items():
    logs = synth_cohort(scenario, profile, n=20, seed=11, learner_prefix=cohort_id)
    summaries = [summarize_session(lines, cohort_id) for lines in logs]
    dash = aggregate_cohort(summaries)
    dashboards.append(dash)
    print(f"{cohort_id}: {dash.n_sessions} sessions, "
          f"stabilized rate {dash.outcome_rates['stabilized']:.2f}, "
          f"median score {dash.score_distribution['median']:.0f}")
    for agg in dash.states:
        print(f"   {agg.state_id:<7} entered {agg.n_entered:>2} "
              f"goal {agg.goal_rate:.2f} timeout {agg.timeout_rate:.2f}")

alarms = detect_troubles(dashboards, DetectorConfig(), emitted_at="2026-02-11T09:00:00Z")
print(f"\n{len(alarms)} alarm(s):")
for alarm in alarms:
    print(json.dumps(alarm.to_dict(), indent=2))

# Both cohorts stabilize (the detour through w2 recovers), so this is not a
# level problem; the miss is localized to one cohort, so it is not a design
# problem; what remains is the teaching gap on the antibiotics action.
assert [a.detector_id for a in alarms] == ["D3"]
