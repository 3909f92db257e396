/** Test fixture: the sepsis-ward teaching case (same content the service's
 * own demo corpus uses). */

import type { ScenarioDoc } from "../src/types.js";

export function sepsisScenario(): ScenarioDoc {
  return {
    id: "sepsis-ward",
    version: 1,
    meta: {
      title: "Deteriorating sepsis on the ward",
      author: "alice",
      tags: ["sepsis", "internal-medicine"],
      learning_objectives: [
        "Check airway as the first priority action",
        "Give antibiotics without delay",
        "Give fluids to support perfusion",
        "Call for help or start oxygen when the patient slips",
      ],
      created_at: "2026-01-05T09:30:00Z",
    },
    initial_state: "s1",
    session_limit_ms: 600000,
    states: {
      s1: {
        vitals: { hr: 92, sbp: 112, rr: 18, spo2: 96 },
        drift_to: { hr: 118, sbp: 98, rr: 24, spo2: 91 },
        representation: { kind: "text", content: "Flushed and anxious, talking in sentences." },
        goal: { mode: "any", action_ids: ["check-airway"] },
        duration_ms: 60000,
        on_timeout: "w1",
        on_goal: "s2",
      },
      w1: {
        vitals: { hr: 122, sbp: 92, rr: 26, spo2: 89 },
        drift_to: { hr: 138, sbp: 78, rr: 32, spo2: 84 },
        representation: { kind: "text", content: "Struggling to speak, accessory muscle use." },
        goal: { mode: "any", action_ids: ["call-for-help"] },
        duration_ms: 60000,
        on_timeout: "dead",
        on_goal: "s2",
      },
      s2: {
        vitals: { hr: 108, sbp: 100, rr: 22, spo2: 93 },
        drift_to: { hr: 126, sbp: 88, rr: 28, spo2: 88 },
        representation: { kind: "text", content: "Rigors; looks unwell; lactate rising." },
        goal: { mode: "any", action_ids: ["give-antibiotics"] },
        duration_ms: 60000,
        on_timeout: "w2",
        on_goal: "s3",
      },
      w2: {
        vitals: { hr: 132, sbp: 84, rr: 30, spo2: 85 },
        drift_to: { hr: 146, sbp: 70, rr: 36, spo2: 78 },
        representation: { kind: "text", content: "Mottled, confused, saturating poorly." },
        goal: { mode: "any", action_ids: ["start-oxygen"] },
        duration_ms: 60000,
        on_timeout: "dead",
        on_goal: "s3",
      },
      s3: {
        vitals: { hr: 100, sbp: 104, rr: 20, spo2: 94 },
        drift_to: { hr: 120, sbp: 90, rr: 26, spo2: 87 },
        representation: { kind: "text", content: "Responding, but pressure still soft." },
        goal: { mode: "any", action_ids: ["give-fluids"] },
        duration_ms: 60000,
        on_timeout: "dead",
        on_goal: "stable",
      },
      stable: {
        vitals: { hr: 84, sbp: 118, rr: 16, spo2: 98 },
        representation: { kind: "text", content: "Settled on the ward, obs normalising." },
        terminal: "stabilized",
      },
      dead: {
        vitals: { hr: 0, sbp: 0, rr: 0, spo2: 0 },
        representation: { kind: "text", content: "Resuscitation unsuccessful." },
        terminal: "deceased",
      },
    },
    actions: {
      "check-airway": { label: "Check airway", category: "diagnostic" },
      "give-antibiotics": { label: "Give antibiotics", category: "therapeutic" },
      "give-fluids": { label: "Give fluids", category: "therapeutic" },
      "call-for-help": { label: "Call for help", category: "other" },
      "start-oxygen": { label: "Start oxygen", category: "therapeutic" },
      "check-pulse": { label: "Check pulse", category: "diagnostic" },
    },
  };
}

export const PERFECT_ACTIONS = [
  { t_ms: 30000, action_id: "check-airway" },
  { t_ms: 60000, action_id: "give-antibiotics" },
  { t_ms: 90000, action_id: "give-fluids" },
];
