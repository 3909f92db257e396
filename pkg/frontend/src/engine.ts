/** Local play engine: the client-side port of the server's session rules, so
 * learners can play fetched scenarios offline and ship the finished log in
 * one round-trip. Timing semantics are identical to the service:
 *
 *  - timeouts fire at exactly enteredAt + effectiveDuration; at a boundary
 *    the timeout wins over a same-instant action;
 *  - reaching the session limit in a non-terminal state ends the session as
 *    timed_out at exactly the limit (a boundary at the limit fires first);
 *  - effect duration deltas never shrink a state below elapsed+1 ms.
 *
 * Event logs produced here are byte-identical to a server-side replay of the
 * same action script; the server remains the authority in any dispute. */

import { stableStringify } from "./canonical.js";
import type {
  EventKind,
  EventRecord,
  Representation,
  ScenarioDoc,
  StateNode,
  TerminalOutcome,
} from "./types.js";
import { errorFindings, validateDocument } from "./validate.js";

export type SessionStatus = "running" | "ended";

export interface DisplayFrame {
  vitals: Record<string, number>;
  representation: Representation;
  elapsedInStateMs: number;
  history: string[];
  status: SessionStatus;
  outcome: TerminalOutcome | null;
}

export class EngineError extends Error {}
export class TimeReversal extends EngineError {}
export class SessionEnded extends EngineError {}
export class UnknownAction extends EngineError {}
export class InvalidScenario extends EngineError {}

export function vitalsAt(
  node: StateNode,
  elapsedMs: number,
  effectiveDurationMs: number,
): Record<string, number> {
  if (node.terminal !== undefined || node.drift_to === undefined) {
    return { ...node.vitals };
  }
  const fraction = elapsedMs / effectiveDurationMs;
  const out: Record<string, number> = {};
  for (const [name, value] of Object.entries(node.vitals)) {
    out[name] = value + (node.drift_to[name]! - value) * fraction;
  }
  return out;
}

export class PlaySession {
  readonly doc: ScenarioDoc;
  readonly sessionId: string;
  readonly learnerId: string;
  readonly checksum: string;
  currentState: string;
  stateEnteredAt = 0;
  effectiveDurationMs = 0;
  goalsSatisfied: Set<string> = new Set();
  now = 0;
  status: SessionStatus = "running";
  outcome: TerminalOutcome | null = null;
  readonly history: EventRecord[] = [];

  constructor(doc: ScenarioDoc, checksum: string, sessionId: string, learnerId: string) {
    if (errorFindings(validateDocument(doc)).length) {
      throw new InvalidScenario("scenario has validation errors");
    }
    this.doc = doc;
    this.checksum = checksum;
    this.sessionId = sessionId;
    this.learnerId = learnerId;
    this.currentState = doc.initial_state;
    this.emit(0, "session_start", { learner_id: learnerId, scenario_checksum: checksum });
    this.enter(doc.initial_state, 0);
  }

  private emit(tMs: number, kind: EventKind, payload: Record<string, unknown>): void {
    this.history.push({
      t_ms: tMs,
      kind,
      session_id: this.sessionId,
      scenario_id: this.doc.id,
      scenario_version: this.doc.version,
      payload,
    });
  }

  private enter(stateId: string, tMs: number): void {
    const node = this.doc.states[stateId]!;
    this.currentState = stateId;
    this.stateEnteredAt = tMs;
    this.effectiveDurationMs = node.duration_ms ?? 0;
    this.goalsSatisfied = new Set();
    const payload: Record<string, unknown> = { state_id: stateId };
    if (node.goal !== undefined) {
      payload.goal_action_ids = [...node.goal.action_ids].sort();
    }
    this.emit(tMs, "state_entered", payload);
    if (node.terminal !== undefined) {
      this.end(node.terminal, tMs, "terminal");
    }
  }

  private end(outcome: TerminalOutcome, tMs: number, reason: string): void {
    this.status = "ended";
    this.outcome = outcome;
    this.now = tMs;
    this.emit(tMs, "session_end", { outcome, reason });
  }

  private advance(targetMs: number): void {
    const limit = this.doc.session_limit_ms;
    while (this.status === "running") {
      const boundary = this.stateEnteredAt + this.effectiveDurationMs;
      if (Math.min(boundary, limit) > targetMs) {
        this.now = targetMs;
        return;
      }
      if (boundary <= limit) {
        this.now = boundary;
        this.emit(boundary, "timeout_deterioration", { state_id: this.currentState });
        const node = this.doc.states[this.currentState]!;
        this.enter(node.on_timeout!, boundary);
        if (this.status === "running" && boundary === limit) {
          this.end("timed_out", limit, "session_limit");
        }
      } else {
        this.end("timed_out", limit, "session_limit");
      }
    }
  }

  advanceTo(tMs: number): void {
    if (this.status === "ended") throw new SessionEnded(`session ${this.sessionId} ended`);
    if (tMs < this.now) throw new TimeReversal(`t=${tMs} is before now=${this.now}`);
    this.advance(tMs);
  }

  private isEnded(): boolean {
    return this.status === "ended";
  }

  performAction(tMs: number, actionId: string): void {
    if (this.isEnded()) throw new SessionEnded(`session ${this.sessionId} ended`);
    if (!(actionId in this.doc.actions)) throw new UnknownAction(actionId);
    if (tMs < this.now) throw new TimeReversal(`t=${tMs} is before now=${this.now}`);
    this.advance(tMs);
    if (this.isEnded()) {
      throw new SessionEnded(`session ended at t=${this.now}, before the action at t=${tMs}`);
    }

    const node = this.doc.states[this.currentState]!;
    let achieved = false;
    let disposition = "none";
    if (node.goal !== undefined && node.goal.action_ids.includes(actionId)) {
      if (node.goal.mode === "any") {
        achieved = true;
      } else {
        this.goalsSatisfied.add(actionId);
        achieved = node.goal.action_ids.every((a) => this.goalsSatisfied.has(a));
      }
      disposition = achieved ? "goal" : "goal_partial";
    } else if (actionId in (node.effects ?? {})) {
      disposition = "effect";
    }

    this.emit(tMs, "action_performed", { action_id: actionId, disposition });
    if (achieved) {
      this.emit(tMs, "goal_achieved", { state_id: this.currentState, action_id: actionId });
      this.enter(node.on_goal!, tMs);
    } else if (disposition === "effect") {
      const effect = node.effects![actionId]!;
      if (effect.transition !== undefined) {
        this.enter(effect.transition, tMs);
      }
      if (effect.duration_delta_ms !== undefined && this.status === "running") {
        const current = this.doc.states[this.currentState]!;
        if (current.terminal === undefined) {
          const elapsed = tMs - this.stateEnteredAt;
          this.effectiveDurationMs = Math.max(
            this.effectiveDurationMs + effect.duration_delta_ms,
            elapsed + 1,
          );
        }
      }
    }
  }

  frame(tMs: number): DisplayFrame {
    if (this.status === "running") {
      this.advanceTo(tMs);
    } else if (tMs < this.now) {
      throw new TimeReversal(`t=${tMs} is before now=${this.now}`);
    }
    const node = this.doc.states[this.currentState]!;
    const elapsed = this.now - this.stateEnteredAt;
    return {
      vitals: vitalsAt(node, elapsed, this.effectiveDurationMs),
      representation: node.representation,
      elapsedInStateMs: elapsed,
      history: this.history
        .filter((e) => e.kind === "action_performed")
        .map((e) => e.payload.action_id as string),
      status: this.status,
      outcome: this.outcome,
    };
  }
}

/** Serialize event records exactly like the server: one compact sorted-key
 * JSON object per line, trailing newline. */
export function dumpEventLines(records: EventRecord[]): string {
  if (!records.length) return "";
  return records.map((r) => stableStringify(r)).join("\n") + "\n";
}

export interface ScriptEntry {
  t_ms: number;
  action_id: string;
}

/** Drive a whole scripted session (used by tests and preview tooling). */
export function runScript(
  doc: ScenarioDoc,
  checksum: string,
  sessionId: string,
  learnerId: string,
  actions: ScriptEntry[],
  finalTMs: number,
): PlaySession {
  const session = new PlaySession(doc, checksum, sessionId, learnerId);
  for (const { t_ms, action_id } of actions) {
    if (session.status === "ended") break;
    try {
      session.performAction(t_ms, action_id);
    } catch (err) {
      if (err instanceof SessionEnded) break;
      throw err;
    }
  }
  if (session.status === "running") {
    session.advanceTo(Math.max(session.now, finalTMs));
  }
  return session;
}
