/** Client-side pre-validation, mirroring the server's deployability rules
 * E1-E7 plus the local structural checks an editor can break. The server
 * remains authoritative; this exists so findings appear inline while
 * authoring and uploads are gated before any network round-trip. */

import type { Finding, ScenarioDoc, StateNode } from "./types.js";

function transitionTargets(node: StateNode): [string, string][] {
  const out: [string, string][] = [];
  if (node.on_timeout !== undefined) out.push(["on_timeout", node.on_timeout]);
  if (node.on_goal !== undefined) out.push(["on_goal", node.on_goal]);
  for (const [actionId, effect] of Object.entries(node.effects ?? {})) {
    if (effect.transition !== undefined) out.push([`effects/${actionId}`, effect.transition]);
  }
  return out;
}

export function validateDocument(doc: ScenarioDoc): Finding[] {
  const findings: Finding[] = [];
  const add = (code: string, subjectId: string | null, message: string) =>
    findings.push({ code, subjectId, message });

  // local structure the editor could break (server would reject at parse)
  if (!doc.meta.title) add("SCHEMA", null, "title must be nonempty");
  if (doc.meta.learning_objectives.length === 0) {
    add("SCHEMA", null, "learning objectives must be nonempty");
  }
  for (const [stateId, node] of Object.entries(doc.states)) {
    if (Object.keys(node.vitals).length === 0) {
      add("SCHEMA", stateId, "at least one vital sign is required");
    }
    if (node.drift_to !== undefined) {
      const a = Object.keys(node.vitals).sort().join(",");
      const b = Object.keys(node.drift_to).sort().join(",");
      if (a !== b) add("SCHEMA", stateId, "drift keys must match vitals exactly");
    }
    if (!node.representation.content) add("SCHEMA", stateId, "representation is empty");
    const terminal = node.terminal !== undefined;
    if (terminal && node.duration_ms !== undefined) {
      add("SCHEMA", stateId, "terminal states carry no duration");
    }
    if (!terminal && (node.duration_ms === undefined || node.duration_ms <= 0)) {
      add("SCHEMA", stateId, "non-terminal states need a positive duration");
    }
    if ((node.goal === undefined) !== (node.on_goal === undefined)) {
      add("SCHEMA", stateId, "goal and on_goal must be declared together");
    }
    if (node.goal !== undefined && node.goal.action_ids.length === 0) {
      add("SCHEMA", stateId, "goal needs at least one action");
    }
    for (const actionId of Object.keys(node.effects ?? {})) {
      if (node.goal?.action_ids.includes(actionId)) {
        add("SCHEMA", stateId, `effect action '${actionId}' is also a goal action`);
      }
    }
  }

  // E1: dangling transition targets (including the initial pointer)
  const initialOk = doc.initial_state in doc.states;
  if (!initialOk) {
    add("E1", null, `initial_state references unknown state '${doc.initial_state}'`);
  }
  for (const [stateId, node] of Object.entries(doc.states)) {
    for (const [where, target] of transitionTargets(node)) {
      if (!(target in doc.states)) {
        add("E1", stateId, `${where} references unknown state '${target}'`);
      }
    }
  }

  // E2: actions referenced but missing from the catalog
  for (const [stateId, node] of Object.entries(doc.states)) {
    const referenced = [...(node.goal?.action_ids ?? []), ...Object.keys(node.effects ?? {})];
    for (const actionId of referenced) {
      if (!(actionId in doc.actions)) {
        add("E2", stateId, `action '${actionId}' is not in the catalog`);
      }
    }
  }

  // E3: unreachable states
  if (initialOk) {
    const reached = new Set([doc.initial_state]);
    const frontier = [doc.initial_state];
    while (frontier.length) {
      const node = doc.states[frontier.pop()!]!;
      for (const [, target] of transitionTargets(node)) {
        if (target in doc.states && !reached.has(target)) {
          reached.add(target);
          frontier.push(target);
        }
      }
    }
    for (const stateId of Object.keys(doc.states)) {
      if (!reached.has(stateId)) add("E3", stateId, "state is unreachable from the initial state");
    }
  }

  // E4/E5/E7: local transition rules
  for (const [stateId, node] of Object.entries(doc.states)) {
    if (node.terminal !== undefined) {
      if (node.goal || node.on_goal || node.on_timeout || Object.keys(node.effects ?? {}).length) {
        add("E7", stateId, "terminal state must not carry transitions");
      }
    } else if (node.on_timeout === undefined) {
      add("E4", stateId, "non-terminal state has no on_timeout");
    } else if (node.on_timeout === stateId) {
      add("E5", stateId, "timeout must not loop back to the same state");
    }
  }

  // E6: dead ends (no terminal reachable)
  const predecessors = new Map<string, Set<string>>(
    Object.keys(doc.states).map((sid) => [sid, new Set()]),
  );
  for (const [stateId, node] of Object.entries(doc.states)) {
    for (const [, target] of transitionTargets(node)) {
      predecessors.get(target)?.add(stateId);
    }
  }
  const canFinish = new Set(
    Object.entries(doc.states).filter(([, n]) => n.terminal !== undefined).map(([sid]) => sid),
  );
  const frontier = [...canFinish];
  while (frontier.length) {
    for (const pred of predecessors.get(frontier.pop()!) ?? []) {
      if (!canFinish.has(pred)) {
        canFinish.add(pred);
        frontier.push(pred);
      }
    }
  }
  for (const [stateId, node] of Object.entries(doc.states)) {
    if (node.terminal === undefined && !canFinish.has(stateId)) {
      add("E6", stateId, "no terminal state is reachable from here (dead end)");
    }
  }

  return findings;
}

export function errorFindings(findings: Finding[]): Finding[] {
  return findings.filter((f) => !f.code.startsWith("W"));
}

export function findingsFor(findings: Finding[], subjectId: string): Finding[] {
  return findings.filter((f) => f.subjectId === subjectId);
}
