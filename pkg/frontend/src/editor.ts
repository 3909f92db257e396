/** Editor document state: an in-progress scenario plus UI bookkeeping
 * (selection, unsaved-changes flag, live validation report). Uploading is
 * enabled only while the live report carries zero errors. */

import { stableStringify } from "./canonical.js";
import type {
  ActionDef,
  Finding,
  ScenarioDoc,
  ScenarioMeta,
  StateNode,
} from "./types.js";
import { DEFAULT_SESSION_LIMIT_MS } from "./types.js";
import { errorFindings, validateDocument } from "./validate.js";

function nowStamp(): string {
  return new Date().toISOString().replace(/\.\d{3}Z$/, "Z");
}

/** Normalize a working document into the exact wire shape: explicit
 * session limit and goal mode, sorted goal actions, no empty effect maps. */
export function normalizeDocument(doc: ScenarioDoc): ScenarioDoc {
  const states: Record<string, StateNode> = {};
  for (const [stateId, node] of Object.entries(doc.states)) {
    const copy: StateNode = {
      vitals: { ...node.vitals },
      representation: { ...node.representation },
    };
    if (node.drift_to !== undefined) copy.drift_to = { ...node.drift_to };
    if (node.goal !== undefined) {
      copy.goal = { mode: node.goal.mode ?? "any", action_ids: [...node.goal.action_ids].sort() };
    }
    if (node.duration_ms !== undefined) copy.duration_ms = node.duration_ms;
    if (node.on_timeout !== undefined) copy.on_timeout = node.on_timeout;
    if (node.on_goal !== undefined) copy.on_goal = node.on_goal;
    if (node.effects !== undefined && Object.keys(node.effects).length) {
      copy.effects = Object.fromEntries(
        Object.entries(node.effects).map(([k, v]) => [k, { ...v }]),
      );
    }
    if (node.terminal !== undefined) copy.terminal = node.terminal;
    states[stateId] = copy;
  }
  return {
    id: doc.id,
    version: doc.version,
    meta: {
      title: doc.meta.title,
      author: doc.meta.author,
      tags: [...doc.meta.tags],
      learning_objectives: [...doc.meta.learning_objectives],
      created_at: doc.meta.created_at,
    },
    initial_state: doc.initial_state,
    session_limit_ms: doc.session_limit_ms ?? DEFAULT_SESSION_LIMIT_MS,
    states,
    actions: Object.fromEntries(
      Object.entries(doc.actions).map(([k, v]) => [k, { ...v }]),
    ),
  };
}

export class EditorDocument {
  doc: ScenarioDoc;
  selectedStateId: string | null;
  unsavedChanges = false;
  report: Finding[] = [];

  constructor(doc: ScenarioDoc) {
    this.doc = normalizeDocument(doc);
    this.selectedStateId = this.doc.initial_state in this.doc.states
      ? this.doc.initial_state
      : null;
    this.revalidate();
  }

  static blank(id: string, author: string): EditorDocument {
    const doc: ScenarioDoc = {
      id,
      version: 1,
      meta: {
        title: "Untitled scenario",
        author,
        tags: [],
        learning_objectives: ["Describe the intended learning impact"],
        created_at: nowStamp(),
      },
      initial_state: "start",
      session_limit_ms: DEFAULT_SESSION_LIMIT_MS,
      states: {
        start: {
          vitals: { hr: 80 },
          representation: { kind: "text", content: "The patient presents." },
          duration_ms: 60000,
          on_timeout: "worse",
        },
        worse: {
          vitals: { hr: 0 },
          representation: { kind: "text", content: "The patient deteriorates." },
          terminal: "deceased",
        },
      },
      actions: {},
    };
    return new EditorDocument(doc);
  }

  static fromDocumentText(text: string): EditorDocument {
    return new EditorDocument(JSON.parse(text) as ScenarioDoc);
  }

  // -- queries --------------------------------------------------------------

  get canUpload(): boolean {
    return errorFindings(this.report).length === 0;
  }

  findingsFor(subjectId: string): Finding[] {
    return this.report.filter((f) => f.subjectId === subjectId);
  }

  toDocument(): ScenarioDoc {
    return normalizeDocument(this.doc);
  }

  toDocumentText(): string {
    return stableStringify(this.toDocument());
  }

  // -- mutations (each marks dirty and revalidates) ---------------------------

  private touch(): void {
    this.unsavedChanges = true;
    this.revalidate();
  }

  revalidate(): Finding[] {
    this.report = validateDocument(normalizeDocument(this.doc));
    return this.report;
  }

  markSaved(): void {
    this.unsavedChanges = false;
  }

  selectState(stateId: string | null): void {
    this.selectedStateId = stateId !== null && stateId in this.doc.states ? stateId : null;
  }

  setMeta(patch: Partial<ScenarioMeta>): void {
    this.doc.meta = { ...this.doc.meta, ...patch };
    this.touch();
  }

  setSessionLimit(ms: number): void {
    this.doc.session_limit_ms = ms;
    this.touch();
  }

  setInitialState(stateId: string): void {
    this.doc.initial_state = stateId;
    this.touch();
  }

  addState(stateId: string, node: StateNode): void {
    this.doc.states[stateId] = node;
    this.touch();
  }

  updateState(stateId: string, patch: Partial<StateNode>): void {
    const existing = this.doc.states[stateId];
    if (!existing) return;
    const merged = { ...existing, ...patch };
    // explicit undefined in a patch clears the field
    for (const key of Object.keys(patch) as (keyof StateNode)[]) {
      if (patch[key] === undefined) delete merged[key];
    }
    this.doc.states[stateId] = merged;
    this.touch();
  }

  removeState(stateId: string): void {
    delete this.doc.states[stateId];
    if (this.selectedStateId === stateId) this.selectedStateId = null;
    this.touch();
  }

  addAction(actionId: string, def: ActionDef): void {
    this.doc.actions[actionId] = def;
    this.touch();
  }

  updateAction(actionId: string, patch: Partial<ActionDef>): void {
    const existing = this.doc.actions[actionId];
    if (!existing) return;
    this.doc.actions[actionId] = { ...existing, ...patch };
    this.touch();
  }

  removeAction(actionId: string): void {
    delete this.doc.actions[actionId];
    this.touch();
  }
}
