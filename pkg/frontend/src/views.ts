/** Screen rendering: the three-panel editor, the live play screen, and the
 * tutor's catalog/dashboard pages. State lives in the controllers
 * (EditorDocument, PlayController); these functions just draw it. */

import { clear, el, svgEl } from "./dom.js";
import type { EditorDocument } from "./editor.js";
import type { DisplayFrame } from "./engine.js";
import { layoutGraph } from "./graph.js";
import type { ActionCategory, ActionDef, CatalogEntry, ScenarioDoc } from "./types.js";

const CATEGORIES: ActionCategory[] = ["diagnostic", "therapeutic", "other"];

export interface EditorHandlers {
  onSelectState(stateId: string): void;
  onDocumentEdited(): void;
  onUpload(): void;
}

// ---------------------------------------------------------------------------
// Editor: left graph, center state form, right action catalog
// ---------------------------------------------------------------------------

export function renderEditor(
  root: Element,
  editor: EditorDocument,
  handlers: EditorHandlers,
): void {
  clear(root);
  root.append(
    el("div", { class: "editor three-panel" },
      renderGraphPanel(editor, handlers),
      renderStatePanel(editor, handlers),
      renderActionsPanel(editor, handlers),
    ),
    renderEditorFooter(editor, handlers),
  );
}

function renderGraphPanel(editor: EditorDocument, handlers: EditorHandlers): HTMLElement {
  const layout = layoutGraph(editor.doc);
  const svg = svgEl("svg", {
    class: "graph",
    viewBox: `0 0 ${layout.width} ${layout.height}`,
    width: String(layout.width),
    height: String(layout.height),
  });
  const positions = new Map(layout.nodes.map((n) => [n.id, n]));
  for (const edge of layout.edges) {
    const from = positions.get(edge.from)!;
    const to = positions.get(edge.to)!;
    svg.append(svgEl("line", {
      class: `edge edge-${edge.kind}`,
      x1: String(from.x + 55), y1: String(from.y + 20),
      x2: String(to.x), y2: String(to.y + 20),
    }));
  }
  for (const node of layout.nodes) {
    const findings = editor.findingsFor(node.id);
    const group = svgEl("g", {
      class: [
        "node",
        node.terminal ? "node-terminal" : "",
        node.id === editor.selectedStateId ? "node-selected" : "",
        findings.length ? "node-finding" : "",
      ].join(" ").trim(),
      transform: `translate(${node.x},${node.y})`,
      "data-state": node.id,
    });
    group.append(
      svgEl("rect", { width: "110", height: "40", rx: "8" }),
      svgEl("text", { x: "55", y: "20" }, document.createTextNode(node.id)),
    );
    if (findings.length) {
      const marker = svgEl("title", {},
        document.createTextNode(findings.map((f) => `${f.code}: ${f.message}`).join("\n")));
      group.append(marker, svgEl("circle", { class: "finding-dot", cx: "104", cy: "6", r: "6" }));
    }
    group.addEventListener("click", () => handlers.onSelectState(node.id));
    svg.append(group);
  }
  return el("div", { class: "panel panel-graph" },
    el("h2", {}, "Deterioration graph"),
    el("p", { class: "hint" }, "solid: timeout edge - dashed: goal edge - dotted: effect"),
    svg as unknown as HTMLElement,
  );
}

function renderStatePanel(editor: EditorDocument, handlers: EditorHandlers): HTMLElement {
  const stateId = editor.selectedStateId;
  const panel = el("div", { class: "panel panel-state" }, el("h2", {}, "State"));
  if (stateId === null || !(stateId in editor.doc.states)) {
    panel.append(el("p", {}, "Select a state in the graph."));
    return panel;
  }
  const node = editor.doc.states[stateId]!;
  const stateIds = Object.keys(editor.doc.states).sort();
  const actionIds = Object.keys(editor.doc.actions).sort();

  const vitalsArea = el("textarea", {
    class: "vitals-input",
    rows: "3",
    onchange: (ev) => {
      try {
        const parsed = JSON.parse((ev.target as HTMLTextAreaElement).value) as
          Record<string, number>;
        editor.updateState(stateId, { vitals: parsed });
        handlers.onDocumentEdited();
      } catch {
        // leave invalid JSON in place; findings stay as they are
      }
    },
  }, JSON.stringify(node.vitals));

  const driftArea = el("textarea", {
    class: "drift-input",
    rows: "3",
    onchange: (ev) => {
      const text = (ev.target as HTMLTextAreaElement).value.trim();
      try {
        editor.updateState(stateId, {
          drift_to: text ? (JSON.parse(text) as Record<string, number>) : undefined,
        });
        handlers.onDocumentEdited();
      } catch {
        // ignore malformed JSON while typing
      }
    },
  }, node.drift_to ? JSON.stringify(node.drift_to) : "");

  const representationInput = el("input", {
    value: node.representation.content,
    onchange: (ev) => {
      editor.updateState(stateId, {
        representation: {
          ...node.representation,
          content: (ev.target as HTMLInputElement).value,
        },
      });
      handlers.onDocumentEdited();
    },
  });

  const kindSelect = el("select", {
    onchange: (ev) => {
      editor.updateState(stateId, {
        representation: {
          ...node.representation,
          kind: (ev.target as HTMLSelectElement).value as "text" | "photo" | "video",
        },
      });
      handlers.onDocumentEdited();
    },
  }, ...["text", "photo", "video"].map((k) =>
    el("option", { value: k, selected: k === node.representation.kind }, k)));

  const durationInput = el("input", {
    type: "number",
    value: node.duration_ms === undefined ? "" : String(node.duration_ms),
    onchange: (ev) => {
      const raw = (ev.target as HTMLInputElement).value;
      editor.updateState(stateId, { duration_ms: raw ? Number(raw) : undefined });
      handlers.onDocumentEdited();
    },
  });

  const targetSelect = (
    label: string,
    current: string | undefined,
    apply: (value: string | undefined) => void,
  ) =>
    el("label", {}, label,
      el("select", {
        onchange: (ev) => {
          const value = (ev.target as HTMLSelectElement).value;
          apply(value === "" ? undefined : value);
          handlers.onDocumentEdited();
        },
      },
        el("option", { value: "", selected: current === undefined }, "(none)"),
        ...stateIds.map((sid) =>
          el("option", { value: sid, selected: sid === current }, sid))));

  const goalBoxes = actionIds.map((actionId) =>
    el("label", { class: "goal-check" },
      el("input", {
        type: "checkbox",
        checked: node.goal?.action_ids.includes(actionId) ?? false,
        onchange: (ev) => {
          const checked = (ev.target as HTMLInputElement).checked;
          const current = new Set(node.goal?.action_ids ?? []);
          if (checked) current.add(actionId);
          else current.delete(actionId);
          const ids = [...current].sort();
          editor.updateState(stateId, ids.length
            ? { goal: { mode: node.goal?.mode ?? "any", action_ids: ids } }
            : { goal: undefined, on_goal: undefined });
          handlers.onDocumentEdited();
        },
      }),
      actionId));

  const findings = editor.findingsFor(stateId);
  panel.append(
    el("h3", {}, stateId),
    el("label", {}, "vitals (JSON)", vitalsArea),
    el("label", {}, "drift to (JSON, optional)", driftArea),
    el("label", {}, "representation ", kindSelect, representationInput),
    el("label", {}, "duration (ms)", durationInput),
    el("fieldset", { class: "goal-actions" },
      el("legend", {}, "goal actions"), ...goalBoxes),
    targetSelect("on goal -> ", node.on_goal, (v) => editor.updateState(stateId, { on_goal: v })),
    targetSelect("on timeout -> ", node.on_timeout,
      (v) => editor.updateState(stateId, { on_timeout: v })),
    el("div", { class: "findings" },
      ...findings.map((f) =>
        el("p", { class: "finding", "data-code": f.code }, `${f.code}: ${f.message}`))),
  );
  return panel;
}

function renderActionsPanel(editor: EditorDocument, handlers: EditorHandlers): HTMLElement {
  const rows = Object.entries(editor.doc.actions).sort().map(([actionId, def]) =>
    el("li", { class: "action-row", "data-action": actionId },
      el("span", { class: "action-label" }, `${def.label} `),
      el("code", {}, actionId),
      el("em", {}, ` ${def.category}`),
      el("button", {
        class: "remove-action",
        onclick: () => {
          editor.removeAction(actionId);
          handlers.onDocumentEdited();
        },
      }, "remove")));

  const idInput = el("input", { placeholder: "action-id" });
  const labelInput = el("input", { placeholder: "Display label" });
  const categorySelect = el("select", {},
    ...CATEGORIES.map((c) => el("option", { value: c }, c)));

  const addButton = el("button", {
    class: "add-action",
    onclick: () => {
      const actionId = idInput.value.trim();
      if (!actionId) return;
      const def: ActionDef = {
        label: labelInput.value.trim() || actionId,
        category: categorySelect.value as ActionCategory,
      };
      editor.addAction(actionId, def);
      idInput.value = "";
      labelInput.value = "";
      handlers.onDocumentEdited();
    },
  }, "add action");

  return el("div", { class: "panel panel-actions" },
    el("h2", {}, "Medical actions"),
    el("ul", { class: "action-list" }, ...rows),
    el("div", { class: "action-add" }, idInput, labelInput, categorySelect, addButton),
  );
}

function renderEditorFooter(editor: EditorDocument, handlers: EditorHandlers): HTMLElement {
  const errors = editor.report.filter((f) => !f.code.startsWith("W"));
  return el("footer", { class: "editor-footer" },
    el("span", { class: "dirty" }, editor.unsavedChanges ? "unsaved changes" : "saved"),
    el("span", { class: "finding-count" },
      errors.length ? `${errors.length} finding(s) block upload` : "no blocking findings"),
    el("button", {
      class: "upload",
      disabled: !editor.canUpload,
      onclick: () => handlers.onUpload(),
    }, "Upload to repository"),
  );
}

// ---------------------------------------------------------------------------
// Play screen: vitals top bar, representation center, history bottom
// ---------------------------------------------------------------------------

export interface PlayHandlers {
  onAction(actionId: string): void;
}

export function renderPlayScreen(
  root: Element,
  doc: ScenarioDoc,
  frame: DisplayFrame,
  handlers: PlayHandlers,
  options: { preview?: boolean; pickerOpen?: boolean; uploadNote?: string } = {},
): void {
  clear(root);
  const vitalsBar = el("div", { class: "vitals-bar" },
    ...Object.entries(frame.vitals).sort().map(([name, value]) =>
      el("span", { class: "vital", "data-sign": name },
        `${name} ${Number.isInteger(value) ? value : value.toFixed(1)}`)));

  const center = el("div", {
    class: "representation",
    onclick: () => {
      const picker = root.querySelector(".action-picker");
      if (picker) picker.classList.toggle("open");
    },
  });
  const rep = frame.representation;
  if (rep.kind === "text") {
    center.append(el("p", {}, rep.content));
  } else if (rep.kind === "photo") {
    center.append(el("img", { src: `media/${doc.id}/${rep.content}`, alt: rep.content }));
  } else {
    center.append(el("video", {
      src: `media/${doc.id}/${rep.content}`, autoplay: true, loop: true, muted: true,
    }));
  }

  const picker = el("div", { class: `action-picker${options.pickerOpen ? " open" : ""}` },
    el("h3", {}, "Select a medical action"),
    ...Object.entries(doc.actions).sort().map(([actionId, def]) =>
      el("button", {
        class: "pick-action",
        "data-action": actionId,
        onclick: (ev) => {
          ev.stopPropagation();
          handlers.onAction(actionId);
        },
      }, def.label)));

  const history = el("ol", { class: "action-history" },
    ...frame.history.map((actionId) =>
      el("li", {}, doc.actions[actionId]?.label ?? actionId)));

  const status = frame.status === "ended"
    ? el("div", { class: `end-screen outcome-${frame.outcome}` },
        el("h2", {}, `Session over: ${frame.outcome}`),
        options.uploadNote ? el("p", { class: "upload-note" }, options.uploadNote) : null)
    : null;

  root.append(
    options.preview ? el("p", { class: "preview-banner" }, "PREVIEW - nothing is recorded") : "",
    vitalsBar, center, picker, history, status ?? "",
  );
}

// ---------------------------------------------------------------------------
// Tutor: catalog with preview
// ---------------------------------------------------------------------------

export interface TutorHandlers {
  onPreview(entry: CatalogEntry): void;
  onCohortLookup(cohortId: string): void;
}

export function renderCatalog(
  root: Element,
  entries: CatalogEntry[],
  handlers: TutorHandlers,
): void {
  clear(root);
  const input = el("input", { placeholder: "cohort id", class: "cohort-input" });
  root.append(
    el("h2", {}, "Available activities"),
    el("table", { class: "catalog" },
      el("thead", {}, el("tr", {},
        el("th", {}, "id"), el("th", {}, "version"), el("th", {}, "title"),
        el("th", {}, "tags"), el("th", {}, ""))),
      el("tbody", {}, ...entries.map((entry) =>
        el("tr", { "data-scenario": entry.id },
          el("td", {}, entry.id),
          el("td", {}, String(entry.latest_version)),
          el("td", {}, entry.title),
          el("td", {}, entry.tags.join(", ")),
          el("td", {}, el("button", {
            class: "preview",
            onclick: () => handlers.onPreview(entry),
          }, "preview")))))),
    el("div", { class: "cohort-lookup" },
      input,
      el("button", {
        class: "lookup",
        onclick: () => handlers.onCohortLookup(input.value.trim()),
      }, "show cohort dashboard")),
    el("div", { class: "dashboard-slot" }),
  );
}
