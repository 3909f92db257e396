/** App shell: hash routing between the editor, the learner client, and the
 * tutor pages, with server URL and bearer token kept in localStorage. */

import { ApiClient, ApiError } from "./api.js";
import { sha256Hex } from "./canonical.js";
import { renderCohortDashboard, renderLearnerDashboard } from "./dashboard.js";
import { clear, el } from "./dom.js";
import { EditorDocument } from "./editor.js";
import { PlayController } from "./play.js";
import type { CatalogEntry, ScenarioDoc } from "./types.js";
import { renderCatalog, renderEditor, renderPlayScreen } from "./views.js";

const SETTINGS_KEY = "rvse-settings";

interface Settings {
  baseUrl: string;
  token: string;
  name: string;
}

function loadSettings(): Settings {
  try {
    return JSON.parse(localStorage.getItem(SETTINGS_KEY) ?? "") as Settings;
  } catch {
    return { baseUrl: "http://127.0.0.1:8432", token: "", name: "" };
  }
}

export class App {
  settings = loadSettings();
  editor: EditorDocument | null = null;
  play: PlayController | null = null;
  playTimer: number | null = null;

  constructor(private readonly root: HTMLElement) {}

  private client(): ApiClient {
    return new ApiClient(this.settings.baseUrl, this.settings.token);
  }

  start(): void {
    window.addEventListener("hashchange", () => this.route());
    this.route();
  }

  private stopPlayLoop(): void {
    if (this.playTimer !== null) {
      clearInterval(this.playTimer);
      this.playTimer = null;
    }
  }

  route(): void {
    this.stopPlayLoop();
    const hash = location.hash || "#/editor";
    clear(this.root);
    this.root.append(this.renderNav(hash));
    const page = el("main", { class: "page" });
    this.root.append(page);
    if (hash.startsWith("#/play")) void this.renderLearnerPage(page);
    else if (hash.startsWith("#/tutor")) void this.renderTutorPage(page);
    else this.renderEditorPage(page);
  }

  private renderNav(active: string): HTMLElement {
    const link = (href: string, label: string) =>
      el("a", { href, class: active.startsWith(href) ? "active" : "" }, label);
    const urlInput = el("input", {
      value: this.settings.baseUrl,
      placeholder: "service URL",
      onchange: (ev) => this.saveSettings({ baseUrl: (ev.target as HTMLInputElement).value }),
    });
    const tokenInput = el("input", {
      value: this.settings.token,
      placeholder: "bearer token",
      type: "password",
      onchange: (ev) => this.saveSettings({ token: (ev.target as HTMLInputElement).value }),
    });
    return el("nav", {},
      link("#/editor", "Editor"), link("#/play", "Play"), link("#/tutor", "Tutor"),
      el("span", { class: "spacer" }), urlInput, tokenInput);
  }

  private saveSettings(patch: Partial<Settings>): void {
    this.settings = { ...this.settings, ...patch };
    localStorage.setItem(SETTINGS_KEY, JSON.stringify(this.settings));
  }

  private notify(message: string): void {
    const note = el("div", { class: "toast" }, message);
    this.root.append(note);
    setTimeout(() => note.remove(), 4000);
  }

  // -- editor page ---------------------------------------------------------

  private renderEditorPage(page: Element): void {
    if (this.editor === null) {
      this.editor = EditorDocument.blank("new-scenario", this.settings.name || "author");
    }
    const redraw = () =>
      renderEditor(page, this.editor!, {
        onSelectState: (stateId) => {
          this.editor!.selectState(stateId);
          redraw();
        },
        onDocumentEdited: redraw,
        onUpload: () => void this.uploadScenario(),
      });
    redraw();
  }

  private async uploadScenario(): Promise<void> {
    if (this.editor === null || !this.editor.canUpload) return;
    try {
      const receipt = await this.client().uploadScenario(this.editor.toDocumentText());
      this.editor.markSaved();
      this.notify(`uploaded ${receipt.id} v${receipt.version}`);
      this.route();
    } catch (err) {
      if (err instanceof ApiError && err.report !== undefined) {
        this.notify(`server rejected the scenario: ${err.detail}`);
      } else {
        this.notify(String(err));
      }
    }
  }

  // -- learner page ----------------------------------------------------------

  private async renderLearnerPage(page: Element): Promise<void> {
    try {
      const entries = await this.client().catalog();
      renderCatalog(page, entries, {
        onPreview: (entry) => void this.startPlay(page, entry, { preview: false }),
        onCohortLookup: () => undefined,
      });
      const mine = el("button", {
        class: "my-dashboard",
        onclick: async () => {
          const dash = await this.client().learnerDashboard(this.settings.name);
          const slot = page.querySelector(".dashboard-slot");
          if (slot) {
            clear(slot);
            slot.append(renderLearnerDashboard(dash));
          }
        },
      }, "my dashboard");
      page.append(mine);
    } catch (err) {
      this.renderAuthProblem(page, err);
    }
  }

  private async startPlay(
    page: Element,
    entry: CatalogEntry,
    options: { preview: boolean },
  ): Promise<void> {
    const { text, checksum } = await this.client().fetchScenario(entry.id, entry.latest_version);
    const doc = JSON.parse(text) as ScenarioDoc;
    const digest = checksum || (await sha256Hex(text));
    const sessionId = `${doc.id}-${Date.now().toString(36)}`;
    const learnerId = this.settings.name || "anonymous";
    this.play = new PlayController(
      options.preview ? null : this.client(),
      doc, digest, sessionId, learnerId, { preview: options.preview });
    this.play.start(performance.now());

    let uploadNote = "";
    const redraw = () => {
      const controller = this.play;
      if (controller === null) return;
      const frame = controller.tick(performance.now());
      renderPlayScreen(page, doc, frame, {
        onAction: (actionId) => {
          controller.act(performance.now(), actionId);
          redraw();
        },
      }, { preview: options.preview, uploadNote });
      if (controller.finished) {
        this.stopPlayLoop();
        void controller.uploadLog().then((accepted) => {
          uploadNote = controller.isPreview
            ? "preview: nothing recorded"
            : `log uploaded (${accepted} events)`;
          redraw();
        }).catch(() => {
          uploadNote = "upload queued: will retry";
          redraw();
        });
      }
    };
    this.stopPlayLoop();
    // 4 Hz keeps the vitals bar visibly evolving (contract: >= 2 Hz)
    this.playTimer = setInterval(redraw, 250) as unknown as number;
    redraw();
  }

  // -- tutor page -----------------------------------------------------------

  private async renderTutorPage(page: Element): Promise<void> {
    try {
      const entries = await this.client().catalog();
      renderCatalog(page, entries, {
        onPreview: (entry) => void this.startPlay(page, entry, { preview: true }),
        onCohortLookup: async (cohortId) => {
          const slot = page.querySelector(".dashboard-slot");
          if (!slot || !cohortId) return;
          try {
            const response = await this.client().cohortDashboards(cohortId);
            clear(slot);
            for (const dash of response.dashboards) {
              slot.append(renderCohortDashboard(dash));
            }
          } catch (err) {
            clear(slot);
            slot.append(el("p", { class: "error" }, String(err)));
          }
        },
      });
    } catch (err) {
      this.renderAuthProblem(page, err);
    }
  }

  private renderAuthProblem(page: Element, err: unknown): void {
    clear(page);
    const detail = err instanceof ApiError && err.status === 401
      ? "This token is not authorized for this page. Paste a valid token above."
      : String(err);
    page.append(el("div", { class: "login-prompt" },
      el("h2", {}, "Cannot reach the repository"), el("p", {}, detail)));
  }
}

if (typeof document !== "undefined" && document.getElementById("app")) {
  new App(document.getElementById("app")!).start();
}
