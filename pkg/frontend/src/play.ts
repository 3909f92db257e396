/** Live play controller: maps the wall clock onto the engine's virtual time,
 * surfaces frames for the UI (vitals bar, representation, action history),
 * and ships the finished event log to the service - unless running in
 * preview mode, in which case nothing is ever ingested. */

import type { ApiClient } from "./api.js";
import { PlaySession } from "./engine.js";
import type { DisplayFrame } from "./engine.js";
import type { EventRecord, ScenarioDoc } from "./types.js";

export interface PlayOptions {
  /** Tutor preview: play locally, never upload the log. */
  preview?: boolean;
  /** Upload retry schedule in ms (offline-tolerant by default). */
  retryDelaysMs?: number[];
}

export type UploadState = "pending" | "uploading" | "done" | "failed" | "skipped";

const sleep = (ms: number) => new Promise<void>((resolve) => setTimeout(resolve, ms));

export class PlayController {
  private readonly session: PlaySession;
  private startedWallMs: number | null = null;
  private readonly preview: boolean;
  private readonly retryDelaysMs: number[];
  uploadState: UploadState = "pending";
  uploadedCount = 0;

  constructor(
    private readonly client: ApiClient | null,
    doc: ScenarioDoc,
    checksum: string,
    sessionId: string,
    learnerId: string,
    options: PlayOptions = {},
  ) {
    this.preview = options.preview ?? false;
    this.retryDelaysMs = options.retryDelaysMs ?? [1000, 5000, 15000, 60000];
    this.session = new PlaySession(doc, checksum, sessionId, learnerId);
  }

  get sessionId(): string {
    return this.session.sessionId;
  }

  get isPreview(): boolean {
    return this.preview;
  }

  get finished(): boolean {
    return this.session.status === "ended";
  }

  get outcome() {
    return this.session.outcome;
  }

  get events(): EventRecord[] {
    return [...this.session.history];
  }

  start(wallMs: number): void {
    if (this.startedWallMs === null) this.startedWallMs = wallMs;
  }

  private virtual(wallMs: number): number {
    if (this.startedWallMs === null) throw new Error("start() first");
    return Math.max(0, Math.round(wallMs - this.startedWallMs));
  }

  /** Advance to the current wall instant and snapshot a frame. Call at
   * >= 2 Hz for a visibly evolving vitals bar. */
  tick(wallMs: number): DisplayFrame {
    return this.session.frame(this.virtual(wallMs));
  }

  /** Perform an action at the current wall instant. A deterioration at the
   * same instant wins; if the session just ended the action is dropped. */
  act(wallMs: number, actionId: string): DisplayFrame {
    if (this.session.status === "running") {
      try {
        this.session.performAction(this.virtual(wallMs), actionId);
      } catch {
        // session ended while the picker was open; the frame shows the end
      }
    }
    return this.session.frame(this.virtual(wallMs));
  }

  /** Upload the complete log once the session has ended. Retries on network
   * failure (queued offline play); idempotent server-side, so a duplicate
   * send after a lost response is harmless. */
  async uploadLog(): Promise<number> {
    if (!this.finished) throw new Error("session still running");
    if (this.preview || this.client === null) {
      this.uploadState = "skipped";
      return 0;
    }
    if (this.uploadState === "done") return this.uploadedCount;
    this.uploadState = "uploading";
    const attempts = this.retryDelaysMs.length + 1;
    for (let attempt = 0; attempt < attempts; attempt++) {
      try {
        this.uploadedCount = await this.client.ingestEvents(
          this.session.sessionId,
          this.session.history,
        );
        this.uploadState = "done";
        return this.uploadedCount;
      } catch (err) {
        if (attempt + 1 === attempts) {
          this.uploadState = "failed";
          throw err;
        }
        await sleep(this.retryDelaysMs[attempt]!);
      }
    }
    throw new Error("unreachable");
  }
}
