/** Typed fetch client for the repository service (`/api/v1`). */

import type {
  CatalogEntry,
  CohortDashboardsResponse,
  EventRecord,
  LearnerDashboardDoc,
  UploadReceipt,
} from "./types.js";

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly code: string,
    readonly detail: string,
    readonly report?: unknown,
  ) {
    super(`${status} ${code}: ${detail}`);
  }
}

interface ErrorBody {
  error?: string;
  detail?: string;
  report?: unknown;
}

export class ApiClient {
  constructor(
    readonly baseUrl: string,
    readonly token: string,
  ) {}

  private async call(
    method: string,
    path: string,
    body?: BodyInit,
    contentType = "application/json",
  ): Promise<Response> {
    const headers: Record<string, string> = { Authorization: `Bearer ${this.token}` };
    if (body !== undefined) headers["Content-Type"] = contentType;
    const response = await fetch(this.baseUrl.replace(/\/$/, "") + path, {
      method,
      headers,
      body,
    });
    if (!response.ok) {
      let parsed: ErrorBody = {};
      try {
        parsed = (await response.json()) as ErrorBody;
      } catch {
        // non-JSON error body; fall through with defaults
      }
      throw new ApiError(
        response.status,
        parsed.error ?? "error",
        parsed.detail ?? response.statusText,
        parsed.report,
      );
    }
    return response;
  }

  async uploadScenario(documentText: string): Promise<UploadReceipt> {
    const response = await this.call("POST", "/api/v1/scenarios", documentText);
    return (await response.json()) as UploadReceipt;
  }

  async catalog(): Promise<CatalogEntry[]> {
    const response = await this.call("GET", "/api/v1/catalog");
    return (await response.json()) as CatalogEntry[];
  }

  /** Returns the canonical document text plus the checksum advertised by the
   * server (ETag / X-Checksum). */
  async fetchScenario(id: string, version: number): Promise<{ text: string; checksum: string }> {
    const response = await this.call("GET", `/api/v1/scenarios/${id}/${version}`);
    const text = await response.text();
    return { text, checksum: response.headers.get("X-Checksum") ?? "" };
  }

  async ingestEvents(sessionId: string, records: EventRecord[]): Promise<number> {
    const response = await this.call(
      "POST",
      `/api/v1/sessions/${sessionId}/events`,
      JSON.stringify(records),
    );
    const body = (await response.json()) as { accepted: number };
    return body.accepted;
  }

  async learnerDashboard(learnerId: string): Promise<LearnerDashboardDoc> {
    const response = await this.call("GET", `/api/v1/dashboards/learner/${learnerId}`);
    return (await response.json()) as LearnerDashboardDoc;
  }

  async cohortDashboards(cohortId: string): Promise<CohortDashboardsResponse> {
    const response = await this.call("GET", `/api/v1/dashboards/cohort/${cohortId}`);
    return (await response.json()) as CohortDashboardsResponse;
  }

  async alarms(): Promise<unknown[]> {
    const response = await this.call("GET", "/api/v1/alarms");
    return (await response.json()) as unknown[];
  }

  async mediaGet(scenarioId: string, relPath: string): Promise<Blob> {
    const response = await this.call("GET", `/api/v1/media/${scenarioId}/${relPath}`);
    return response.blob();
  }

  async mediaPut(scenarioId: string, relPath: string, data: Blob | Uint8Array): Promise<void> {
    const body = data instanceof Blob ? data : new Blob([data.slice().buffer]);
    await this.call("PUT", `/api/v1/media/${scenarioId}/${relPath}`, body,
      "application/octet-stream");
  }
}
