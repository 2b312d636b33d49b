/** Thin typed client for the /api/v1 endpoints; fetch is injectable for tests. */

import type {
  ExplanationDocument,
  HistorySummary,
  SnapshotJson,
  WhatIfRequest,
  WhatIfResponse,
} from "./types.js";

export class ApiError extends Error {
  constructor(
    public status: number,
    public body: unknown,
    message?: string,
  ) {
    super(message ?? `API error ${status}`);
  }
}

type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ApiClient {
  constructor(
    private baseUrl: string = "",
    private fetchImpl: FetchLike = (url, init) => fetch(url, init),
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const resp = await this.fetchImpl(this.baseUrl + path, init);
    const body = await resp.json().catch(() => null);
    if (!resp.ok) {
      throw new ApiError(resp.status, body);
    }
    return body as T;
  }

  private post<T>(path: string, payload: unknown): Promise<T> {
    return this.request<T>(path, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(payload),
    });
  }

  health(): Promise<{ history_loaded: boolean; intent_configured: boolean }> {
    return this.request("/api/v1/health");
  }

  explain(snapshot: SnapshotJson): Promise<ExplanationDocument> {
    return this.post("/api/v1/explain", snapshot);
  }

  whatIf(request: WhatIfRequest): Promise<WhatIfResponse> {
    return this.post("/api/v1/whatif", request);
  }

  postLive(snapshot: SnapshotJson): Promise<{ ok: boolean }> {
    return this.post("/api/v1/live", snapshot);
  }

  summary(): Promise<HistorySummary> {
    return this.request("/api/v1/history/summary");
  }
}
