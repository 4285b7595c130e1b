// Thin client over the HTTP API. At most one query runs at a time: a newer
// submission aborts the one in flight.

import type { HealthResponse, QueryRequest, QueryResponse } from "./types.js";

export class ApiRequestError extends Error {
  readonly code: string;

  constructor(code: string, message: string) {
    super(message);
    this.code = code;
  }
}

async function readError(response: Response): Promise<ApiRequestError> {
  try {
    const body = await response.json();
    if (body && typeof body.message === "string") {
      return new ApiRequestError(body.code ?? "error", body.message);
    }
  } catch {
    // fall through to the generic error
  }
  return new ApiRequestError("http_error", `request failed with ${response.status}`);
}

export class SearchClient {
  private readonly base: string;
  private inFlight: AbortController | null = null;

  constructor(base = "") {
    this.base = base.replace(/\/$/, "");
  }

  async health(): Promise<HealthResponse> {
    const response = await fetch(`${this.base}/health`);
    if (!response.ok) throw await readError(response);
    return response.json();
  }

  /** POST /query/partial; cancels any query still in flight. */
  async queryPartial(request: QueryRequest): Promise<QueryResponse> {
    this.inFlight?.abort();
    const controller = new AbortController();
    this.inFlight = controller;
    try {
      const response = await fetch(`${this.base}/query/partial`, {
        method: "POST",
        headers: { "Content-Type": "application/json" },
        body: JSON.stringify(request),
        signal: controller.signal,
      });
      if (!response.ok) throw await readError(response);
      return await response.json();
    } finally {
      if (this.inFlight === controller) this.inFlight = null;
    }
  }
}
