/** Thin typed client for the scenario service; every number shown in the
 * console comes from these payloads, never from client-side recomputation. */

import type {
  CommitResponse,
  EdgeBeliefPayload,
  EntityBeliefPayload,
  GraphPayload,
  IndicatorSeriesPayload,
  Meta,
  StreamRecord,
  WhatIfRequest,
  WhatIfResponse,
} from "./types.js";

export class ApiError extends Error {
  constructor(
    readonly status: number,
    message: string,
  ) {
    super(message);
    this.name = "ApiError";
  }

  get isConflict(): boolean {
    return this.status === 409;
  }
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiClient {
  constructor(
    private readonly base: string = "",
    private readonly fetchFn: FetchLike = (input, init) => fetch(input, init),
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await this.fetchFn(this.base + path, init);
    if (!response.ok) {
      let detail = response.statusText;
      try {
        const body = await response.json();
        if (body && typeof body.detail === "string") detail = body.detail;
      } catch {
        // keep the status text
      }
      throw new ApiError(response.status, detail);
    }
    return (await response.json()) as T;
  }

  private post<T>(path: string, payload: unknown): Promise<T> {
    return this.request<T>(path, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(payload),
    });
  }

  meta(): Promise<Meta> {
    return this.request<Meta>("/api/meta");
  }

  graph(): Promise<GraphPayload> {
    return this.request<GraphPayload>("/api/graph");
  }

  entityBelief(id: string): Promise<EntityBeliefPayload> {
    return this.request<EntityBeliefPayload>(
      `/api/entities/${encodeURIComponent(id)}/belief`,
    );
  }

  edgeBelief(a: string, b: string): Promise<EdgeBeliefPayload> {
    return this.request<EdgeBeliefPayload>(
      `/api/edges/${encodeURIComponent(a)}/${encodeURIComponent(b)}/belief`,
    );
  }

  cellIndicators(cellId: string): Promise<IndicatorSeriesPayload> {
    return this.request<IndicatorSeriesPayload>(
      `/api/cells/${encodeURIComponent(cellId)}/indicators`,
    );
  }

  /** Commit one tick; the service holds the precondition that `tick` is the
   * next uncommitted index and answers 409 otherwise. */
  postTick(tick: number, records: StreamRecord[]): Promise<CommitResponse> {
    return this.post<CommitResponse>("/api/ticks", { tick, records });
  }

  whatIf(request: WhatIfRequest): Promise<WhatIfResponse> {
    return this.post<WhatIfResponse>("/api/what-if", request);
  }
}
