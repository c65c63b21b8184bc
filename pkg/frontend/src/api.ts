import type { NextResponse, StatsPayload, VerdictSubmission } from "./types.js";

export class ApiError extends Error {
  constructor(
    readonly status: number,
    message: string,
  ) {
    super(message);
    this.name = "ApiError";
  }
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

/** Thin client over the review service; the only configuration is the
 * service base URL. A fetch implementation can be injected for tests. */
export class ReviewApiClient {
  private readonly base: string;
  private readonly fetchFn: FetchLike;

  constructor(baseUrl: string, fetchFn?: FetchLike) {
    this.base = baseUrl.replace(/\/+$/, "");
    this.fetchFn = fetchFn ?? ((input, init) => fetch(input, init));
  }

  /** GET /api/queue/next -> next item, or null when the queue is empty. */
  async next(reviewerId: string): Promise<NextResponse | null> {
    const response = await this.fetchFn(
      `${this.base}/api/queue/next?reviewer=${encodeURIComponent(reviewerId)}`,
    );
    if (response.status === 204) return null;
    if (!response.ok) throw new ApiError(response.status, await errorText(response));
    return (await response.json()) as NextResponse;
  }

  /** POST /api/verdicts -> resolves on 2xx, throws ApiError on 4xx/5xx. */
  async submitVerdict(verdict: VerdictSubmission): Promise<void> {
    const response = await this.fetchFn(`${this.base}/api/verdicts`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(verdict),
    });
    if (!response.ok) throw new ApiError(response.status, await errorText(response));
  }

  async stats(): Promise<StatsPayload> {
    const response = await this.fetchFn(`${this.base}/api/stats`);
    if (!response.ok) throw new ApiError(response.status, await errorText(response));
    return (await response.json()) as StatsPayload;
  }
}

async function errorText(response: Response): Promise<string> {
  try {
    const body = (await response.json()) as { error?: string };
    return body.error ?? `HTTP ${response.status}`;
  } catch {
    return `HTTP ${response.status}`;
  }
}
