import type {
  CreatedDoc,
  JudgementResponse,
  JudgementSubmission,
  ModerationResponse,
  ModerationSubmission,
  NextDoc,
  ReportDoc,
} from "./types.js";

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly detail: string,
  ) {
    super(`service returned ${status}: ${detail}`);
    this.name = "ApiError";
  }
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

/**
 * Thin typed wrapper over the session service's JSON API.
 *
 * The client is deliberately stateless: every method is a single
 * request, and whoever owns the view decides when to refetch.  A bearer
 * token, when configured, rides along on every call.
 */
export class ApiClient {
  private readonly base: string;

  constructor(
    baseUrl: string,
    private readonly token?: string,
    private readonly fetchImpl: FetchLike = (input, init) => fetch(input, init),
  ) {
    this.base = baseUrl.replace(/\/+$/, "");
  }

  async createAssessment(payload: unknown): Promise<CreatedDoc> {
    return this.request("POST", "/assessments", payload);
  }

  async next(assessmentId: string): Promise<NextDoc> {
    return this.request("GET", `/assessments/${assessmentId}/next`);
  }

  async submitJudgements(
    assessmentId: string,
    submission: JudgementSubmission,
  ): Promise<JudgementResponse> {
    return this.request(
      "POST",
      `/assessments/${assessmentId}/judgements`,
      submission,
    );
  }

  async moderate(
    assessmentId: string,
    submission: ModerationSubmission,
  ): Promise<ModerationResponse> {
    return this.request(
      "POST",
      `/assessments/${assessmentId}/moderations`,
      submission,
    );
  }

  async report(assessmentId: string): Promise<ReportDoc> {
    return this.request("GET", `/assessments/${assessmentId}/report`);
  }

  async reopen(assessmentId: string): Promise<{ status: string }> {
    return this.request("POST", `/assessments/${assessmentId}/reopen`);
  }

  private async request<T>(
    method: string,
    path: string,
    body?: unknown,
  ): Promise<T> {
    const headers: Record<string, string> = {};
    if (body !== undefined) headers["content-type"] = "application/json";
    if (this.token) headers["authorization"] = `Bearer ${this.token}`;
    const response = await this.fetchImpl(`${this.base}${path}`, {
      method,
      headers,
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    if (!response.ok) {
      let detail = response.statusText;
      try {
        const doc = (await response.json()) as { detail?: unknown };
        if (doc.detail !== undefined) detail = JSON.stringify(doc.detail);
      } catch {
        // non-JSON error body; keep the status text
      }
      throw new ApiError(response.status, detail);
    }
    return (await response.json()) as T;
  }
}
