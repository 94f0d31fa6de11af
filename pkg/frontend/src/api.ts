// Typed client over the review API. The fetch function is injected so tests
// can stub the server; the browser passes window.fetch.

import type {
  AccuracyReport,
  AgreementReport,
  ConsensusResponse,
  DiscrepancyCategory,
  JudgmentResponse,
  MarksTableReport,
  SessionSummary,
  SubmissionDetail,
  Task,
  TaxonomyReport,
  Verdict,
} from "./types.js";

export interface FetchResponse {
  ok: boolean;
  status: number;
  json(): Promise<unknown>;
}

export type FetchLike = (
  url: string,
  init?: { method?: string; headers?: Record<string, string>; body?: string },
) => Promise<FetchResponse>;

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly code: string,
    message: string,
  ) {
    super(message);
  }
}

export class ApiClient {
  constructor(
    private readonly fetchFn: FetchLike,
    private readonly base = "",
  ) {}

  private async request<T>(path: string, init?: Parameters<FetchLike>[1]): Promise<T> {
    const response = await this.fetchFn(this.base + path, init);
    const body = (await response.json()) as Record<string, unknown>;
    if (!response.ok) {
      const code = typeof body.error === "string" ? body.error : "ERROR";
      const message = typeof body.message === "string" ? body.message : response.status.toString();
      throw new ApiError(response.status, code, message);
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

  session(): Promise<SessionSummary> {
    return this.request("/api/session");
  }

  task(taskId: string): Promise<Task> {
    return this.request(`/api/tasks/${encodeURIComponent(taskId)}`);
  }

  submission(submissionId: string): Promise<SubmissionDetail> {
    return this.request(`/api/submissions/${encodeURIComponent(submissionId)}`);
  }

  postJudgment(payload: {
    grader_id: string;
    submission_id: string;
    criterion_id: string;
    verdict: Verdict;
    note?: string;
  }): Promise<JudgmentResponse> {
    return this.post("/api/judgments", { note: "", ...payload });
  }

  postConsensus(payload: {
    submission_id: string;
    criterion_id: string;
    resolved_verdict: Verdict;
    note?: string;
    resolved_by: string[];
  }): Promise<ConsensusResponse> {
    return this.post("/api/consensus", { note: "", ...payload });
  }

  postTag(payload: {
    submission_id: string;
    criterion_id: string;
    grader_id: string;
    category: DiscrepancyCategory;
    note?: string;
  }): Promise<{ tag: Record<string, string> }> {
    return this.post("/api/discrepancy-tags", { note: "", ...payload });
  }

  agreement(a: string, b: string): Promise<AgreementReport> {
    return this.request(
      `/api/reports/agreement?a=${encodeURIComponent(a)}&b=${encodeURIComponent(b)}`,
    );
  }

  accuracy(grader: string): Promise<AccuracyReport> {
    return this.request(`/api/reports/accuracy?grader=${encodeURIComponent(grader)}`);
  }

  taxonomy(): Promise<TaxonomyReport> {
    return this.request("/api/reports/taxonomy");
  }

  marksTable(taskId: string): Promise<MarksTableReport> {
    return this.request(`/api/reports/marks-table?task=${encodeURIComponent(taskId)}`);
  }
}
