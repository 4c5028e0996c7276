/** Typed client for the review REST service.
 *
 * Every write the UI makes goes through here; nothing else touches the
 * network. `fetchFn` is injectable so tests can run against a scripted
 * server.
 */

import {
  AgreementReport,
  AnnotationPayload,
  ClaimResult,
  DraftView,
  ProgressReport,
  SubmitResult,
  TriageToken,
} from "./types.js";

export const ANNOTATOR_HEADER = "X-Annotator-Id";

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly detail: string,
  ) {
    super(`${status}: ${detail}`);
    this.name = "ApiError";
  }

  /** A lost or contested claim lease. */
  get isConflict(): boolean {
    return this.status === 409;
  }
}

/** Network-level failure: the service is unreachable, not objecting. */
export class ServiceUnreachable extends Error {
  constructor(cause: unknown) {
    super("review service unreachable");
    this.name = "ServiceUnreachable";
    this.cause = cause;
  }
}

export interface ApiConfig {
  annotatorId: string;
  baseUrl?: string;
  token?: string;
  fetchFn?: typeof fetch;
}

export class ApiClient {
  readonly annotatorId: string;
  private readonly baseUrl: string;
  private readonly token: string;
  private readonly fetchFn: typeof fetch;

  constructor(config: ApiConfig) {
    this.annotatorId = config.annotatorId;
    this.baseUrl = (config.baseUrl ?? "").replace(/\/$/, "");
    this.token = config.token ?? "";
    this.fetchFn = config.fetchFn ?? fetch;
  }

  private headers(json: boolean): Record<string, string> {
    const headers: Record<string, string> = {
      [ANNOTATOR_HEADER]: this.annotatorId,
    };
    if (this.token) {
      headers["Authorization"] = `Bearer ${this.token}`;
    }
    if (json) {
      headers["Content-Type"] = "application/json";
    }
    return headers;
  }

  private async request<T>(
    method: string,
    path: string,
    body?: unknown,
  ): Promise<T> {
    let response: Response;
    try {
      response = await this.fetchFn(`${this.baseUrl}${path}`, {
        method,
        headers: this.headers(body !== undefined),
        body: body === undefined ? undefined : JSON.stringify(body),
      });
    } catch (cause) {
      throw new ServiceUnreachable(cause);
    }
    if (!response.ok) {
      let detail = response.statusText;
      try {
        const parsed = (await response.json()) as { detail?: unknown };
        if (typeof parsed.detail === "string") {
          detail = parsed.detail;
        }
      } catch {
        // non-JSON error body; keep the status text
      }
      throw new ApiError(response.status, detail);
    }
    return (await response.json()) as T;
  }

  async listDrafts(status?: TriageToken): Promise<DraftView[]> {
    const query = status ? `?status=${encodeURIComponent(status)}` : "";
    const data = await this.request<{ drafts: DraftView[] }>(
      "GET",
      `/api/drafts${query}`,
    );
    return data.drafts;
  }

  getDraft(id: string): Promise<DraftView> {
    return this.request<DraftView>("GET", `/api/drafts/${id}`);
  }

  claim(id: string): Promise<ClaimResult> {
    return this.request<ClaimResult>("POST", `/api/drafts/${id}/claim`);
  }

  submit(id: string, payload: AnnotationPayload): Promise<SubmitResult> {
    return this.request<SubmitResult>(
      "POST",
      `/api/drafts/${id}/annotation`,
      payload,
    );
  }

  progress(): Promise<ProgressReport> {
    return this.request<ProgressReport>("GET", "/api/progress");
  }

  agreement(): Promise<AgreementReport> {
    return this.request<AgreementReport>("GET", "/api/agreement");
  }

  /** Download link for the CSV sheet (filled when annotator is given). */
  exportUrl(annotator?: string): string {
    const query = annotator
      ? `?annotator=${encodeURIComponent(annotator)}`
      : "";
    return `${this.baseUrl}/api/export.csv${query}`;
  }
}
