import type { FieldError, JudgmentSubmission, Progress, TaskKind, TaskView } from "./types";

export interface SubmitResult {
  ok: boolean;
  status: number;
  overwritten?: boolean;
  fieldErrors?: FieldError[];
  message?: string;
}

export class NetworkError extends Error {}

/** Thin typed client over the annotation service HTTP API. */
export class ApiClient {
  constructor(
    private readonly baseUrl: string,
    private readonly token: string,
    private readonly fetchImpl: typeof fetch = fetch,
  ) {}

  private headers(json = false): Record<string, string> {
    const headers: Record<string, string> = { "X-Annotation-Token": this.token };
    if (json) headers["Content-Type"] = "application/json";
    return headers;
  }

  private async request(path: string, init?: RequestInit): Promise<Response> {
    try {
      return await this.fetchImpl(`${this.baseUrl}${path}`, init);
    } catch (err) {
      throw new NetworkError(String(err));
    }
  }

  /** Next unanswered task for the annotator, or null when exhausted. */
  async nextTask(annotator: string, kind?: TaskKind): Promise<TaskView | null> {
    const params = new URLSearchParams({ annotator });
    if (kind) params.set("kind", kind);
    const response = await this.request(`/api/tasks/next?${params}`, {
      headers: this.headers(),
    });
    if (response.status === 204) return null;
    if (!response.ok) throw new NetworkError(`next task failed: ${response.status}`);
    return (await response.json()) as TaskView;
  }

  async submit(judgment: JudgmentSubmission): Promise<SubmitResult> {
    const response = await this.request("/api/judgments", {
      method: "POST",
      headers: this.headers(true),
      body: JSON.stringify(judgment),
    });
    if (response.status === 201) {
      const body = await response.json();
      return { ok: true, status: 201, overwritten: Boolean(body.overwritten) };
    }
    const body = await response.json().catch(() => ({}));
    return {
      ok: false,
      status: response.status,
      fieldErrors: (body.field_errors ?? []) as FieldError[],
      message: body.message ?? `submit failed: ${response.status}`,
    };
  }

  async report(): Promise<unknown> {
    const response = await this.request("/api/report", { headers: this.headers() });
    if (!response.ok) throw new NetworkError(`report failed: ${response.status}`);
    return response.json();
  }

  async progress(): Promise<Progress> {
    const response = await this.request("/api/progress", { headers: this.headers() });
    if (!response.ok) throw new NetworkError(`progress failed: ${response.status}`);
    return (await response.json()) as Progress;
  }
}
