/**
 * Typed client for the verification HTTP API.
 *
 * Pure transport layer: no UI state, no retries. Conflicts (HTTP 409,
 * another session decided the task first) surface as ConflictError so the
 * queue can skip the task; everything else non-2xx raises ApiError.
 */

export type TaskState = "pending" | "decided";
export type DecisionSource = "top1" | "top3" | "others" | "cross_class";

export interface Suggestion {
  name: string;
  score: number;
}

export interface Decision {
  segment_id: number;
  chosen: string;
  source: DecisionSource;
  annotator: string;
  timestamp: number;
  seq: number;
}

export interface TaskSummary {
  segment_id: number;
  state: TaskState;
  chosen: string | null;
  top1: string | null;
}

export interface TaskDetail {
  segment_id: number;
  image_id: string;
  class_id: number;
  original_name: string;
  state: TaskState;
  top3: Suggestion[];
  others: string[];
  image_url: string;
  overlay_url: string;
  decision: Decision | null;
}

export interface TaskPage {
  total: number;
  page: number;
  page_size: number;
  tasks: TaskSummary[];
}

export interface Progress {
  total: number;
  decided: number;
  pending: number;
  by_source: Record<DecisionSource, number>;
}

export interface ExportResult {
  count: number;
  fractions: Record<DecisionSource, number>;
  path: string;
}

export interface DecisionRequest {
  chosen: string;
  source: DecisionSource;
  annotator: string;
  replacement_class_id?: number | null;
  expect_pending?: boolean;
}

export class ApiError extends Error {
  constructor(readonly status: number, message: string) {
    super(message);
    this.name = "ApiError";
  }
}

export class ConflictError extends ApiError {
  constructor(message: string) {
    super(409, message);
    this.name = "ConflictError";
  }
}

export class VerifyApi {
  constructor(
    readonly baseUrl: string,
    private readonly fetchFn: typeof fetch = fetch,
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await this.fetchFn(`${this.baseUrl}${path}`, init);
    if (response.status === 409) {
      const body = await response.json().catch(() => ({ detail: "conflict" }));
      throw new ConflictError(String(body.detail ?? "conflict"));
    }
    if (!response.ok) {
      const body = await response.json().catch(() => ({ detail: response.statusText }));
      throw new ApiError(response.status, String(body.detail ?? response.statusText));
    }
    return (await response.json()) as T;
  }

  listTasks(state: TaskState | "all" = "pending", page = 0, pageSize = 100): Promise<TaskPage> {
    const params = new URLSearchParams({
      state,
      page: String(page),
      page_size: String(pageSize),
    });
    return this.request<TaskPage>(`/tasks?${params}`);
  }

  /** All task summaries under a state filter, walking the pages. */
  async allTasks(state: TaskState | "all" = "pending"): Promise<TaskSummary[]> {
    const out: TaskSummary[] = [];
    for (let page = 0; ; page++) {
      const result = await this.listTasks(state, page);
      out.push(...result.tasks);
      if ((page + 1) * result.page_size >= result.total || result.tasks.length === 0) {
        break;
      }
    }
    return out;
  }

  getTask(segmentId: number): Promise<TaskDetail> {
    return this.request<TaskDetail>(`/tasks/${segmentId}`);
  }

  postDecision(segmentId: number, body: DecisionRequest): Promise<TaskDetail> {
    return this.request<TaskDetail>(`/tasks/${segmentId}/decision`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(body),
    });
  }

  progress(): Promise<Progress> {
    return this.request<Progress>("/progress");
  }

  exportVerified(path?: string): Promise<ExportResult> {
    return this.request<ExportResult>("/export", {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(path ? { path } : {}),
    });
  }

  imageUrl(task: TaskDetail): string {
    return `${this.baseUrl}${task.image_url}`;
  }

  overlayUrl(task: TaskDetail): string {
    return `${this.baseUrl}${task.overlay_url}`;
  }
}
