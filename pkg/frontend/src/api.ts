/**
 * Thin client for the judgment service HTTP API.
 *
 * Everything the UI knows about the backend goes through this module; the
 * fetch function is injectable so tests can fake the wire.
 */

export interface ProgressCounts {
  assigned: number;
  labeled: number;
}

/** One task as served by /api/tasks/next. In blind mode model_id is absent. */
export interface TaskView {
  task_id: string | null;
  video_id?: string;
  video_url?: string;
  caption?: string;
  blind?: boolean;
  model_id?: string;
  annotator_id?: string;
  progress?: ProgressCounts;
  done?: boolean;
}

/** The four binary judgments, addressed by opaque task id. */
export interface LabelSubmission {
  task_id: string;
  annotator_id: string;
  fluency: boolean;
  creativity: boolean;
  pcc: boolean;
  consistency: boolean;
}

export interface ProgressSummary {
  annotators: Record<string, ProgressCounts>;
  total_labeled: number;
  models: number;
}

export class ApiError extends Error {
  constructor(message: string, readonly status?: number) {
    super(message);
    this.name = "ApiError";
  }
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiClient {
  private readonly fetchFn: FetchLike;

  constructor(private readonly baseUrl = "", fetchFn?: FetchLike) {
    this.fetchFn = fetchFn ?? ((input, init) => fetch(input, init));
  }

  private async getJson<T>(path: string): Promise<T> {
    let response: Response;
    try {
      response = await this.fetchFn(this.baseUrl + path);
    } catch (err) {
      throw new ApiError(`network failure for ${path}: ${String(err)}`);
    }
    if (!response.ok) {
      throw new ApiError(`GET ${path} failed: ${response.status}`, response.status);
    }
    return (await response.json()) as T;
  }

  nextTask(annotator: string): Promise<TaskView> {
    return this.getJson<TaskView>(`/api/tasks/next?annotator=${encodeURIComponent(annotator)}`);
  }

  getTask(taskId: string): Promise<TaskView> {
    return this.getJson<TaskView>(`/api/tasks/${encodeURIComponent(taskId)}`);
  }

  progress(): Promise<ProgressSummary> {
    return this.getJson<ProgressSummary>("/api/progress");
  }

  async postLabel(label: LabelSubmission): Promise<{ ok: boolean; progress: ProgressCounts }> {
    let response: Response;
    try {
      response = await this.fetchFn(this.baseUrl + "/api/labels", {
        method: "POST",
        headers: { "Content-Type": "application/json" },
        body: JSON.stringify(label),
      });
    } catch (err) {
      throw new ApiError(`network failure for /api/labels: ${String(err)}`);
    }
    if (!response.ok) {
      throw new ApiError(`POST /api/labels failed: ${response.status}`, response.status);
    }
    return (await response.json()) as { ok: boolean; progress: ProgressCounts };
  }
}
