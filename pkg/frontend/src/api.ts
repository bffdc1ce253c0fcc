import type {
  DecisionAction,
  DecisionResponse,
  FeedbackReport,
  PoolResponse,
  TaskDetail,
  TaskSummary,
  TestDataResponse,
} from "./types.js";

export class ApiError extends Error {
  constructor(public status: number, public detail: string) {
    super(`${status}: ${detail}`);
  }
}

async function parseError(response: Response): Promise<ApiError> {
  let detail = response.statusText;
  try {
    const body = await response.json();
    if (typeof body.detail === "string") {
      detail = body.detail;
    } else if (body.detail) {
      detail = JSON.stringify(body.detail);
    }
  } catch {
    // non-JSON error body: keep the status text
  }
  return new ApiError(response.status, detail);
}

export class ApiClient {
  constructor(private baseUrl: string = "", private lecturerToken: string = "") {}

  setToken(token: string): void {
    this.lecturerToken = token;
  }

  private headers(authed: boolean): Record<string, string> {
    const headers: Record<string, string> = { "Content-Type": "application/json" };
    if (authed) {
      headers["X-Lecturer-Token"] = this.lecturerToken;
    }
    return headers;
  }

  private async request<T>(method: string, path: string, body?: unknown,
                           authed = false): Promise<T> {
    const response = await fetch(this.baseUrl + path, {
      method,
      headers: this.headers(authed),
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    if (!response.ok) {
      throw await parseError(response);
    }
    return (await response.json()) as T;
  }

  async listTasks(): Promise<TaskSummary[]> {
    const body = await this.request<{ tasks: TaskSummary[] }>("GET", "/tasks");
    return body.tasks;
  }

  getTask(taskId: string): Promise<TaskDetail> {
    return this.request("GET", `/tasks/${encodeURIComponent(taskId)}`);
  }

  submit(taskId: string, sql: string, student: string,
         mode = "multi_ref"): Promise<FeedbackReport> {
    return this.request("POST", `/tasks/${encodeURIComponent(taskId)}/submissions`,
                        { sql, student, mode });
  }

  getPool(taskId: string): Promise<PoolResponse> {
    return this.request("GET", `/tasks/${encodeURIComponent(taskId)}/pool`,
                        undefined, true);
  }

  decide(taskId: string, entryId: string, action: DecisionAction,
         quality?: string): Promise<DecisionResponse> {
    const body: Record<string, string> = { action };
    if (quality) {
      body.quality = quality;
    }
    return this.request(
      "POST",
      `/tasks/${encodeURIComponent(taskId)}/pool/${encodeURIComponent(entryId)}/decision`,
      body, true);
  }

  postTestData(taskId: string, rows: string,
               dryRun = false): Promise<TestDataResponse> {
    return this.request("POST", `/tasks/${encodeURIComponent(taskId)}/testdata`,
                        { rows, dry_run: dryRun }, true);
  }

  createTask(body: Record<string, unknown>): Promise<{ task_id: string }> {
    return this.request("POST", "/tasks", body, true);
  }
}
