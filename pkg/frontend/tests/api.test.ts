import { afterEach, describe, expect, it, vi } from "vitest";

import { ApiClient, ApiError } from "../src/api.js";

function jsonResponse(body: unknown, status = 200): Response {
  return new Response(JSON.stringify(body), {
    status,
    headers: { "Content-Type": "application/json" },
  });
}

describe("ApiClient", () => {
  afterEach(() => {
    vi.restoreAllMocks();
  });

  it("lists tasks", async () => {
    const mock = vi.fn().mockResolvedValue(jsonResponse({
      schema_version: 1,
      tasks: [{ id: "york", description: "hotels" }],
    }));
    vi.stubGlobal("fetch", mock);
    const tasks = await new ApiClient("").listTasks();
    expect(tasks).toEqual([{ id: "york", description: "hotels" }]);
    expect(mock).toHaveBeenCalledWith("/tasks", expect.objectContaining({
      method: "GET",
    }));
  });

  it("submits solutions without the lecturer token", async () => {
    const mock = vi.fn().mockResolvedValue(jsonResponse({ verdict: {} }));
    vi.stubGlobal("fetch", mock);
    const api = new ApiClient("http://x", "secret");
    await api.submit("york", "SELECT 1", "s1");
    const [url, init] = mock.mock.calls[0];
    expect(url).toBe("http://x/tasks/york/submissions");
    expect(init.headers["X-Lecturer-Token"]).toBeUndefined();
    expect(JSON.parse(init.body)).toEqual({
      sql: "SELECT 1", student: "s1", mode: "multi_ref",
    });
  });

  it("sends the token on lecturer endpoints", async () => {
    const mock = vi.fn().mockResolvedValue(jsonResponse({ rows: [], wrong_store: [] }));
    vi.stubGlobal("fetch", mock);
    const api = new ApiClient("", "secret");
    await api.getPool("york");
    expect(mock.mock.calls[0][1].headers["X-Lecturer-Token"]).toBe("secret");
  });

  it("maps decision actions to the endpoint body", async () => {
    const mock = vi.fn().mockResolvedValue(jsonResponse({
      entry: { id: "r0001", status: "active", quality: "poor" },
      advisory: null,
    }));
    vi.stubGlobal("fetch", mock);
    const api = new ApiClient("", "secret");
    await api.decide("york", "r0001", "yes", "poor");
    const [url, init] = mock.mock.calls[0];
    expect(url).toBe("/tasks/york/pool/r0001/decision");
    expect(JSON.parse(init.body)).toEqual({ action: "yes", quality: "poor" });
  });

  it("raises ApiError with the server detail", async () => {
    vi.stubGlobal("fetch", vi.fn().mockResolvedValue(
      jsonResponse({ detail: "unknown task nope" }, 404)));
    const api = new ApiClient("");
    await expect(api.getTask("nope")).rejects.toMatchObject({
      status: 404,
      detail: "unknown task nope",
    });
    await expect(api.getTask("nope")).rejects.toBeInstanceOf(ApiError);
  });

  it("survives non-JSON error bodies", async () => {
    vi.stubGlobal("fetch", vi.fn().mockResolvedValue(
      new Response("boom", { status: 500, statusText: "Server Error" })));
    await expect(new ApiClient("").listTasks()).rejects.toMatchObject({
      status: 500,
    });
  });
});
