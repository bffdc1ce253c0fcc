// @vitest-environment happy-dom
import { beforeEach, describe, expect, it, vi } from "vitest";

import { StudentView, renderFeedback } from "../src/student.js";
import type { FeedbackReport } from "../src/types.js";

const TASK = {
  schema_version: 1,
  id: "york",
  description: "Names of all hotels in York",
  output_order_required: false,
  schema: {
    tables: [{
      name: "hotels",
      columns: [{ name: "name", type: "text" },
                { name: "location", type: "text" }],
    }],
  },
};

function report(overrides: Partial<FeedbackReport>): FeedbackReport {
  return {
    schema_version: 1,
    verdict: { kind: "Correct", detail: "" },
    mode: "multi_ref",
    closest_ref: "r0000",
    distance: null,
    hints: [],
    note: "",
    ...overrides,
  };
}

function fakeApi(submitResult: FeedbackReport) {
  return {
    listTasks: vi.fn().mockResolvedValue([{ id: "york", description: "hotels" }]),
    getTask: vi.fn().mockResolvedValue(TASK),
    submit: vi.fn().mockResolvedValue(submitResult),
  };
}

describe("StudentView", () => {
  let root: HTMLElement;

  beforeEach(() => {
    document.body.innerHTML = "<div id='root'></div>";
    root = document.getElementById("root")!;
  });

  it("renders task picker, schema and input", async () => {
    const api = fakeApi(report({}));
    const view = new StudentView(api as never, root, document);
    await view.mount();
    expect(root.querySelector(".task-picker")).toBeTruthy();
    expect(root.querySelector(".schema-box")!.textContent).toContain("hotels");
    expect(root.querySelector(".sql-input")).toBeTruthy();
  });

  it("shows a green correct state", async () => {
    const api = fakeApi(report({}));
    const view = new StudentView(api as never, root, document);
    await view.mount();
    await view.submit("SELECT name FROM hotels WHERE location = 'York'");
    const verdict = root.querySelector(".verdict")!;
    expect(verdict.className).toContain("verdict-correct");
    expect(verdict.textContent).toBe("Correct");
    expect(api.submit).toHaveBeenCalledWith(
      "york", "SELECT name FROM hotels WHERE location = 'York'", "browser");
  });

  it("groups hints by clause for a wrong submission", async () => {
    const api = fakeApi(report({
      verdict: { kind: "WrongResult", detail: "1 missing row(s), 0 extra row(s)" },
      note: "Missing multiple clauses",
      hints: [
        { category: "C1", clause: "where", kind: "missing", token: "'York'" },
        { category: "C2", clause: "where", kind: "missing", token: "=" },
        { category: "C1", clause: "from", kind: "missing", token: "hotels" },
      ],
    }));
    const view = new StudentView(api as never, root, document);
    await view.mount();
    await view.submit("SELECT 14");
    expect(root.querySelector(".note")!.textContent).toBe("Missing multiple clauses");
    const groups = root.querySelectorAll(".hint-group");
    expect(groups.length).toBe(2); // where + from
    expect(root.querySelectorAll(".hint").length).toBe(3);
  });

  it("renders the parser message verbatim for malformed SQL", async () => {
    const api = fakeApi(report({
      verdict: {
        kind: "NonExecutable",
        detail: "unexpected 'end of input' at position 25 (expected expression)",
      },
    }));
    const view = new StudentView(api as never, root, document);
    await view.mount();
    await view.submit("SELECT name FROM hotels (");
    expect(root.querySelector(".verdict")!.textContent)
      .toContain("unexpected 'end of input' at position 25");
  });

  it("keeps a submission history", async () => {
    const api = fakeApi(report({}));
    const view = new StudentView(api as never, root, document);
    await view.mount();
    await view.submit("SELECT 1");
    await view.submit("SELECT 2");
    const entries = root.querySelectorAll(".history-entry");
    expect(entries.length).toBe(2);
    expect(entries[1].textContent).toContain("SELECT 2");
  });

  it("surfaces network errors inline", async () => {
    const api = fakeApi(report({}));
    api.submit = vi.fn().mockRejectedValue(new Error("connection refused"));
    const view = new StudentView(api as never, root, document);
    await view.mount();
    await view.submit("SELECT 1");
    expect(root.querySelector(".verdict-error")!.textContent)
      .toContain("connection refused");
  });
});

describe("renderFeedback", () => {
  it("omits hint sections when there are none", () => {
    const node = renderFeedback(document, report({}));
    expect(node.querySelector(".hints")).toBeNull();
    expect(node.querySelector(".note")).toBeNull();
  });
});
