import { ApiClient, ApiError } from "./api.js";
import type { FeedbackReport, HintInfo, TaskDetail } from "./types.js";

interface HistoryEntry {
  sql: string;
  verdict: string;
}

const VERDICT_CLASS: Record<string, string> = {
  Correct: "verdict-correct",
  WrongResult: "verdict-wrong",
  NonExecutable: "verdict-error",
  Rejected: "verdict-error",
};

function el<K extends keyof HTMLElementTagNameMap>(
  doc: Document, tag: K, cls?: string, text?: string,
): HTMLElementTagNameMap[K] {
  const node = doc.createElement(tag);
  if (cls) {
    node.className = cls;
  }
  if (text !== undefined) {
    node.textContent = text;
  }
  return node;
}

function renderSchema(doc: Document, task: TaskDetail): HTMLElement {
  const box = el(doc, "div", "schema-box");
  for (const table of task.schema.tables) {
    const cols = table.columns.map((c) => `${c.name} ${c.type}`).join(", ");
    box.appendChild(el(doc, "div", "schema-table", `${table.name} (${cols})`));
  }
  return box;
}

function groupHints(hints: HintInfo[]): Map<string, HintInfo[]> {
  const groups = new Map<string, HintInfo[]>();
  for (const hint of hints) {
    const list = groups.get(hint.clause) ?? [];
    list.push(hint);
    groups.set(hint.clause, list);
  }
  return groups;
}

export function renderFeedback(doc: Document, report: FeedbackReport): HTMLElement {
  const panel = el(doc, "div", "feedback");
  const cls = VERDICT_CLASS[report.verdict.kind] ?? "verdict-error";
  const headline = report.verdict.detail
    ? `${report.verdict.kind}: ${report.verdict.detail}`
    : report.verdict.kind;
  panel.appendChild(el(doc, "div", `verdict ${cls}`, headline));
  if (report.note) {
    panel.appendChild(el(doc, "div", "note", report.note));
  }
  if (report.hints.length) {
    const list = el(doc, "div", "hints");
    for (const [clause, hints] of groupHints(report.hints)) {
      const group = el(doc, "div", "hint-group");
      group.appendChild(el(doc, "div", "hint-clause", clause));
      for (const hint of hints) {
        const line = hint.token
          ? `[${hint.category}] ${hint.kind}: ${hint.token}`
          : `[${hint.category}] ${hint.kind}`;
        group.appendChild(el(doc, "div", "hint", line));
      }
      list.appendChild(group);
    }
    panel.appendChild(list);
  }
  return panel;
}

export class StudentView {
  private history: HistoryEntry[] = [];
  private taskId = "";

  constructor(private api: ApiClient, private root: HTMLElement,
              private doc: Document, private student: string = "browser") {}

  async mount(): Promise<void> {
    this.root.textContent = "";
    const tasks = await this.api.listTasks();
    const picker = el(this.doc, "select", "task-picker");
    for (const task of tasks) {
      const option = el(this.doc, "option", undefined,
                        `${task.id}: ${task.description}`);
      option.value = task.id;
      picker.appendChild(option);
    }
    picker.addEventListener("change", () => {
      void this.showTask(picker.value);
    });
    this.root.appendChild(picker);
    this.root.appendChild(el(this.doc, "div", "task-area"));
    if (tasks.length) {
      await this.showTask(tasks[0].id);
    }
  }

  async showTask(taskId: string): Promise<void> {
    this.taskId = taskId;
    this.history = [];
    const task = await this.api.getTask(taskId);
    const area = this.root.querySelector(".task-area") as HTMLElement;
    area.textContent = "";
    area.appendChild(el(this.doc, "h2", "task-title", task.description));
    area.appendChild(renderSchema(this.doc, task));

    const input = el(this.doc, "textarea", "sql-input");
    input.rows = 5;
    input.placeholder = "SELECT ...";
    area.appendChild(input);

    const button = el(this.doc, "button", "submit-button", "Submit");
    button.addEventListener("click", () => {
      void this.submit(input.value);
    });
    area.appendChild(button);
    area.appendChild(el(this.doc, "div", "feedback-area"));
    const historyBox = el(this.doc, "div", "history");
    historyBox.appendChild(el(this.doc, "h3", undefined, "Your submissions"));
    historyBox.appendChild(el(this.doc, "ol", "history-list"));
    area.appendChild(historyBox);
  }

  async submit(sql: string): Promise<void> {
    const feedbackArea = this.root.querySelector(".feedback-area") as HTMLElement;
    feedbackArea.textContent = "";
    let report: FeedbackReport;
    try {
      report = await this.api.submit(this.taskId, sql, this.student);
    } catch (err) {
      const message = err instanceof ApiError ? err.message : String(err);
      feedbackArea.appendChild(el(this.doc, "div", "verdict verdict-error",
                                  `request failed: ${message}`));
      return;
    }
    feedbackArea.appendChild(renderFeedback(this.doc, report));
    this.history.push({ sql, verdict: report.verdict.kind });
    this.renderHistory();
  }

  private renderHistory(): void {
    const list = this.root.querySelector(".history-list") as HTMLElement;
    list.textContent = "";
    for (const entry of this.history) {
      list.appendChild(el(this.doc, "li", "history-entry",
                          `${entry.verdict} — ${entry.sql}`));
    }
  }
}
