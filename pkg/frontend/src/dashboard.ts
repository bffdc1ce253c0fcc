import { ApiClient, ApiError } from "./api.js";
import type { DecisionAction, PoolResponse, PoolRow } from "./types.js";

const TRUNCATE_AT = 60;

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

export class DashboardView {
  constructor(private api: ApiClient, private root: HTMLElement,
              private doc: Document, private taskId: string) {}

  async mount(): Promise<void> {
    this.root.textContent = "";
    this.root.appendChild(el(this.doc, "h2", undefined,
                             "Possible new solutions"));
    this.root.appendChild(el(this.doc, "div", "messages"));
    this.root.appendChild(el(this.doc, "div", "pool-area"));

    const editor = el(this.doc, "div", "testdata-editor");
    editor.appendChild(el(this.doc, "h3", undefined, "Test data changes"));
    const rows = el(this.doc, "textarea", "testdata-input");
    rows.rows = 3;
    rows.placeholder = "INSERT INTO ... VALUES (...);";
    editor.appendChild(rows);
    const dryRun = el(this.doc, "label", "dry-run-label", " preview only");
    const dryRunBox = el(this.doc, "input", "dry-run");
    dryRunBox.type = "checkbox";
    dryRun.prepend(dryRunBox);
    editor.appendChild(dryRun);
    const apply = el(this.doc, "button", "testdata-button", "Run re-check");
    apply.addEventListener("click", () => {
      void this.applyTestData(rows.value, dryRunBox.checked);
    });
    editor.appendChild(apply);
    editor.appendChild(el(this.doc, "div", "flips-area"));
    this.root.appendChild(editor);

    await this.refresh();
  }

  async refresh(): Promise<void> {
    let pool: PoolResponse;
    try {
      pool = await this.api.getPool(this.taskId);
    } catch (err) {
      this.message(err instanceof ApiError && err.status === 401
        ? "lecturer token rejected"
        : `failed to load pool: ${String(err)}`);
      return;
    }
    const area = this.root.querySelector(".pool-area") as HTMLElement;
    area.textContent = "";
    const table = el(this.doc, "table", "pool-table");
    const head = el(this.doc, "tr");
    for (const caption of ["SQL statement", "Notes", "Select"]) {
      head.appendChild(el(this.doc, "th", undefined, caption));
    }
    table.appendChild(head);
    for (const row of pool.rows) {
      table.appendChild(this.renderRow(row));
    }
    area.appendChild(table);

    if (pool.wrong_store.length) {
      const wrong = el(this.doc, "div", "wrong-store");
      wrong.appendChild(el(this.doc, "h3", undefined, "Wrong-solution store"));
      for (const entry of pool.wrong_store) {
        wrong.appendChild(el(this.doc, "div", "wrong-entry",
                             `${entry.id}: ${entry.sql}`));
      }
      area.appendChild(wrong);
    }
  }

  private renderRow(row: PoolRow): HTMLElement {
    const tr = el(this.doc, "tr", "pool-row");
    tr.dataset.entryId = row.id;

    const sqlCell = el(this.doc, "td", "pool-sql");
    const truncated = row.sql.length > TRUNCATE_AT
      ? row.sql.slice(0, TRUNCATE_AT) + "…" : row.sql;
    const sqlText = el(this.doc, "span", "sql-text", truncated);
    sqlText.title = "click to expand";
    let expanded = false;
    sqlText.addEventListener("click", () => {
      expanded = !expanded;
      sqlText.textContent = expanded ? row.sql : truncated;
    });
    sqlCell.appendChild(sqlText);
    tr.appendChild(sqlCell);

    let note = row.note;
    if (row.pending && row.status === "active") {
      note = note ? `${note} (auto-accepted, review to confirm or undo)`
        : "auto-accepted, review to confirm or undo";
    }
    tr.appendChild(el(this.doc, "td", "pool-note", note));

    const actions = el(this.doc, "td", "pool-actions");
    const buttons: Array<[string, DecisionAction]> =
      [["Yes", "yes"], ["No", "no"], ["Delete", "delete"]];
    for (const [label, action] of buttons) {
      const button = el(this.doc, "button", `action-${action}`, label);
      button.addEventListener("click", () => {
        void this.decide(row.id, action);
      });
      actions.appendChild(button);
    }
    tr.appendChild(actions);
    return tr;
  }

  async decide(entryId: string, action: DecisionAction): Promise<void> {
    try {
      const result = await this.api.decide(this.taskId, entryId, action);
      if (result.advisory) {
        this.message(result.advisory);
      } else {
        this.message(`${entryId} → ${result.entry.status}`);
      }
    } catch (err) {
      if (err instanceof ApiError && err.status === 409) {
        // someone already reviewed this row; refreshing makes retries safe
        this.message(`row ${entryId} was stale; refreshed`);
      } else {
        this.message(`decision failed: ${String(err)}`);
      }
    }
    await this.refresh();
  }

  async applyTestData(rows: string, dryRun: boolean): Promise<void> {
    const flipsArea = this.root.querySelector(".flips-area") as HTMLElement;
    flipsArea.textContent = "";
    try {
      const result = await this.api.postTestData(this.taskId, rows, dryRun);
      if (!result.flips.length) {
        flipsArea.appendChild(el(this.doc, "div", "flip-none",
                                 "no verdict flips"));
      }
      for (const flip of result.flips) {
        flipsArea.appendChild(el(this.doc, "div", "flip",
                                 `${flip.entry_id}: ${flip.old} → ${flip.new}`));
      }
      for (const warning of result.warnings) {
        flipsArea.appendChild(el(this.doc, "div", "flip-warning", warning));
      }
      this.message(result.applied ? "test data applied" : "preview only");
    } catch (err) {
      this.message(`test-data change failed: ${String(err)}`);
    }
  }

  private message(text: string): void {
    const box = this.root.querySelector(".messages") as HTMLElement;
    box.textContent = text;
  }
}
