// Wire shapes of the sqltutor service. The client renders exactly what the
// server sends; no grading logic lives in the browser.

export interface TaskSummary {
  id: string;
  description: string;
}

export interface ColumnInfo {
  name: string;
  type: string;
}

export interface TableInfo {
  name: string;
  columns: ColumnInfo[];
}

export interface TaskDetail {
  schema_version: number;
  id: string;
  description: string;
  output_order_required: boolean;
  schema: { tables: TableInfo[] };
}

export interface VerdictInfo {
  kind: "Correct" | "WrongResult" | "NonExecutable" | "Rejected";
  detail: string;
}

export interface HintInfo {
  category: "C1" | "C2" | "C3" | "Style";
  clause: string;
  kind: string;
  token: string;
}

export interface ClauseComponents {
  c1: number;
  c2: number;
  c3: number;
}

export interface DistanceInfo {
  clauses: Record<string, ClauseComponents>;
  weights: { w1: string; w2: string; w3: string };
  total: string;
}

export interface FeedbackReport {
  schema_version: number;
  verdict: VerdictInfo;
  mode: string;
  closest_ref: string | null;
  distance: DistanceInfo | null;
  hints: HintInfo[];
  note: string;
}

export interface PoolRow {
  id: string;
  sql: string; // first 60 characters; full text never leaves the server
  note: string;
  status: string;
  quality: string;
  pending: boolean;
  match_count: number;
}

export interface WrongStoreRow {
  id: string;
  sql: string;
  note: string;
}

export interface PoolResponse {
  schema_version: number;
  rows: PoolRow[];
  wrong_store: WrongStoreRow[];
}

export interface DecisionResponse {
  schema_version: number;
  entry: { id: string; status: string; quality: string };
  advisory: string | null;
}

export interface VerdictFlip {
  entry_id: string;
  old: string;
  new: string;
}

export interface TestDataResponse {
  schema_version: number;
  applied: boolean;
  flips: VerdictFlip[];
  warnings: string[];
}

export type DecisionAction = "yes" | "no" | "delete";
