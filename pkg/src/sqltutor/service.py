"""HTTP service: student practice loop and lecturer dashboard endpoints.

JSON request/response bodies; shapes carry a top-level schema_version.
Review and test-data endpoints (and anything exposing reference texts) are
gated by a static lecturer token passed in the X-Lecturer-Token header.
"""
from __future__ import annotations

import re
import threading
from datetime import datetime, timezone
from pathlib import Path

from fastapi import Depends, FastAPI, Header, HTTPException, Request
from fastapi.exceptions import RequestValidationError
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from . import bundle as bundle_io
from .analytics import SubmissionRecord, harmonization_reduction, learning_metrics, reduction_curve
from .checker import CORRECT, ProvisionError, provision, recheck_pool, run_select
from .config import EngineConfig, Task
from .distance import EmptyPool
from .feedback import generate_feedback
from .parser import ParseError, parse, parse_schema
from .pool import GOOD, POOR, PoolState, ReviewConflict, UnknownEntry
from .seedgen import suggest_seed

SCHEMA_VERSION = 1

DECISION_MAP = {"yes": "accept", "no": "reject_wrong", "delete": "delete"}


class TaskRuntime:
    def __init__(self, directory: Path, task: Task, pool: PoolState):
        self.directory = directory
        self.task = task
        self.pool = pool
        self.lock = threading.Lock()  # serializes mutate-then-save

    def save(self):
        bundle_io.save_bundle(self.directory, self.task, self.pool)


class TaskStore:
    def __init__(self, root_dirs):
        self.tasks: dict[str, TaskRuntime] = {}
        self.roots = [Path(d) for d in root_dirs]
        for root in self.roots:
            candidates = [root] if (root / "task.json").exists() else sorted(root.iterdir()) if root.is_dir() else []
            for directory in candidates:
                if (Path(directory) / "task.json").exists():
                    task, pool = bundle_io.load_bundle(directory)
                    self.tasks[task.id] = TaskRuntime(Path(directory), task, pool)

    def get(self, task_id: str) -> TaskRuntime:
        rt = self.tasks.get(task_id)
        if rt is None:
            raise HTTPException(status_code=404, detail=f"unknown task {task_id}")
        return rt

    def create(self, body: "TaskUpload") -> TaskRuntime:
        task_id = body.id or f"task-{len(self.tasks) + 1:03d}"
        if task_id in self.tasks or not re.fullmatch(r"[A-Za-z0-9_-]+", task_id):
            raise HTTPException(status_code=400, detail=f"bad or duplicate task id {task_id}")
        try:
            schema = parse_schema(body.schema_sql)
            solution_tree = parse(body.solution_sql, schema)
        except (ParseError, ValueError) as e:
            raise HTTPException(status_code=400, detail=str(e))
        seed_sql = body.seed_sql if body.seed_sql is not None else suggest_seed(schema, solution_tree)
        task = Task(
            id=task_id,
            description=body.description,
            schema_sql=body.schema_sql,
            seed_sql=seed_sql,
            hidden_sql=body.hidden_sql or "",
            reference_sql=body.solution_sql.strip(),
            output_order_required=body.output_order_required,
            config=EngineConfig.from_dict(body.config or {}),
        )
        try:
            with provision(task) as sandbox:
                run_select(sandbox, task.reference_sql, task.schema)
        except (ProvisionError, ParseError, Exception) as e:  # noqa: BLE001
            if isinstance(e, HTTPException):
                raise
            raise HTTPException(status_code=400,
                                detail=f"lecturer solution does not run: {e}")
        pool = PoolState.for_task(task)
        directory = self.roots[0] / task_id
        rt = TaskRuntime(directory, task, pool)
        rt.save()
        self.tasks[task_id] = rt
        return rt


class TaskUpload(BaseModel):
    description: str = ""
    schema_sql: str
    solution_sql: str
    seed_sql: str | None = None
    hidden_sql: str = ""
    output_order_required: bool = False
    id: str | None = None
    config: dict | None = None


class SubmissionBody(BaseModel):
    sql: str
    student: str = "anonymous"
    mode: str = "multi_ref"


class DecisionBody(BaseModel):
    action: str  # yes | no | delete
    quality: str | None = None


class TestDataBody(BaseModel):
    rows: str
    dry_run: bool = False


def create_app(root_dirs, token: str = "lecturer-token",
               static_dir: str | None = None) -> FastAPI:
    app = FastAPI(title="sqltutor", version="0.1.0")
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"],
        allow_headers=["*"],
    )
    store = TaskStore(root_dirs)
    app.state.store = store

    @app.exception_handler(RequestValidationError)
    async def malformed(request: Request, exc: RequestValidationError):
        return JSONResponse(status_code=400, content={"detail": exc.errors()})

    def require_lecturer(x_lecturer_token: str | None = Header(default=None)):
        if x_lecturer_token != token:
            raise HTTPException(status_code=401, detail="lecturer token required")

    # -- student-facing -----------------------------------------------------
    @app.get("/tasks")
    def list_tasks():
        return {
            "schema_version": SCHEMA_VERSION,
            "tasks": [
                {"id": rt.task.id, "description": rt.task.description}
                for rt in sorted(store.tasks.values(), key=lambda r: r.task.id)
            ],
        }

    @app.get("/tasks/{task_id}")
    def get_task(task_id: str):
        rt = store.get(task_id)
        schema = rt.task.schema
        return {
            "schema_version": SCHEMA_VERSION,
            "id": rt.task.id,
            "description": rt.task.description,
            "output_order_required": rt.task.output_order_required,
            "schema": {
                "tables": [
                    {"name": name, "columns": [{"name": c, "type": t} for c, t in cols]}
                    for name, cols in schema.tables
                ]
            },
        }

    @app.post("/tasks/{task_id}/submissions")
    def submit(task_id: str, body: SubmissionBody):
        rt = store.get(task_id)
        if body.mode not in ("single_ref", "multi_ref"):
            raise HTTPException(status_code=400, detail=f"unknown mode {body.mode}")
        with rt.lock:
            try:
                report = generate_feedback(rt.task, rt.pool, body.sql, body.mode)
            except EmptyPool as e:
                raise HTTPException(status_code=409, detail=str(e))
            timestamp = datetime.now(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")
            bundle_io.append_submission(rt.directory, timestamp, body.student,
                                        rt.task.id, report.verdict.kind, body.sql)
            if report.verdict.kind == CORRECT:
                rt.pool.ingest_correct(rt.task, body.sql)
                rt.save()
        payload = report.to_dict()
        payload["schema_version"] = SCHEMA_VERSION
        return payload

    # -- lecturer-facing ------------------------------------------------------
    @app.post("/tasks", dependencies=[Depends(require_lecturer)])
    def create_task(body: TaskUpload):
        rt = store.create(body)
        return {"schema_version": SCHEMA_VERSION, "task_id": rt.task.id}

    @app.get("/tasks/{task_id}/pool", dependencies=[Depends(require_lecturer)])
    def pool_rows(task_id: str):
        rt = store.get(task_id)
        return {
            "schema_version": SCHEMA_VERSION,
            "rows": rt.pool.list_candidates(),
            "wrong_store": [
                {"id": e.id, "sql": e.raw_text[:60], "note": e.note}
                for e in rt.pool.wrong_store()
            ],
        }

    @app.post("/tasks/{task_id}/pool/{entry_id}/decision",
              dependencies=[Depends(require_lecturer)])
    def decide(task_id: str, entry_id: str, body: DecisionBody):
        rt = store.get(task_id)
        action = DECISION_MAP.get(body.action)
        if action is None:
            raise HTTPException(status_code=400,
                                detail=f"unknown action {body.action!r}")
        quality = body.quality or GOOD
        if quality not in (GOOD, POOR):
            raise HTTPException(status_code=400, detail=f"unknown quality {quality!r}")
        with rt.lock:
            try:
                entry, advisory = rt.pool.review(entry_id, action, quality)
            except UnknownEntry:
                raise HTTPException(status_code=404,
                                    detail=f"unknown pool entry {entry_id}")
            except ReviewConflict as e:
                raise HTTPException(status_code=409, detail=str(e))
            rt.save()
        return {
            "schema_version": SCHEMA_VERSION,
            "entry": {"id": entry.id, "status": entry.status,
                      "quality": entry.quality},
            "advisory": advisory,
        }

    @app.post("/tasks/{task_id}/testdata", dependencies=[Depends(require_lecturer)])
    def testdata(task_id: str, body: TestDataBody):
        rt = store.get(task_id)
        with rt.lock:
            try:
                report = recheck_pool(rt.task, rt.pool.recheck_entries(), body.rows)
            except ProvisionError as e:
                raise HTTPException(status_code=400, detail=str(e))
            applied = False
            if not body.dry_run:
                rt.task.hidden_sql = (rt.task.hidden_sql.rstrip("\n") + "\n"
                                      + body.rows).strip("\n") + "\n"
                rt.save()
                applied = True
        return {
            "schema_version": SCHEMA_VERSION,
            "applied": applied,
            "flips": [{"entry_id": f.entry_id, "old": f.old, "new": f.new}
                      for f in report.flips],
            "warnings": list(report.warnings),
        }

    @app.get("/tasks/{task_id}/analytics", dependencies=[Depends(require_lecturer)])
    def analytics(task_id: str, kind: str, mode: str = "multi_ref",
                  thresholds: str = "0,5,10,15,20,25,30,35,40,45,50"):
        rt = store.get(task_id)
        records = []
        counters: dict = {}
        for timestamp, student, tid, verdict_kind, sql in bundle_io.read_submission_log(rt.directory):
            idx = counters.get((student, tid), 0)
            counters[(student, tid)] = idx + 1
            records.append(SubmissionRecord(student, tid, idx, timestamp, sql, verdict_kind))
        correct = [r for r in records if r.verdict == CORRECT]
        if kind == "curve":
            ts = [int(t) for t in thresholds.split(",")]
            curve = reduction_curve(correct, ts)
            return {"schema_version": SCHEMA_VERSION,
                    "curve": [{"threshold": t, "surviving": curve[t]} for t in ts]}
        if kind == "harmonized":
            return {
                "schema_version": SCHEMA_VERSION,
                "harmonized": harmonization_reduction(rt.task, correct),
                "distinct": reduction_curve(correct, [0])[0],
            }
        if kind == "metrics":
            if mode not in ("single_ref", "multi_ref"):
                raise HTTPException(status_code=400, detail=f"unknown mode {mode}")
            m = learning_metrics(records, rt.task, rt.pool, mode)
            return {
                "schema_version": SCHEMA_VERSION,
                "mode": m.mode,
                "pairs": m.pairs,
                "backward_moves": m.backward_moves,
                "sideways_moves": m.sideways_moves,
                "progress_moves": m.progress_moves,
                "avg_trials_to_progress": m.avg_trials_to_progress,
            }
        raise HTTPException(status_code=400, detail=f"unknown analytics kind {kind!r}")

    if static_dir:
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=static_dir, html=True), name="static")

    return app
