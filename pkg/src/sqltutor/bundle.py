"""On-disk task bundles.

Layout::

    <dir>/
      task.json          metadata + configuration
      schema.sql         DDL
      seed.sql           visible seed rows
      hidden.sql         hidden test rows (never served to students)
      refs/<id>.sql      one file per reference + <id>.json sidecar
      wrong/<id>.sql     wrong-solution store, same sidecar shape
      submissions.log    append-only TSV records

Loading then saving an unchanged bundle is byte-stable.
"""
from __future__ import annotations

import json
import re
from pathlib import Path

from .config import EngineConfig, Task
from .pool import (
    ACTIVE,
    PoolState,
    REJECTED_WRONG,
    ReferenceSolution,
    _harmonize_for,
)

SCHEMA_VERSION = 1


def _dump_json(data) -> str:
    return json.dumps(data, indent=2, sort_keys=True) + "\n"


def _write(path: Path, text: str):
    path.write_text(text, encoding="utf-8")


def escape_sql_field(sql: str) -> str:
    return sql.replace("\\", "\\\\").replace("\t", "\\t").replace("\n", "\\n")


def unescape_sql_field(s: str) -> str:
    return re.sub(r"\\(.)", lambda m: {"t": "\t", "n": "\n", "\\": "\\"}.get(
        m.group(1), m.group(1)), s)


def format_log_line(timestamp: str, student: str, task_id: str,
                    verdict_kind: str, sql: str) -> str:
    return "\t".join((timestamp, student, task_id, verdict_kind,
                      escape_sql_field(sql)))


def parse_log_line(line: str):
    parts = line.rstrip("\n").split("\t")
    if len(parts) != 5:
        raise ValueError(f"malformed submissions.log line: {line!r}")
    timestamp, student, task_id, verdict_kind, sql = parts
    return timestamp, student, task_id, verdict_kind, unescape_sql_field(sql)


def save_bundle(directory, task: Task, pool: PoolState):
    root = Path(directory)
    root.mkdir(parents=True, exist_ok=True)
    _write(root / "task.json", _dump_json({
        "schema_version": SCHEMA_VERSION,
        "id": task.id,
        "description": task.description,
        "output_order_required": task.output_order_required,
        "config": task.config.to_dict(),
    }))
    _write(root / "schema.sql", task.schema_sql)
    _write(root / "seed.sql", task.seed_sql)
    _write(root / "hidden.sql", task.hidden_sql)
    refs_dir = root / "refs"
    wrong_dir = root / "wrong"
    refs_dir.mkdir(exist_ok=True)
    wrong_dir.mkdir(exist_ok=True)
    expected = {refs_dir: set(), wrong_dir: set()}
    for entry in sorted(pool.entries, key=lambda e: e.creation_order):
        target = wrong_dir if entry.status == REJECTED_WRONG else refs_dir
        expected[target].add(entry.id)
        _write(target / f"{entry.id}.sql", entry.raw_text + "\n")
        _write(target / f"{entry.id}.json", _dump_json({
            "id": entry.id,
            "origin": entry.origin,
            "quality": entry.quality,
            "status": entry.status,
            "creation_order": entry.creation_order,
            "match_count": entry.match_count,
            "reviewed": entry.reviewed,
            "note": entry.note,
        }))
    for directory_, keep in expected.items():
        for f in directory_.iterdir():
            if f.stem not in keep:
                f.unlink()
    log = root / "submissions.log"
    if not log.exists():
        _write(log, "")


def load_bundle(directory) -> tuple[Task, PoolState]:
    root = Path(directory)
    meta = json.loads((root / "task.json").read_text(encoding="utf-8"))
    config = EngineConfig.from_dict(meta.get("config", {}))
    lecturer_sql = None
    sidecars = []
    for sub in ("refs", "wrong"):
        d = root / sub
        if not d.is_dir():
            continue
        for sidecar in sorted(d.glob("*.json")):
            data = json.loads(sidecar.read_text(encoding="utf-8"))
            sql = (d / f"{data['id']}.sql").read_text(encoding="utf-8").rstrip("\n")
            sidecars.append((data, sql))
            if data["origin"] == "lecturer":
                lecturer_sql = sql
    if lecturer_sql is None:
        raise ValueError(f"bundle {directory} has no lecturer reference")
    task = Task(
        id=meta["id"],
        description=meta.get("description", ""),
        schema_sql=(root / "schema.sql").read_text(encoding="utf-8"),
        seed_sql=(root / "seed.sql").read_text(encoding="utf-8"),
        hidden_sql=(root / "hidden.sql").read_text(encoding="utf-8"),
        reference_sql=lecturer_sql,
        output_order_required=meta.get("output_order_required", False),
        config=config,
    )
    pool = PoolState()
    for data, sql in sorted(sidecars, key=lambda p: p[0]["creation_order"]):
        pool.entries.append(ReferenceSolution(
            id=data["id"],
            raw_text=sql,
            canonical=_harmonize_for(task, sql),
            quality=data["quality"],
            origin=data["origin"],
            status=data["status"],
            creation_order=data["creation_order"],
            match_count=data["match_count"],
            reviewed=data["reviewed"],
            note=data["note"],
        ))
    return task, pool


def append_submission(directory, timestamp: str, student: str, task_id: str,
                      verdict_kind: str, sql: str):
    log = Path(directory) / "submissions.log"
    with log.open("a", encoding="utf-8") as f:
        f.write(format_log_line(timestamp, student, task_id, verdict_kind, sql) + "\n")


def read_submission_log(directory):
    log = Path(directory) / "submissions.log"
    if not log.exists():
        return []
    records = []
    for line in log.read_text(encoding="utf-8").splitlines():
        if line.strip():
            records.append(parse_log_line(line))
    return records
