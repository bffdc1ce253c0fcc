"""Command-line interface over task bundles."""
from __future__ import annotations

import argparse
import json
import sys
from datetime import datetime, timezone
from pathlib import Path

from . import bundle as bundle_io
from .analytics import (
    SubmissionRecord,
    harmonization_reduction,
    learning_metrics,
    reduction_curve,
)
from .checker import CORRECT, ProvisionError, provision, recheck_pool, run_select, verdict
from .config import EngineConfig, Task
from .feedback import generate_feedback
from .parser import ParseError, parse, parse_schema
from .pool import GOOD, POOR, PoolState, ReviewConflict, UnknownEntry
from .seedgen import suggest_seed

SEED_HELP = (
    "The suggested seed dataset fills every table with a handful of distinct "
    "rows (foreign keys satisfied) and, for each equality or range predicate "
    "in the lecturer solution, pins at least one matching and one "
    "non-matching row so the solution returns a non-empty result. Review and "
    "edit seed.sql before publishing the task."
)


def _fail(message: str, code: int = 1):
    print(f"error: {message}", file=sys.stderr)
    raise SystemExit(code)


def _load(directory):
    try:
        return bundle_io.load_bundle(directory)
    except FileNotFoundError as e:
        _fail(f"not a task bundle: {directory} ({e})")
    except ValueError as e:
        _fail(str(e))


def _timestamp():
    return datetime.now(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


def cmd_new_task(args):
    schema_sql = Path(args.schema).read_text(encoding="utf-8")
    solution_sql = Path(args.solution).read_text(encoding="utf-8").strip()
    try:
        schema = parse_schema(schema_sql)
        solution_tree = parse(solution_sql, schema)
    except (ParseError, ValueError) as e:
        _fail(f"cannot create task: {e}")
    if args.seed:
        seed_sql = Path(args.seed).read_text(encoding="utf-8")
    else:
        seed_sql = suggest_seed(schema, solution_tree)
    task = Task(
        id=args.id or Path(args.dir).name,
        description=args.description,
        schema_sql=schema_sql,
        seed_sql=seed_sql,
        hidden_sql=args.hidden and Path(args.hidden).read_text(encoding="utf-8") or "",
        reference_sql=solution_sql,
        output_order_required=args.order_required,
        config=EngineConfig(),
    )
    try:
        with provision(task) as sandbox:
            rs = run_select(sandbox, solution_sql, schema)
    except (ProvisionError, ParseError, Exception) as e:  # noqa: BLE001
        _fail(f"lecturer solution does not run on the seed data: {e}")
    if not rs.rows:
        print("warning: lecturer solution returns no rows on the suggested "
              "seed data; edit seed.sql", file=sys.stderr)
    pool = PoolState.for_task(task)
    bundle_io.save_bundle(args.dir, task, pool)
    print(f"created task bundle {args.dir} (task id {task.id})")
    if not args.seed:
        print(f"seed suggestion written to {Path(args.dir) / 'seed.sql'}")


def _print_report(report, as_json=False):
    if as_json:
        print(json.dumps(report.to_dict(), indent=2, sort_keys=True))
        return
    print(f"verdict: {report.verdict.kind}"
          + (f" ({report.verdict.detail})" if report.verdict.detail else ""))
    if report.closest_ref:
        print(f"closest reference: {report.closest_ref}")
    if report.distance is not None:
        print(f"distance: {report.distance.total}")
    if report.note:
        print(f"note: {report.note}")
    for h in report.hints:
        token = f": {h.token}" if h.token else ""
        print(f"  [{h.category}] {h.clause} {h.kind}{token}")


def cmd_eval(args):
    task, pool = _load(args.dir)
    submission = Path(args.submission).read_text(encoding="utf-8")
    mode = "single_ref" if args.mode == "single" else "multi_ref"
    report = generate_feedback(task, pool, submission, mode)
    _print_report(report, args.json)
    return 0


def cmd_batch(args):
    task, pool = _load(args.dir)
    lines = Path(args.corpus).read_text(encoding="utf-8").splitlines()
    for line in lines:
        if not line.strip():
            continue
        timestamp, student, task_id, _, sql = bundle_io.parse_log_line(line)
        v = verdict(task, sql)
        bundle_io.append_submission(args.dir, timestamp or _timestamp(),
                                    student, task.id, v.kind, sql)
        if v.kind == CORRECT:
            event = pool.ingest_correct(task, sql)
            note = f" ({event.note})" if event.note else ""
            print(f"{student}: {event.kind} {event.ref_id}{note}")
        else:
            print(f"{student}: {v.kind}")
    bundle_io.save_bundle(args.dir, task, pool)


def cmd_pool(args):
    task, pool = _load(args.dir)
    if args.action == "list":
        for row in pool.list_candidates():
            pending = " [pending]" if row["pending"] else ""
            print(f"{row['id']}  {row['status']}/{row['quality']}{pending}  "
                  f"{row['note'] or '-'}  |  {row['sql']}")
        return
    decision = {"accept": "accept", "reject": "reject_wrong", "delete": "delete"}[args.action]
    quality = POOR if getattr(args, "poor", False) else GOOD
    try:
        entry, advisory = pool.review(args.entry, decision, quality)
    except UnknownEntry:
        _fail(f"no such pool entry: {args.entry}", 2)
    except ReviewConflict as e:
        _fail(str(e), 3)
    bundle_io.save_bundle(args.dir, task, pool)
    print(f"{entry.id} -> {entry.status} ({entry.quality})")
    if advisory:
        print(f"advisory: {advisory}")


def cmd_recheck(args):
    task, pool = _load(args.dir)
    rows_sql = Path(args.data).read_text(encoding="utf-8")
    try:
        report = recheck_pool(task, pool.recheck_entries(), rows_sql)
    except ProvisionError as e:
        _fail(str(e))
    for flip in report.flips:
        print(f"{flip.entry_id}: {flip.old} -> {flip.new}")
    if not report.flips:
        print("no verdict flips")
    for w in report.warnings:
        print(f"warning: {w}")
    if not args.dry_run:
        task.hidden_sql = (task.hidden_sql.rstrip("\n") + "\n" + rows_sql).strip("\n") + "\n"
        bundle_io.save_bundle(args.dir, task, pool)
        print("counterexample data appended to hidden.sql")


def _corpus_records(directory, task):
    records = []
    counters = {}
    for timestamp, student, task_id, verdict_kind, sql in bundle_io.read_submission_log(directory):
        idx = counters.get((student, task_id), 0)
        counters[(student, task_id)] = idx + 1
        records.append(SubmissionRecord(student, task_id, idx, timestamp, sql,
                                        verdict_kind))
    return records


def cmd_analyze(args):
    task, pool = _load(args.dir)
    records = _corpus_records(args.dir, task)
    if args.curve:
        thresholds = [int(t) for t in args.thresholds.split(",")]
        correct = [r for r in records if r.verdict == CORRECT]
        curve = reduction_curve(correct, thresholds)
        print("threshold\tsurviving")
        for t in thresholds:
            print(f"{t}\t{curve[t]}")
    elif args.harmonized:
        correct = [r for r in records if r.verdict == CORRECT]
        print("task\tmethod\tcount")
        print(f"{task.id}\tharmonized\t{harmonization_reduction(task, correct)}")
        print(f"{task.id}\tdistinct\t{reduction_curve(correct, [0])[0]}")
    elif args.metrics:
        mode = "single_ref" if args.metrics == "single" else "multi_ref"
        m = learning_metrics(records, task, pool, mode)
        print(f"mode\t{m.mode}")
        print(f"pairs\t{m.pairs}")
        print(f"backward_moves\t{m.backward_moves}")
        print(f"sideways_moves\t{m.sideways_moves}")
        print(f"progress_moves\t{m.progress_moves}")
        print(f"avg_trials_to_progress\t{m.avg_trials_to_progress:.2f}")
    else:
        _fail("choose one of --curve, --harmonized, --metrics")


def cmd_serve(args):
    import uvicorn

    from .service import create_app

    host, _, port = args.listen.rpartition(":")
    app = create_app(args.dirs, token=args.token, static_dir=args.static)
    uvicorn.run(app, host=host or "127.0.0.1", port=int(port))


def build_parser():
    p = argparse.ArgumentParser(
        prog="sqltutor",
        description="Hybrid SQL tutoring engine over task bundles.")
    sub = p.add_subparsers(dest="command", required=True)

    np = sub.add_parser("new-task", help="scaffold a task bundle",
                        epilog=SEED_HELP)
    np.add_argument("dir")
    np.add_argument("--schema", required=True, help="DDL file")
    np.add_argument("--solution", required=True, help="lecturer solution file")
    np.add_argument("--description", default="")
    np.add_argument("--id", default=None)
    np.add_argument("--seed", default=None, help="seed rows file (default: suggested)")
    np.add_argument("--hidden", default=None, help="hidden rows file")
    np.add_argument("--order-required", action="store_true")
    np.set_defaults(fn=cmd_new_task)

    ep = sub.add_parser("eval", help="grade one submission")
    ep.add_argument("dir")
    ep.add_argument("submission")
    ep.add_argument("--mode", choices=("single", "multi"), default="multi")
    ep.add_argument("--json", action="store_true")
    ep.set_defaults(fn=cmd_eval)

    bp = sub.add_parser("batch", help="grade a corpus log and grow the pool")
    bp.add_argument("dir")
    bp.add_argument("corpus", help="TSV: timestamp, student, task, verdict, sql")
    bp.set_defaults(fn=cmd_batch)

    pp = sub.add_parser("pool", help="review the reference pool")
    pp.add_argument("dir")
    psub = pp.add_subparsers(dest="action", required=True)
    psub.add_parser("list")
    for action in ("accept", "reject", "delete"):
        ap = psub.add_parser(action)
        ap.add_argument("entry")
        if action == "accept":
            ap.add_argument("--poor", action="store_true",
                            help="accept as a poor-quality reference")
    pp.set_defaults(fn=cmd_pool)

    rp = sub.add_parser("recheck", help="apply counterexample data and re-grade")
    rp.add_argument("dir")
    rp.add_argument("--data", required=True, help="SQL file with new rows")
    rp.add_argument("--dry-run", action="store_true")
    rp.set_defaults(fn=cmd_recheck)

    an = sub.add_parser("analyze", help="corpus analytics")
    an.add_argument("dir")
    an.add_argument("--curve", action="store_true")
    an.add_argument("--thresholds", default="0,5,10,15,20,25,30,35,40,45,50")
    an.add_argument("--harmonized", action="store_true")
    an.add_argument("--metrics", choices=("single", "multi"), default=None)
    an.set_defaults(fn=cmd_analyze)

    sp = sub.add_parser("serve", help="start the HTTP service")
    sp.add_argument("dirs", nargs="+")
    sp.add_argument("--listen", default="127.0.0.1:8000")
    sp.add_argument("--token", default="lecturer-token")
    sp.add_argument("--static", default=None, help="directory of frontend assets")
    sp.set_defaults(fn=cmd_serve)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args) or 0
    except SystemExit:
        raise
    except (ParseError, ProvisionError, ValueError) as e:
        _fail(str(e))


if __name__ == "__main__":
    sys.exit(main())
