#!/usr/bin/env python3
"""Walk the counterexample workflow end to end on a throwaway task.

A student's LIKE-based query returns the right rows on the base data, so it
grades Correct and lands in the pool.  The lecturer marks it wrong, follows
the advisory to add a distinguishing row, and the re-check flips it.
"""
import sys
import tempfile
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from sqltutor.bundle import save_bundle
from sqltutor.checker import recheck_pool, verdict
from sqltutor.config import Task
from sqltutor.feedback import generate_feedback
from sqltutor.pool import PoolState

TASK = Task(
    id="york",
    description="Names of all hotels in the city of York",
    schema_sql="CREATE TABLE hotels (hotel_id INTEGER PRIMARY KEY, "
               "name TEXT, location TEXT);",
    seed_sql="INSERT INTO hotels VALUES (1, 'Minster View', 'York'), "
             "(2, 'Royal Garden', 'London'), (3, 'Ouse Bank', 'York');",
    hidden_sql="",
    reference_sql="SELECT name FROM hotels WHERE location = 'York'",
)

LIKE_SUBMISSION = "SELECT name FROM hotels WHERE location LIKE '%York%'"


def main():
    pool = PoolState.for_task(TASK)
    print(f"reference: {TASK.reference_sql}")
    print(f"student submits: {LIKE_SUBMISSION}")
    v = verdict(TASK, LIKE_SUBMISSION)
    print(f"  -> dynamic verdict on base data: {v.kind}")

    event = pool.ingest_correct(TASK, LIKE_SUBMISSION)
    print(f"  -> pool event: {event.kind} {event.ref_id} ({event.note})")
    print("dashboard rows:")
    for row in pool.list_candidates():
        print(f"  {row['id']}  {row['note'] or '-':<24} {row['sql']}")

    entry, advisory = pool.review(event.ref_id, "reject_wrong")
    print(f"lecturer marks {entry.id} wrong")
    print(f"  advisory: {advisory}")

    counterexample = "INSERT INTO hotels VALUES (4, 'Liberty Inn', 'New York');"
    print(f"lecturer adds: {counterexample}")
    report = recheck_pool(TASK, pool.recheck_entries(), counterexample)
    for flip in report.flips:
        print(f"  flip: {flip.entry_id} {flip.old} -> {flip.new}")

    TASK.hidden_sql = counterexample
    feedback = generate_feedback(TASK, pool, LIKE_SUBMISSION)
    print(f"same submission now grades: {feedback.verdict.kind}")
    for h in feedback.hints:
        print(f"  hint [{h.category}] {h.clause} {h.kind}: {h.token}")

    with tempfile.TemporaryDirectory() as tmp:
        save_bundle(Path(tmp) / "york", TASK, pool)
        print(f"bundle saved under {tmp}/york (schema, seed, hidden, refs, wrong)")


if __name__ == "__main__":
    main()
