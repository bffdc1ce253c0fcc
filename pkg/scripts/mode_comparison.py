#!/usr/bin/env python3
"""Single- versus multi-reference grading on a constructed learning path.

A student iterates toward a subquery-style solution while the lecturer
solution is join-style.  With only the lecturer reference, intermediate
fixes register as sideways moves; with the learned second reference the
same steps register as progress.
"""
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from sqltutor.analytics import SubmissionRecord, learning_metrics
from sqltutor.config import Task
from sqltutor.pool import PoolState

SCHEMA = """
CREATE TABLE user (id INTEGER PRIMARY KEY, name TEXT, age INTEGER);
CREATE TABLE admin (uid INTEGER REFERENCES user(id), level INTEGER);
"""
SEED = """
INSERT INTO user VALUES (1, 'nora', 18), (2, 'omar', 40), (3, 'pia', 66);
INSERT INTO admin VALUES (1, 5), (3, 1);
"""

TASK = Task(id="admins", description="names of users who are admins",
            schema_sql=SCHEMA, seed_sql=SEED, hidden_sql="",
            reference_sql="SELECT name FROM user INNER JOIN admin "
                          "ON user.id = admin.uid")

LEARNED = "SELECT name FROM user WHERE id IN (SELECT uid FROM admin)"

STEPS = [
    "SELECT surname FROM user WHERE id IN (SELECT wrong FROM admin)",
    "SELECT surname FROM user WHERE id IN (SELECT uid FROM admin)",
    "SELECT name FROM user WHERE id IN (SELECT uid FROM admin)",
]


def main():
    pool = PoolState.for_task(TASK)
    event = pool.ingest_correct(TASK, LEARNED)
    print(f"lecturer reference: {TASK.reference_sql}")
    print(f"learned reference ({event.kind}): {LEARNED}\n")
    print("student steps:")
    for i, s in enumerate(STEPS):
        print(f"  {i}: {s}")

    records = [SubmissionRecord("s1", TASK.id, i, "", s)
               for i, s in enumerate(STEPS)]
    print(f"\n{'':<24}{'single_ref':>12}{'multi_ref':>12}")
    single = learning_metrics(records, TASK, pool, "single_ref")
    multi = learning_metrics(records, TASK, pool, "multi_ref")
    for label, attr in [("backward moves", "backward_moves"),
                        ("sideways moves", "sideways_moves"),
                        ("progress moves", "progress_moves")]:
        print(f"{label:<24}{getattr(single, attr):>12}{getattr(multi, attr):>12}")
    print(f"{'avg trials to progress':<24}"
          f"{single.avg_trials_to_progress:>12.2f}"
          f"{multi.avg_trials_to_progress:>12.2f}")


if __name__ == "__main__":
    main()
