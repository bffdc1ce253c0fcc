import pytest

from golden_pairs import TABLE1_PAIR, TABLE3_PAIR
from sqltutor.distance import total_distance
from sqltutor.pool import (
    ACTIVE,
    CANDIDATE,
    DELETED,
    GOOD,
    POOR,
    PoolState,
    REJECTED_WRONG,
    ReviewConflict,
    UnknownEntry,
)

SUBQUERY_STYLE = ("SELECT name FROM user WHERE id IN "
                  "(SELECT id FROM user WHERE age BETWEEN 18 AND 65)")


class TestIngest:
    def test_lecturer_twin_is_duplicate(self, golden_task):
        pool = PoolState.for_task(golden_task)
        event = pool.ingest_correct(golden_task, golden_task.reference_sql)
        assert event.kind == "Duplicate" and event.ref_id == "r0000"
        assert pool.get("r0000").match_count == 1

    def test_table1_variant_is_duplicate(self, golden_task):
        pool = PoolState.for_task(golden_task)
        event = pool.ingest_correct(golden_task, TABLE1_PAIR[1])
        assert event.kind == "Duplicate"

    def test_new_style_auto_accepted_with_note(self, golden_task):
        pool = PoolState.for_task(golden_task)
        event = pool.ingest_correct(golden_task, SUBQUERY_STYLE)
        assert event.kind == "AutoAccepted"
        assert "C2 differences" in event.note
        entry = pool.get(event.ref_id)
        assert entry.status == ACTIVE and not entry.reviewed

    def test_near_variant_becomes_candidate(self, golden_task):
        # a pure group-by ordering difference scores c3 = 1, total 1,
        # below the auto-accept threshold of 2
        task = golden_task
        task.reference_sql = ("SELECT division, age, COUNT(*) FROM employees "
                              "GROUP BY division, age")
        pool = PoolState.for_task(task)
        event = pool.ingest_correct(
            task,
            "SELECT division, age, COUNT(*) FROM employees GROUP BY age, division")
        assert event.kind == "CandidateCreated"
        assert pool.get(event.ref_id).status == CANDIDATE

    def test_canonical_uniqueness_invariant(self, golden_task):
        pool = PoolState.for_task(golden_task)
        for sql in (TABLE1_PAIR[1], SUBQUERY_STYLE, SUBQUERY_STYLE,
                    golden_task.reference_sql):
            pool.ingest_correct(golden_task, sql)
        live = [e for e in pool.entries if e.status in (ACTIVE, CANDIDATE)]
        for i, a in enumerate(live):
            for b in live[i + 1:]:
                assert total_distance(a.canonical, b.canonical).total > 0


class TestReview:
    def test_accept_good(self, golden_task):
        pool = PoolState.for_task(golden_task)
        event = pool.ingest_correct(golden_task, SUBQUERY_STYLE)
        entry, advisory = pool.review(event.ref_id, "accept", GOOD)
        assert entry.status == ACTIVE and entry.quality == GOOD and entry.reviewed
        assert advisory is None

    def test_accept_poor(self, golden_task):
        pool = PoolState.for_task(golden_task)
        event = pool.ingest_correct(golden_task, SUBQUERY_STYLE)
        entry, _ = pool.review(event.ref_id, "accept", POOR)
        assert entry.quality == POOR
        assert entry in pool.references("multi_ref")

    def test_reject_wrong_moves_to_store_with_advisory(self, york_task):
        pool = PoolState.for_task(york_task)
        event = pool.ingest_correct(york_task, TABLE3_PAIR[1])
        assert event.kind in ("CandidateCreated", "AutoAccepted")
        entry, advisory = pool.review(event.ref_id, "reject_wrong")
        assert entry.status == REJECTED_WRONG
        assert entry in pool.wrong_store()
        assert "test rows" in advisory
        # disjoint from the reference pool
        assert entry not in pool.references("multi_ref")

    def test_delete_remembered_for_dedup(self, golden_task):
        pool = PoolState.for_task(golden_task)
        event = pool.ingest_correct(golden_task, SUBQUERY_STYLE)
        pool.review(event.ref_id, "delete")
        assert pool.get(event.ref_id).status == DELETED
        again = pool.ingest_correct(golden_task, SUBQUERY_STYLE)
        assert again.kind == "Duplicate" and again.ref_id == event.ref_id

    def test_wrong_store_remembered_for_dedup(self, york_task):
        pool = PoolState.for_task(york_task)
        event = pool.ingest_correct(york_task, TABLE3_PAIR[1])
        pool.review(event.ref_id, "reject_wrong")
        again = pool.ingest_correct(york_task, TABLE3_PAIR[1])
        assert again.kind == "Duplicate"

    def test_unknown_entry(self, golden_task):
        pool = PoolState.for_task(golden_task)
        with pytest.raises(UnknownEntry):
            pool.review("r9999", "accept")

    def test_double_review_conflicts(self, golden_task):
        pool = PoolState.for_task(golden_task)
        event = pool.ingest_correct(golden_task, SUBQUERY_STYLE)
        pool.review(event.ref_id, "delete")
        with pytest.raises(ReviewConflict):
            pool.review(event.ref_id, "delete")


class TestDashboard:
    def test_fresh_task_shows_lecturer_row(self, golden_task):
        pool = PoolState.for_task(golden_task)
        rows = pool.list_candidates()
        assert len(rows) == 1
        assert rows[0]["note"] == "Lecturer solution"
        assert rows[0]["id"] == "r0000"

    def test_candidate_rows_have_notes(self, golden_task):
        pool = PoolState.for_task(golden_task)
        pool.ingest_correct(golden_task, SUBQUERY_STYLE)
        rows = pool.list_candidates()
        assert len(rows) == 2
        assert rows[1]["note"] != ""
        assert rows[1]["pending"]

    def test_sql_prefix_truncated(self, golden_task):
        pool = PoolState.for_task(golden_task)
        pool.ingest_correct(golden_task, SUBQUERY_STYLE)
        assert all(len(r["sql"]) <= 60 for r in pool.list_candidates())

    def test_deleted_and_wrong_not_listed(self, york_task):
        pool = PoolState.for_task(york_task)
        event = pool.ingest_correct(york_task, TABLE3_PAIR[1])
        pool.review(event.ref_id, "reject_wrong")
        ids = [r["id"] for r in pool.list_candidates()]
        assert event.ref_id not in ids


class TestPoolSize:
    def test_k_canonical_classes_yield_k_entries(self, golden_task):
        # four classes; the lecturer solution's class is class 1
        corpus = [
            TABLE1_PAIR[1],                                           # class 1
            "SELECT name FROM user WHERE age >= 18 AND age <= 65",    # class 1
            SUBQUERY_STYLE,                                           # class 2
            "SELECT name FROM user WHERE id IN "
            "(SELECT id FROM user WHERE 18 <= age AND age <= 65)",    # class 2
            "SELECT name FROM user WHERE age BETWEEN 18 AND 65 "
            "AND name IS NOT NULL",                                   # class 3
            "SELECT name FROM user WHERE NOT (age < 18 OR age > 65)", # class 4
        ]
        pool = PoolState.for_task(golden_task)
        for sql in corpus:
            pool.ingest_correct(golden_task, sql)
        non_duplicates = [e for e in pool.entries]
        assert len(non_duplicates) == 4
