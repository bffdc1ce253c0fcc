import pytest

from golden_pairs import TABLE1_PAIR, TABLE3_PAIR
from sqltutor.checker import CORRECT, NON_EXECUTABLE, WRONG_RESULT
from sqltutor.distance import total_distance
from sqltutor.feedback import (
    Hint,
    NOTE_ADDITIONAL_ORDER_BY,
    NOTE_MISSING_CLAUSES,
    generate_feedback,
    note_summary,
    static_diff,
)
from sqltutor.harmonize import harmonize
from sqltutor.parser import parse
from sqltutor.pool import POOR, PoolState


def canon(sql, task):
    return harmonize(parse(sql), task.schema,
                     output_order_required=task.output_order_required)


class TestStaticDiff:
    def test_identical_trees_no_hints(self, york_task):
        tree = canon(york_task.reference_sql, york_task).tree
        assert static_diff(tree, tree) == []

    def test_york_pair_hints(self, york_task):
        sub = canon(TABLE3_PAIR[1], york_task).tree
        ref = canon(TABLE3_PAIR[0], york_task).tree
        hints = static_diff(sub, ref)
        kinds = {(h.category, h.clause, h.kind) for h in hints}
        assert ("C2", "where", "mismatch") in kinds  # = vs LIKE
        assert ("C1", "where", "mismatch") in kinds  # 'York' vs '%York%'
        tokens = {h.token for h in hints}
        assert "= vs LIKE" in tokens
        assert "'York' vs '%York%'" in tokens

    def test_bare_number_vs_reference_missing_clauses(self, golden_task):
        sub = canon("SELECT 14", golden_task).tree
        ref = canon("SELECT name FROM user WHERE age > 18", golden_task).tree
        hints = static_diff(sub, ref)
        missing_clauses = {h.clause for h in hints if h.kind in ("missing", "mismatch")}
        assert "from" in missing_clauses
        assert "where" in missing_clauses

    def test_hint_clauses_actually_differ(self, golden_task):
        sub = canon("SELECT name FROM user WHERE age > 20", golden_task).tree
        ref = canon("SELECT name, age FROM user WHERE age > 18 ORDER BY name",
                    golden_task).tree
        from sqltutor.nodes import extract_nodes
        sub_nodes, ref_nodes = extract_nodes(sub), extract_nodes(ref)
        for h in static_diff(sub, ref):
            in_sub = [(k, t) for c, k, t in sub_nodes if c == h.clause]
            in_ref = [(k, t) for c, k, t in ref_nodes if c == h.clause]
            assert in_sub != in_ref

    def test_terse_verbosity_hides_tokens(self, york_task):
        sub = canon(TABLE3_PAIR[1], york_task).tree
        ref = canon(TABLE3_PAIR[0], york_task).tree
        assert all(h.token == "" for h in static_diff(sub, ref, "terse"))


class TestNoteSummary:
    def test_missing_multiple_clauses(self, golden_task):
        ref = canon("SELECT AVG(col1) FROM (SELECT COUNT(id) AS col1 FROM user "
                    "GROUP BY age) t1", golden_task)
        sub = canon("SELECT 14", golden_task)
        d = total_distance(sub, ref)
        assert note_summary(d, sub.tree, ref.tree) == NOTE_MISSING_CLAUSES

    def test_additional_order_by(self, golden_task):
        task = golden_task
        task.output_order_required = True
        ref = canon("SELECT name FROM user", task)
        sub = canon("SELECT name FROM user ORDER BY name", task)
        d = total_distance(sub, ref)
        assert note_summary(d, sub.tree, ref.tree) == NOTE_ADDITIONAL_ORDER_BY

    def test_zero_breakdown_empty_note(self, golden_task):
        q = canon("SELECT name FROM user", golden_task)
        assert note_summary(total_distance(q, q), q.tree, q.tree) == ""


class TestGenerateFeedback:
    def test_correct_twin_no_hints(self, golden_task):
        pool = PoolState.for_task(golden_task)
        report = generate_feedback(golden_task, pool, TABLE1_PAIR[1])
        assert report.verdict.kind == CORRECT
        assert report.hints == []
        assert report.distance.total == 0
        assert report.closest_ref == "r0000"

    def test_rejected_short_circuits(self, golden_task):
        pool = PoolState.for_task(golden_task)
        report = generate_feedback(golden_task, pool, "DROP TABLE user")
        assert report.verdict.kind == "Rejected"
        assert report.closest_ref is None

    def test_parse_error_surfaces_parser_message(self, golden_task):
        pool = PoolState.for_task(golden_task)
        report = generate_feedback(golden_task, pool, "SELECT name FROM user WHERE (")
        assert report.verdict.kind == NON_EXECUTABLE
        assert "position" in report.verdict.detail

    def test_wrong_result_has_distance_note_hints(self, golden_task):
        pool = PoolState.for_task(golden_task)
        report = generate_feedback(golden_task, pool,
                                   "SELECT name FROM user WHERE age > 64")
        assert report.verdict.kind == WRONG_RESULT
        assert report.distance.total > 0
        assert report.hints

    def test_style_hint_on_correct_submission(self, golden_task):
        pool = PoolState.for_task(golden_task)
        report = generate_feedback(
            golden_task, pool,
            "SELECT name FROM user WHERE CAST(age AS int) BETWEEN 18 AND 65")
        assert report.verdict.kind == CORRECT
        assert any(h.category == "Style" for h in report.hints)

    def test_multi_ref_never_worse_than_single(self, golden_task):
        pool = PoolState.for_task(golden_task)
        pool.ingest_correct(
            golden_task,
            "SELECT name FROM user WHERE id IN "
            "(SELECT id FROM user WHERE age BETWEEN 18 AND 65)")
        subs = [
            "SELECT name FROM user WHERE id IN (SELECT id FROM user WHERE age > 17)",
            "SELECT name FROM user WHERE age > 18",
            "SELECT id FROM user",
        ]
        for sql in subs:
            multi = generate_feedback(golden_task, pool, sql, "multi_ref")
            single = generate_feedback(golden_task, pool, sql, "single_ref")
            assert multi.distance.total <= single.distance.total

    def test_poor_quality_match_notes_improvement(self, golden_task):
        pool = PoolState.for_task(golden_task)
        event = pool.ingest_correct(
            golden_task,
            "SELECT name FROM user WHERE age BETWEEN 18 AND 65 AND id IS NOT NULL")
        pool.review(event.ref_id, "accept", POOR)
        report = generate_feedback(
            golden_task, pool,
            "SELECT name FROM user WHERE age BETWEEN 18 AND 65 AND id IS NOT NULL")
        assert report.verdict.kind == CORRECT
        assert "cleaner" in report.note

    def test_deterministic(self, golden_task):
        pool = PoolState.for_task(golden_task)
        a = generate_feedback(golden_task, pool, "SELECT name FROM user WHERE age > 64")
        b = generate_feedback(golden_task, pool, "SELECT name FROM user WHERE age > 64")
        assert a.to_dict() == b.to_dict()

    def test_unresolved_column_reported(self, golden_task):
        pool = PoolState.for_task(golden_task)
        report = generate_feedback(golden_task, pool, "SELECT wrongcol FROM user")
        assert report.verdict.kind == NON_EXECUTABLE
        assert any("wrongcol" in h.token for h in report.hints)

    def test_hint_cap_respected(self, golden_task):
        pool = PoolState.for_task(golden_task)
        report = generate_feedback(
            golden_task, pool,
            "SELECT id, name, age, id, name, age FROM user "
            "WHERE id > 1 AND name LIKE 'a%' AND age < 9 AND id <> 4 "
            "GROUP BY id, name, age ORDER BY id, name")
        assert len(report.hints) <= golden_task.config.hint_cap
