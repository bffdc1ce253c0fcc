"""Acceptance suite: one test per criterion, one printed PASS/FAIL line each.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the lines.
"""
import random
import sqlite3
import time
from collections import Counter
from fractions import Fraction
from itertools import permutations

import pytest

from golden_pairs import (
    DATA_SQL,
    PAIRS,
    SCHEMA_SQL,
    TABLE1_PAIR,
    TABLE3_PAIR,
    TABLE10_PAIR,
)
from sqltutor.analytics import (
    SubmissionRecord,
    harmonization_reduction,
    learning_metrics,
    reduction_curve,
)
from sqltutor.checker import CORRECT, WRONG_RESULT, recheck_pool, to_executable_sql, verdict
from sqltutor.cnf import cnf_to_expr, to_cnf, truth_equivalent
from sqltutor.config import Task
from sqltutor.distance import (
    hungarian,
    keyed_list_distance,
    levenshtein,
    total_distance,
    transposition_count,
)
from sqltutor.feedback import static_diff
from sqltutor.harmonize import harmonize
from sqltutor.joins import build_synthetic_db, join_distance
from sqltutor.nodes import (
    And,
    Atom,
    ColumnRef,
    FuncCall,
    InList,
    Join,
    Literal,
    Not,
    Or,
    OrderItem,
    QueryTree,
    SelectItem,
    Star,
    TableRef,
    and_,
    or_,
    serialize,
)
from sqltutor.parser import parse, parse_schema
from sqltutor.pool import PoolState

SCHEMA = parse_schema(SCHEMA_SQL)


def report(n, ok, detail=""):
    line = f"criterion {n:>2}: {'PASS' if ok else 'FAIL'}"
    if detail:
        line += f"  ({detail})"
    print(line)
    assert ok, line


def _flags_for(rule_id):
    return {"output_order_required": True} if rule_id == "R03" else {}


def test_criterion_01_table7_golden_suite():
    start = time.monotonic()
    failures = []
    for rule_id, left, right in PAIRS:
        flags = _flags_for(rule_id)
        cl = harmonize(parse(left), SCHEMA, **flags)
        cr = harmonize(parse(right), SCHEMA, **flags)
        if cl.tree != cr.tree or total_distance(cl, cr).total != 0:
            failures.append(rule_id)
    elapsed = time.monotonic() - start
    report(1, not failures and elapsed < 1.0,
           f"18 pairs, {elapsed:.2f}s{', failed: ' + ','.join(failures) if failures else ''}")


def test_criterion_02_table1_and_table3():
    cl = harmonize(parse(TABLE1_PAIR[0]), SCHEMA)
    cr = harmonize(parse(TABLE1_PAIR[1]), SCHEMA)
    table1_zero = total_distance(cl, cr).total == 0

    a = harmonize(parse(TABLE3_PAIR[0]), SCHEMA)
    b = harmonize(parse(TABLE3_PAIR[1]), SCHEMA)
    d = total_distance(a, b)
    where_nonzero = d.clauses["where"].c1 > 0

    hints = static_diff(b.tree, a.tree)
    have = {(h.category, h.clause, h.kind, h.token) for h in hints}
    documented = {("C1", "where", "mismatch", "'York' vs '%York%'"),
                  ("C2", "where", "mismatch", "= vs LIKE")}
    report(2, table1_zero and where_nonzero and documented <= have,
           f"table1 total=0: {table1_zero}, where c1={d.clauses['where'].c1}, "
           f"hints={sorted(h[3] for h in documented)}")


def test_criterion_03_join_oracle():
    db = build_synthetic_db(3)
    table5 = db.tables == ((1, 3, 5, 7), (2, 3, 6, 7), (4, 5, 6, 7))

    a = parse("SELECT * FROM t1 LEFT JOIN t2 ON t1.x=t2.x "
              "INNER JOIN t3 ON t2.x=t3.x").from_tree
    b = parse("SELECT * FROM t2 RIGHT JOIN t1 ON t1.x=t2.x "
              "INNER JOIN t3 ON t2.x=t3.x").from_tree
    table4_zero = join_distance(a, b) == 0

    left = parse("SELECT * FROM t1 LEFT JOIN t2 ON t1.x=t2.x").from_tree
    inner = parse("SELECT * FROM t1 INNER JOIN t2 ON t1.x=t2.x").from_tree
    left_vs_inner = join_distance(left, inner) == 1

    report(3, table5 and table4_zero and left_vs_inner,
           f"bitmask={table5}, table4=0: {table4_zero}, left-vs-inner=1: {left_vs_inner}")


def test_criterion_04_york_workflow(york_task):
    base_ok = verdict(york_task, TABLE3_PAIR[1]).kind == CORRECT
    pool = PoolState.for_task(york_task)
    pool.ingest_correct(york_task, TABLE3_PAIR[1])
    rep = recheck_pool(
        york_task, pool.recheck_entries(),
        "INSERT INTO hotels VALUES (4, 'Liberty Inn', 'New York');")
    one_flip = (len(rep.flips) == 1
                and rep.flips[0].old == CORRECT
                and rep.flips[0].new == WRONG_RESULT)
    report(4, base_ok and one_flip,
           f"base Correct: {base_ok}, flips: {[(f.entry_id, f.old, f.new) for f in rep.flips]}")


def test_criterion_05_levenshtein_table10():
    computed = levenshtein(*TABLE10_PAIR)
    ok = abs(computed - 35) <= 2
    report(5, ok, f"computed exact value = {computed}, paper value 35, tolerance ±2")


# ---------------------------------------------------------------------------
# Deterministic random query generator for the bulk property criteria

_COLS = {
    "customers": ["customer_id", "name", "city"],
    "orders": ["order_id", "customer_id", "invoice"],
    "employees": ["employee_id", "first_name", "last_name", "salary",
                  "division", "age", "div_id"],
    "user": ["id", "name", "age"],
}


def _rand_scalar(rng, table):
    k = rng.random()
    if k < 0.45:
        return ColumnRef(rng.choice(_COLS[table]),
                         table if rng.random() < 0.5 else None)
    if k < 0.7:
        return Literal("int", rng.randint(-50, 5000))
    if k < 0.8:
        return Literal("str", rng.choice(["x", "York", "a%b", "o'k"]))
    name = rng.choice(["COUNT", "SUM", "AVG", "MIN", "MAX", "ROUND"])
    if name == "COUNT" and rng.random() < 0.5:
        return FuncCall("COUNT", (Star(),))
    arg = ColumnRef(rng.choice(_COLS[table]))
    if name == "ROUND":
        return FuncCall("ROUND", (arg, Literal("int", rng.randint(0, 3))))
    return FuncCall(name, (arg,))


def _rand_atom(rng, table):
    col = ColumnRef(rng.choice(_COLS[table]),
                    table if rng.random() < 0.5 else None)
    op = rng.choice(["=", "<>", "<", "<=", ">", ">=", "LIKE", "BETWEEN",
                     "IS NULL", "IN"])
    if op == "IS NULL":
        return Atom("IS NULL", (col,))
    if op == "BETWEEN":
        return Atom("BETWEEN", (col, Literal("int", rng.randint(0, 50)),
                                Literal("int", rng.randint(51, 200))))
    if op == "IN":
        items = tuple(Literal("int", rng.randint(0, 9))
                      for _ in range(rng.randint(1, 3)))
        return Atom("IN", (col, InList(items)))
    if op == "LIKE":
        return Atom("LIKE", (col, Literal("str", rng.choice(["a%", "%b%", "_c"]))))
    return Atom(op, (col, Literal("int", rng.randint(-10, 100))))


def _rand_bool(rng, table, depth=0):
    if depth >= 2 or rng.random() < 0.4:
        return _rand_atom(rng, table)
    kind = rng.choice(["and", "or", "not"])
    if kind == "not":
        return Not(_rand_bool(rng, table, depth + 1))
    parts = [_rand_bool(rng, table, depth + 1)
             for _ in range(rng.randint(2, 3))]
    return and_(*parts) if kind == "and" else or_(*parts)


def _rand_tree(rng):
    table = rng.choice(sorted(_COLS))
    shape = rng.random()
    if shape < 0.6:
        from_node = TableRef(table, rng.choice([None, None, "t"]))
    elif shape < 0.8:
        from_node = Join("comma", TableRef("customers"), TableRef("orders"))
        table = "customers"
    else:
        kind = rng.choice(["inner", "left", "right", "cross"])
        cond = None
        if kind != "cross":
            cond = Atom("=", (ColumnRef("customer_id", "customers"),
                              ColumnRef("customer_id", "orders")))
        from_node = Join(kind, TableRef("customers"), TableRef("orders"), cond)
        table = "customers"
    items = []
    for _ in range(rng.randint(1, 3)):
        if rng.random() < 0.08:
            items.append(SelectItem(Star()))
        else:
            items.append(SelectItem(_rand_scalar(rng, table),
                                    rng.choice([None, None, None, "v1"])))
    where = _rand_bool(rng, table) if rng.random() < 0.7 else None
    group_by = ()
    having = None
    if rng.random() < 0.25:
        group_by = (ColumnRef(rng.choice(_COLS[table]), table),)
        if rng.random() < 0.5:
            having = Atom(">", (FuncCall("COUNT", (Star(),)),
                                Literal("int", rng.randint(0, 4))))
    order_by = ()
    if rng.random() < 0.3:
        direction = rng.choice(["asc", "desc"])
        order_by = (OrderItem(ColumnRef(rng.choice(_COLS[table]), table),
                              direction,
                              asc_explicit=direction == "asc" and rng.random() < 0.5),)
    return QueryTree(
        distinct=rng.random() < 0.2,
        select_items=tuple(items),
        from_tree=from_node,
        where_expr=where,
        group_by=group_by,
        having_expr=having,
        order_by=order_by,
        limit=rng.choice([None] * 4 + [0, 1, 5]),
    )


def test_criterion_06_roundtrip_and_idempotence_500():
    rng = random.Random(20260810)
    start = time.monotonic()
    failures = 0
    for _ in range(500):
        tree = _rand_tree(rng)
        if parse(serialize(tree)) != tree:
            failures += 1
            continue
        once = harmonize(tree, SCHEMA)
        twice = harmonize(once.tree, SCHEMA)
        if twice.tree != once.tree or twice.applied_rules:
            failures += 1
    elapsed = time.monotonic() - start
    report(6, failures == 0 and elapsed < 30.0,
           f"500 queries, {failures} failures, {elapsed:.1f}s")


def test_criterion_07_cnf_truth_equivalence_exhaustive():
    rng = random.Random(42)
    names = ["p", "q", "r", "s", "u"]  # at most 5 distinct atoms

    def formula(depth=0):
        if depth >= 3 or rng.random() < 0.35:
            return Atom("=", (ColumnRef(rng.choice(names)),
                              Literal("int", rng.randint(1, 2))))
        kind = rng.choice(["and", "or", "not"])
        if kind == "not":
            return Not(formula(depth + 1))
        parts = [formula(depth + 1) for _ in range(rng.randint(2, 3))]
        return and_(*parts) if kind == "and" else or_(*parts)

    checked = failures = 0
    while checked < 220:
        expr = formula()
        try:
            f = to_cnf(expr, atom_cap=512)
        except Exception:
            continue
        checked += 1
        if not truth_equivalent(expr, cnf_to_expr(f)):
            failures += 1
    report(7, failures == 0, f"{checked} formulas exhaustively checked, {failures} failures")


def _bfs_min_swaps(perm):
    from collections import deque

    target = tuple(sorted(perm))
    start = tuple(perm)
    if start == target:
        return 0
    seen = {start}
    queue = deque([(start, 0)])
    while queue:
        state, depth = queue.popleft()
        for i in range(len(state)):
            for j in range(i + 1, len(state)):
                nxt = list(state)
                nxt[i], nxt[j] = nxt[j], nxt[i]
                nxt = tuple(nxt)
                if nxt == target:
                    return depth + 1
                if nxt not in seen:
                    seen.add(nxt)
                    queue.append((nxt, depth + 1))
    raise AssertionError


def test_criterion_08_oracle_equivalence():
    mismatches = 0
    count_perms = 0
    for n in range(1, 7):
        for perm in permutations(range(n)):
            count_perms += 1
            if transposition_count(list(perm)) != _bfs_min_swaps(perm):
                mismatches += 1

    rng = random.Random(4242)
    count_matrices = 0
    for _ in range(120):
        n = rng.randint(1, 4)
        cost = [[Fraction(rng.randint(0, 40), rng.randint(1, 3))
                 for _ in range(n)] for _ in range(n)]
        _, total = hungarian(cost)
        brute = min(sum(cost[i][p[i]] for i in range(n))
                    for p in permutations(range(n)))
        count_matrices += 1
        if total != brute:
            mismatches += 1
    report(8, mismatches == 0,
           f"{count_perms} permutations + {count_matrices} assignment matrices, "
           f"{mismatches} mismatches")


def test_criterion_09_semantic_preservation():
    conn = sqlite3.connect(":memory:")
    conn.executescript(SCHEMA_SQL)
    conn.executescript(DATA_SQL)

    def lax(rows):
        def cell(v):
            if isinstance(v, float) and v.is_integer():
                return repr(int(v))
            return repr(v)
        return Counter(tuple(sorted(cell(c) for c in row)) for row in rows)

    failures = []
    for rule_id, left, right in PAIRS:
        flags = _flags_for(rule_id)
        harmonized = harmonize(parse(left), SCHEMA, **flags).tree
        results = []
        for sql in (left, right, serialize(harmonized)):
            rows = conn.execute(to_executable_sql(parse(sql), SCHEMA)).fetchall()
            results.append(lax(rows))
        if not (results[0] == results[1] == results[2]) or not results[0]:
            failures.append(rule_id)
    conn.close()
    report(9, not failures,
           f"18 pairs executed{', failed: ' + ','.join(failures) if failures else ''}")


def test_criterion_10_pool_determinism(tmp_path, york_task):
    from sqltutor.bundle import save_bundle
    from sqltutor.config import Task

    variants = [
        "SELECT name FROM hotels WHERE location = 'York'",
        "SELECT name FROM hotels WHERE location IN ('York')",
        "SELECT hotels.name FROM hotels WHERE 'York' = location",
        "SELECT name FROM hotels WHERE location = 'York' AND name IS NOT NULL",
        "SELECT name FROM hotels WHERE location = 'York' ORDER BY name",
        TABLE3_PAIR[1].rstrip(";"),
        "SELECT name FROM hotels h WHERE h.location = 'York'",
        "SELECT name FROM hotels WHERE NOT location <> 'York'",
        "SELECT name FROM hotels WHERE location LIKE 'York'",
        "SELECT name FROM hotels WHERE hotel_id IN "
        "(SELECT hotel_id FROM hotels WHERE location = 'York')",
    ]
    log = [variants[i % len(variants)] for i in range(50)]

    def run(directory):
        pool = PoolState.for_task(york_task)
        for sql in log:
            if verdict(york_task, sql).kind == CORRECT:
                pool.ingest_correct(york_task, sql)
        save_bundle(directory, york_task, pool)
        files = sorted((directory / "refs").glob("*"))
        return [(f.name, f.read_bytes()) for f in files]

    state_a = run(tmp_path / "a")
    state_b = run(tmp_path / "b")
    byte_identical = state_a == state_b

    # a corpus of exactly 4 canonical classes yields exactly 4 entries
    golden = Task(id="g", description="", schema_sql=SCHEMA_SQL,
                  seed_sql=DATA_SQL, hidden_sql="",
                  reference_sql="SELECT name FROM user WHERE age BETWEEN 18 AND 65")
    corpus4 = [
        "SELECT name FROM user WHERE 18 <= age AND age <= 65",        # class 1
        "SELECT name FROM user WHERE age >= 18 AND age <= 65",        # class 1
        "SELECT name FROM user WHERE id IN "
        "(SELECT id FROM user WHERE age BETWEEN 18 AND 65)",          # class 2
        "SELECT name FROM user WHERE age BETWEEN 18 AND 65 "
        "AND name IS NOT NULL",                                       # class 3
        "SELECT name FROM user WHERE NOT (age < 18 OR age > 65)",     # class 4
        "SELECT user.name FROM user WHERE age BETWEEN 18 AND 65",     # class 1
    ]
    pool = PoolState.for_task(golden)
    for sql in corpus4:
        assert verdict(golden, sql).kind == CORRECT, sql
        pool.ingest_correct(golden, sql)
    classes_ok = len(pool.entries) == 4
    report(10, byte_identical and classes_ok,
           f"50-entry replay byte-identical: {byte_identical}, "
           f"4-class corpus -> {len(pool.entries)} entries")


def test_criterion_11_direction_multi_vs_single(golden_task):
    task = golden_task
    task.reference_sql = ("SELECT name FROM user INNER JOIN admin "
                          "ON user.id = admin.uid")
    pool = PoolState.for_task(task)
    pool.ingest_correct(
        task, "SELECT name FROM user WHERE id IN (SELECT uid FROM admin)")
    records = [
        SubmissionRecord("s1", "g", 0, "", "SELECT surname FROM user "
                         "WHERE id IN (SELECT wrong FROM admin)"),
        SubmissionRecord("s1", "g", 1, "", "SELECT surname FROM user "
                         "WHERE id IN (SELECT uid FROM admin)"),
        SubmissionRecord("s1", "g", 2, "", "SELECT name FROM user "
                         "WHERE id IN (SELECT uid FROM admin)"),
    ]
    multi = learning_metrics(records, task, pool, "multi_ref")
    single = learning_metrics(records, task, pool, "single_ref")
    fewer_bad = (multi.backward_moves + multi.sideways_moves) < \
        (single.backward_moves + single.sideways_moves)
    lower_trials = multi.avg_trials_to_progress < single.avg_trials_to_progress
    report(11, fewer_bad and lower_trials,
           f"backward+sideways multi={multi.backward_moves + multi.sideways_moves} "
           f"< single={single.backward_moves + single.sideways_moves}; "
           f"trials multi={multi.avg_trials_to_progress:.2f} "
           f"< single={single.avg_trials_to_progress:.2f}")


def test_criterion_12_analytics_invariants():
    rng = random.Random(7)
    texts = [p for pair in PAIRS for p in pair[1:]] + [
        "SELECT 14", "SELECT name FROM user", TABLE1_PAIR[0], TABLE1_PAIR[1]]
    golden = Task(id="g", description="", schema_sql=SCHEMA_SQL,
                  seed_sql=DATA_SQL, hidden_sql="",
                  reference_sql="SELECT name FROM user")
    violations = 0
    for _ in range(25):
        corpus = [rng.choice(texts) for _ in range(rng.randint(1, 12))]
        thresholds = sorted({rng.randint(0, 60) for _ in range(6)})
        curve = reduction_curve(corpus, thresholds)
        values = [curve[t] for t in thresholds]
        if any(a < b for a, b in zip(values, values[1:])):
            violations += 1
        if harmonization_reduction(golden, corpus) > reduction_curve(corpus, [0])[0]:
            violations += 1
    report(12, violations == 0, f"25 generated corpora, {violations} violations")
