"""Dynamic checking: execute submissions on sandboxed task data and compare
result sets against the lecturer reference.

The embedded engine is sqlite.  A small compatibility layer translates the
grammar constructs sqlite (3.37) does not execute natively: RIGHT JOIN,
ISNULL(x) in boolean position, and HAVING without GROUP BY.
"""
from __future__ import annotations

import sqlite3
from collections import Counter
from dataclasses import dataclass, replace

from .config import Task
from .nodes import (
    Atom,
    ColumnRef,
    DerivedTable,
    ExprCond,
    FuncCall,
    Join,
    Literal,
    QueryTree,
    SchemaDef,
    SelectItem,
    Star,
    TableRef,
    contains_aggregate,
    from_bindings,
    from_leaves,
    map_bool_leaves,
    serialize,
)
from .parser import ParseError, classify, parse


class ProvisionError(Exception):
    pass


class ExecError(Exception):
    pass


@dataclass(frozen=True)
class ResultSet:
    column_count: int
    rows: tuple  # tuple of row tuples; NULL is a distinct value
    ordered: bool  # the query's top level has ORDER BY


@dataclass(frozen=True)
class CompareResult:
    equal: bool
    column_count_mismatch: bool = False
    order_mismatch: bool = False
    missing: tuple = ()  # rows the reference has and the submission lacks
    extra: tuple = ()  # rows the submission has beyond the reference

    def summary(self) -> str:
        if self.equal:
            return "result sets match"
        if self.column_count_mismatch:
            return "column count differs"
        if self.order_mismatch:
            return "rows match but the required order differs"
        return f"{len(self.missing)} missing row(s), {len(self.extra)} extra row(s)"


CORRECT = "Correct"
WRONG_RESULT = "WrongResult"
NON_EXECUTABLE = "NonExecutable"
REJECTED = "Rejected"


@dataclass(frozen=True)
class Verdict:
    kind: str
    detail: str = ""
    diff: CompareResult | None = None

    @property
    def is_correct(self):
        return self.kind == CORRECT


class Sandbox:
    """Isolated in-memory database holding schema + seed + hidden rows.

    After provisioning, an authorizer pins the connection read-only; graded
    submissions can never mutate the data.
    """

    def __init__(self, conn):
        self.conn = conn

    def execute(self, sql: str):
        try:
            cursor = self.conn.execute(sql)
            rows = cursor.fetchall()
            column_count = len(cursor.description) if cursor.description else 0
            return rows, column_count
        except sqlite3.Error as e:
            raise ExecError(str(e)) from e

    def close(self):
        self.conn.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


_READ_ACTIONS = {sqlite3.SQLITE_SELECT, sqlite3.SQLITE_READ, sqlite3.SQLITE_FUNCTION}


def _read_only_authorizer(action, *args):
    return sqlite3.SQLITE_OK if action in _READ_ACTIONS else sqlite3.SQLITE_DENY


def provision(task: Task, extra_sql: str | None = None) -> Sandbox:
    """Fresh sandbox with the task's schema, seed and hidden data."""
    conn = sqlite3.connect(":memory:")
    try:
        conn.executescript(task.schema_sql)
        for script in task.data_scripts():
            conn.executescript(script)
        if extra_sql and extra_sql.strip():
            conn.executescript(extra_sql)
    except sqlite3.Error as e:
        conn.close()
        raise ProvisionError(str(e)) from e
    conn.set_authorizer(_read_only_authorizer)
    return Sandbox(conn)


# ---------------------------------------------------------------------------
# Engine-compatibility serialization

def _expand_stars_for_exec(tree: QueryTree, schema: SchemaDef):
    bindings = from_bindings(tree.from_tree, schema)
    by_name = {b.name: b for b in bindings}
    items = []
    for it in tree.select_items:
        if not isinstance(it.expr, Star):
            return None  # mixed star positions stay native
        targets = [by_name[it.expr.qualifier]] if it.expr.qualifier else bindings
        if it.expr.qualifier and it.expr.qualifier not in by_name:
            return None
        for b in targets:
            if b.columns is None:
                return None
            items.extend(SelectItem(ColumnRef(c, qualifier=b.name)) for c in b.columns)
    return replace(tree, select_items=tuple(items))


def _has_right_join(f):
    if isinstance(f, Join):
        return f.kind == "right" or _has_right_join(f.left) or _has_right_join(f.right)
    return False


def _swap_right_joins(f):
    if not isinstance(f, Join):
        return f
    left = _swap_right_joins(f.left)
    right = _swap_right_joins(f.right)
    if f.kind == "right":
        return Join("left", right, left, f.condition)
    return Join(f.kind, left, right, f.condition)


def _compat_predicates(expr):
    """ISNULL(x) to IS NULL; chained comparisons to conjunctions.

    sqlite has no ISNULL function, and it evaluates ``a < b < c`` as boolean
    arithmetic rather than the range the student wrote.
    """
    from .nodes import ChainCmp, and_

    def fix(leaf):
        if (isinstance(leaf, ExprCond) and isinstance(leaf.expr, FuncCall)
                and leaf.expr.name == "ISNULL" and len(leaf.expr.args) == 1):
            return Atom("IS NULL", (leaf.expr.args[0],))
        if isinstance(leaf, ChainCmp):
            return and_(*[Atom(op, (a, b)) for op, a, b in
                          zip(leaf.ops, leaf.operands, leaf.operands[1:])])
        return leaf

    return map_bool_leaves(expr, fix)


def to_executable_sql(tree: QueryTree, schema: SchemaDef) -> str:
    """Serialize for the embedded engine, translating unsupported forms."""
    q = tree
    if q.where_expr is not None:
        q = replace(q, where_expr=_compat_predicates(q.where_expr))
    if q.having_expr is not None:
        q = replace(q, having_expr=_compat_predicates(q.having_expr))

    if _has_right_join(q.from_tree):
        # operand swap preserves semantics; a bare star must be pinned to the
        # original column order first
        if any(isinstance(it.expr, Star) for it in q.select_items):
            expanded = _expand_stars_for_exec(q, schema)
            if expanded is not None:
                q = expanded
        q = replace(q, from_tree=_swap_right_joins(q.from_tree))

    if q.having_expr is not None and not q.group_by:
        aggregated = (contains_aggregate(q.having_expr)
                      or any(contains_aggregate(it.expr) for it in q.select_items))
        if aggregated:
            # one constant group mirrors the implicit single group
            q = replace(q, group_by=(Literal("str", "g"),))
        else:
            leaves = from_leaves(q.from_tree)
            if leaves and all(isinstance(l, TableRef) for l in leaves):
                rowids = tuple(
                    ColumnRef("rowid", qualifier=l.alias or l.name) for l in leaves
                )
                q = replace(q, group_by=rowids)
    # nested queries need the same treatment only for constructs that appear
    # there in practice (RIGHT JOIN in subqueries round-trips through the
    # same serializer when executed standalone)
    return serialize(q)


def run_select(sandbox: Sandbox, text: str, schema: SchemaDef) -> ResultSet:
    """Execute one SELECT; raises ParseError or ExecError."""
    if classify(text) != "SingleSelect":
        raise ExecError("only a single SELECT statement can be executed")
    tree = parse(text, schema)
    return run_tree(sandbox, tree, schema)


def run_tree(sandbox: Sandbox, tree: QueryTree, schema: SchemaDef) -> ResultSet:
    sql = to_executable_sql(tree, schema)
    rows, column_count = sandbox.execute(sql)
    return ResultSet(
        column_count=column_count,
        rows=tuple(tuple(r) for r in rows),
        ordered=bool(tree.order_by),
    )


def compare(a: ResultSet, b: ResultSet) -> CompareResult:
    """a = submission, b = reference.  Multiset equality unless the reference
    is ordered; column names are ignored, column count is strict."""
    if a.column_count != b.column_count:
        return CompareResult(equal=False, column_count_mismatch=True,
                             missing=b.rows[:5], extra=a.rows[:5])
    count_a, count_b = Counter(a.rows), Counter(b.rows)
    missing = tuple((count_b - count_a).elements())
    extra = tuple((count_a - count_b).elements())
    if b.ordered:
        if a.rows == b.rows:
            return CompareResult(equal=True)
        if not missing and not extra:
            return CompareResult(equal=False, order_mismatch=True)
        return CompareResult(equal=False, missing=missing, extra=extra)
    if not missing and not extra:
        return CompareResult(equal=True)
    return CompareResult(equal=False, missing=missing, extra=extra)


def reference_result(task: Task, sandbox: Sandbox) -> ResultSet:
    try:
        return run_select(sandbox, task.reference_sql, task.schema)
    except (ParseError, ExecError) as e:
        raise ProvisionError(
            f"lecturer reference does not execute: {e}") from e


def verdict(task: Task, submission_text: str) -> Verdict:
    """Grade one submission against the task's lecturer reference."""
    kind = classify(submission_text)
    if kind != "SingleSelect":
        reason = ("multiple statements are not allowed" if kind == "MultiStatement"
                  else "only SELECT statements are graded")
        return Verdict(REJECTED, reason)
    with provision(task) as sandbox:
        ref_rs = reference_result(task, sandbox)
        return _verdict_against(sandbox, task.schema, ref_rs, submission_text)


def _verdict_against(sandbox, schema, ref_rs, submission_text) -> Verdict:
    try:
        sub_rs = run_select(sandbox, submission_text, schema)
    except ParseError as e:
        return Verdict(NON_EXECUTABLE, str(e))
    except ExecError as e:
        return Verdict(NON_EXECUTABLE, str(e))
    diff = compare(sub_rs, ref_rs)
    if diff.equal:
        return Verdict(CORRECT, diff=diff)
    return Verdict(WRONG_RESULT, diff.summary(), diff=diff)


@dataclass(frozen=True)
class VerdictFlip:
    entry_id: str
    old: str
    new: str


@dataclass(frozen=True)
class RecheckReport:
    flips: tuple  # VerdictFlip
    warnings: tuple  # str


def recheck_pool(task: Task, entries, extra_sql: str) -> RecheckReport:
    """Re-grade every pool entry against the task data plus ``extra_sql``.

    ``entries`` is an iterable of objects with ``id`` and ``raw_text``.
    Reports every verdict flip; the lecturer reference earns a warning when
    the change leaves it empty or broken.
    """
    flips = []
    warnings = []
    with provision(task) as before, provision(task, extra_sql) as after:
        ref_before = reference_result(task, before)
        try:
            ref_after = reference_result(task, after)
            if not ref_after.rows:
                warnings.append(
                    "lecturer reference returns no rows on the changed data")
        except ProvisionError as e:
            warnings.append(str(e))
            return RecheckReport(flips=(), warnings=tuple(warnings))
        for entry in entries:
            old = _verdict_against(before, task.schema, ref_before, entry.raw_text)
            new = _verdict_against(after, task.schema, ref_after, entry.raw_text)
            if old.kind != new.kind:
                flips.append(VerdictFlip(entry.id, old.kind, new.kind))
    return RecheckReport(flips=tuple(flips), warnings=tuple(warnings))
