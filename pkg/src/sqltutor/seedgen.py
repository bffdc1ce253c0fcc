"""Suggest a test dataset for a new task.

Heuristic: 4-8 rows per table with foreign keys satisfied, plus for each
equality predicate in the lecturer solution at least one matching and one
non-matching row, and straddling values for inequality predicates.  Best
effort: the caller verifies the solution returns rows and may hand-edit.
"""
from __future__ import annotations

from decimal import Decimal

from .nodes import (
    And,
    Atom,
    ChainCmp,
    ColumnRef,
    ExprCond,
    InList,
    Literal,
    Not,
    Or,
    QueryTree,
    SchemaDef,
    Subquery,
    from_bindings,
    resolve_column,
    subqueries_of,
)

ROWS_PER_TABLE = 6


def _collect_predicates(tree: QueryTree, schema: SchemaDef, out):
    """(table, column, op, literal value) hints from WHERE/HAVING atoms."""
    bindings = from_bindings(tree.from_tree, schema)

    def resolve(ref):
        owner = resolve_column(ref, bindings)
        if owner is not None and owner.table is not None:
            return owner.table
        candidates = [t for t, cols in schema.tables
                      if any(c == ref.name for c, _ in cols)]
        return candidates[0] if len(candidates) == 1 else None

    def scan(b):
        if b is None:
            return
        if isinstance(b, Atom):
            ops = {"=": "=", "<": "<", "<=": "<=", ">": ">", ">=": ">=",
                   "LIKE": "LIKE", "BETWEEN": "BETWEEN"}
            if b.op in ops:
                subject = b.operands[0]
                if isinstance(subject, ColumnRef):
                    table = resolve(subject)
                    if table:
                        for operand in b.operands[1:]:
                            if isinstance(operand, Literal):
                                out.append((table, subject.name, b.op, operand))
                # literal on the left of a comparison
                if (b.op in ("<", "<=", ">", ">=", "=")
                        and isinstance(b.operands[0], Literal)
                        and isinstance(b.operands[1], ColumnRef)):
                    table = resolve(b.operands[1])
                    if table:
                        out.append((table, b.operands[1].name, b.op, b.operands[0]))
            if b.op == "IN" and isinstance(b.operands[0], ColumnRef):
                table = resolve(b.operands[0])
                rhs = b.operands[1]
                if table and isinstance(rhs, InList):
                    for item in rhs.items:
                        if isinstance(item, Literal):
                            out.append((table, b.operands[0].name, "=", item))
        elif isinstance(b, Not):
            scan(b.child)
        elif isinstance(b, (And, Or)):
            for c in b.children:
                scan(c)
        elif isinstance(b, ChainCmp):
            pass
        elif isinstance(b, ExprCond):
            pass

    scan(tree.where_expr)
    scan(tree.having_expr)
    for _, sub in subqueries_of(tree):
        _collect_predicates(sub, schema, out)


def _default_value(col: str, typ: str, i: int):
    if typ == "integer":
        return i
    if typ == "decimal":
        return Decimal(i * 10) + Decimal("0.5")
    if typ == "date":
        return f"2021-01-{min(i, 28):02d}"
    if typ == "boolean":
        return i % 2
    return f"{col}_{i}"


def _literal_value(lit: Literal):
    if lit.kind == "int":
        return lit.value
    if lit.kind == "dec":
        return Decimal(lit.value)
    if lit.kind == "str":
        return lit.value
    return None


def _render(value) -> str:
    if value is None:
        return "NULL"
    if isinstance(value, str):
        return "'" + value.replace("'", "''") + "'"
    return str(value)


def suggest_seed(schema: SchemaDef, solution: QueryTree) -> str:
    """Deterministic INSERT script covering the solution's predicates."""
    predicates = []
    _collect_predicates(solution, schema, predicates)

    fk_of = {(t, c): (rt, rc) for t, c, rt, rc in schema.foreign_keys}
    pk_of = dict(schema.primary_keys)

    # parents before children
    ordered = []
    remaining = [t for t, _ in schema.tables]
    while remaining:
        progressed = False
        for t in list(remaining):
            deps = {rt for (tt, _), (rt, _) in fk_of.items() if tt == t and rt != t}
            if deps <= set(ordered):
                ordered.append(t)
                remaining.remove(t)
                progressed = True
        if not progressed:
            ordered.extend(remaining)  # cyclic FKs: emit anyway
            break

    values_of = {}  # table -> list of row dicts
    for table in ordered:
        cols = schema.table_columns(table) or ()
        rows = []
        for i in range(1, ROWS_PER_TABLE + 1):
            row = {}
            for col, typ in cols:
                if (table, col) in fk_of:
                    rt, rc = fk_of[(table, col)]
                    parent_rows = values_of.get(rt, [])
                    if parent_rows:
                        row[col] = parent_rows[(i - 1) % len(parent_rows)][rc]
                        continue
                row[col] = _default_value(col, typ, i)
            rows.append(row)
        # pin predicate-relevant values: row 1 matches, row 2 stays different
        hits = [p for p in predicates if p[0] == table]
        for idx, (_, col, op, lit) in enumerate(hits):
            value = _literal_value(lit)
            if value is None or not rows or col not in rows[0]:
                continue
            target = rows[idx % (len(rows) - 1)] if len(rows) > 1 else rows[0]
            if op == "=":
                target[col] = value
            elif op == "LIKE" and isinstance(value, str):
                target[col] = value.replace("%", "").replace("_", "") or value
            elif op in ("<", "<="):
                target[col] = value - 1 if isinstance(value, int) else value
            elif op in (">", ">="):
                target[col] = value + 1 if isinstance(value, int) else value
            elif op == "BETWEEN":
                target[col] = value
        # keep declared primary keys unique
        pk = pk_of.get(table, ())
        seen = set()
        for i, row in enumerate(rows, start=1):
            key = tuple(row.get(c) for c in pk)
            if pk and key in seen:
                for c in pk:
                    if isinstance(row.get(c), int):
                        row[c] = max(
                            (r.get(c) for r in rows if isinstance(r.get(c), int)),
                            default=0) + 1
            seen.add(tuple(row.get(c) for c in pk))
        values_of[table] = rows

    statements = []
    for table in ordered:
        cols = [c for c, _ in (schema.table_columns(table) or ())]
        if not cols:
            continue
        rendered = ",\n    ".join(
            "(" + ", ".join(_render(row[c]) for c in cols) + ")"
            for row in values_of[table]
        )
        statements.append(
            f"INSERT INTO {table} ({', '.join(cols)}) VALUES\n    {rendered};")
    return "\n".join(statements) + ("\n" if statements else "")
