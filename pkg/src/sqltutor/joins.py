"""Join-structure equivalence via execution over a synthetic bitmask database.

Every table has a single column ``x``.  With ``n`` tables, table *i* holds
every value in ``1 .. 2**n - 1`` whose bit *i* is set, so each nonempty
subset of tables shares exactly one value.  Two join trees are equivalent
precisely when their stripped join-only queries return the same multiset of
rows over these tables.
"""
from __future__ import annotations

import sqlite3
import string
from collections import Counter
from dataclasses import dataclass, replace

from .nodes import (
    And,
    Atom,
    BinOp,
    ChainCmp,
    ColumnRef,
    DerivedTable,
    ExprCond,
    FromNode,
    FuncCall,
    InList,
    Join,
    Not,
    Or,
    TableRef,
    from_leaves,
    serialize_from,
)

MAX_TABLES = 16


class TooManyTables(Exception):
    pass


class UnmappableCondition(Exception):
    """A join condition references no identifiable pair of tables."""


@dataclass(frozen=True)
class SyntheticJoinDb:
    n: int
    names: tuple  # synthetic table names, index i -> table i
    tables: tuple  # tuple of value tuples


def build_synthetic_db(n: int) -> SyntheticJoinDb:
    if not 1 <= n <= MAX_TABLES:
        raise TooManyTables(f"{n} tables exceeds the {MAX_TABLES}-table cap")
    names = tuple(string.ascii_lowercase[i] for i in range(n))
    tables = tuple(
        tuple(v for v in range(1, 2 ** n) if v >> i & 1)
        for i in range(n)
    )
    return SyntheticJoinDb(n, names, tables)


@dataclass(frozen=True)
class AdjustedQuery:
    """Join-only query over synthetic tables, ready for execution."""

    sql: str
    table_map: tuple  # ((original table, synthetic name), ...)
    column_order: tuple  # leaf aliases in original appearance order


def _leaf_binding_names(tree):
    return [leaf.alias or leaf.name for leaf in from_leaves(tree)]


def _condition_tables(cond, binding_of_leaf, left_names, right_names):
    """Binding names a join condition links, in order of appearance."""
    refs = []

    def scan_scalar(e):
        if isinstance(e, ColumnRef) and e.qualifier:
            if e.qualifier in binding_of_leaf and e.qualifier not in refs:
                refs.append(e.qualifier)
        elif isinstance(e, FuncCall):
            for a in e.args:
                scan_scalar(a)
        elif isinstance(e, BinOp):
            scan_scalar(e.left)
            scan_scalar(e.right)

    def scan(b):
        if b is None:
            return
        if isinstance(b, Atom):
            for o in b.operands:
                if isinstance(o, InList):
                    for i in o.items:
                        scan_scalar(i)
                else:
                    scan_scalar(o)
        elif isinstance(b, Not):
            scan(b.child)
        elif isinstance(b, (And, Or)):
            for c in b.children:
                scan(c)
        elif isinstance(b, ChainCmp):
            for o in b.operands:
                scan_scalar(o)
        elif isinstance(b, ExprCond):
            scan_scalar(b.expr)

    scan(cond)
    if len(refs) >= 2:
        return refs
    # unqualified or unresolvable: fall back to single-leaf sides
    if len(left_names) == 1 and len(right_names) == 1:
        return [left_names[0], right_names[0]]
    raise UnmappableCondition(
        "join condition references no identifiable pair of tables")


def adjust_query(from_tree: FromNode, table_map=None) -> AdjustedQuery:
    """Strip a FROM tree down to its join skeleton over synthetic tables.

    Each distinct base table maps (in order of first appearance) to one
    synthetic table; join conditions become x-column equalities between the
    tables the original condition referenced; everything else is cut off.
    """
    leaves = from_leaves(from_tree)
    if any(isinstance(l, DerivedTable) for l in leaves):
        raise UnmappableCondition("derived table in join skeleton")
    order = []
    if table_map:
        order.extend(table_map)
    for leaf in leaves:
        if leaf.name not in order:
            order.append(leaf.name)
    if len(order) > MAX_TABLES:
        raise TooManyTables(f"{len(order)} tables exceeds the {MAX_TABLES}-table cap")
    synthetic = {t: string.ascii_lowercase[i] for i, t in enumerate(order)}

    # unique execution alias per leaf; condition refs resolve to leaf aliases
    leaf_alias = {}
    binding_names = {}
    for idx, leaf in enumerate(leaves):
        alias = f"j{idx + 1}"
        leaf_alias[id(leaf)] = alias
        binding_names[leaf.alias or leaf.name] = alias

    def rebuild(node):
        if isinstance(node, TableRef):
            return TableRef(synthetic[node.name], alias=leaf_alias[id(node)])
        left = rebuild(node.left)
        right = rebuild(node.right)
        if node.kind in ("comma", "cross"):
            return Join(node.kind, left, right)
        linked = _condition_tables(
            node.condition, binding_names,
            _leaf_binding_names(node.left), _leaf_binding_names(node.right))
        eqs = [
            Atom("=", (ColumnRef("x", binding_names[a]),
                       ColumnRef("x", binding_names[b])))
            for a, b in zip(linked, linked[1:])
        ]
        cond = eqs[0] if len(eqs) == 1 else And(tuple(eqs))
        return Join(node.kind, left, right, cond)

    adjusted = rebuild(from_tree)
    # canonical column order: by synthetic table, then leaf position, so that
    # operand-swapped but equivalent joins produce identical row tuples
    ranked = sorted(range(len(leaves)),
                    key=lambda i: (synthetic[leaves[i].name], i))
    column_order = tuple(leaf_alias[id(leaves[i])] for i in ranked)
    adjusted = _rewrite_right_joins(adjusted)
    cols = ", ".join(f"{a}.x" for a in column_order)
    sql = f"SELECT {cols} FROM {serialize_from(adjusted)}"
    return AdjustedQuery(sql=sql,
                         table_map=tuple((t, synthetic[t]) for t in order),
                         column_order=column_order)


def _rewrite_right_joins(node):
    # sqlite < 3.39 lacks RIGHT JOIN; swapping operands preserves semantics
    # and the explicit select list keeps the original column order.
    if not isinstance(node, Join):
        return node
    left = _rewrite_right_joins(node.left)
    right = _rewrite_right_joins(node.right)
    if node.kind == "right":
        return Join("left", right, left, node.condition)
    return replace(node, left=left, right=right)


def _run(db: SyntheticJoinDb, adjusted: AdjustedQuery):
    conn = sqlite3.connect(":memory:")
    try:
        for name, values in zip(db.names, db.tables):
            conn.execute(f"CREATE TABLE {name} (x INTEGER)")
            conn.executemany(f"INSERT INTO {name} VALUES (?)",
                             [(v,) for v in values])
        rows = conn.execute(adjusted.sql).fetchall()
        return Counter(tuple(r) for r in rows)
    finally:
        conn.close()


def join_distance(a: FromNode | None, b: FromNode | None) -> int:
    """Size of the multiset symmetric difference of the two adjusted results.

    Tables shared between both trees map to the same synthetic table; a
    missing tree contributes an empty result set.
    """
    order = []
    for tree in (a, b):
        for leaf in from_leaves(tree):
            if isinstance(leaf, DerivedTable):
                raise UnmappableCondition("derived table in join skeleton")
            if leaf.name not in order:
                order.append(leaf.name)
    if len(order) > MAX_TABLES:
        raise TooManyTables(f"{len(order)} tables exceeds the {MAX_TABLES}-table cap")
    db = build_synthetic_db(max(len(order), 1))
    rows_a = _run(db, adjust_query(a, order)) if a is not None else Counter()
    rows_b = _run(db, adjust_query(b, order)) if b is not None else Counter()
    diff = 0
    for key in set(rows_a) | set(rows_b):
        diff += abs(rows_a[key] - rows_b[key])
    return diff
