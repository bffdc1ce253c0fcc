"""Syntax tree for the supported SELECT subset.

All nodes are frozen dataclasses with tuple-valued sequence fields, so trees
are immutable after construction and structural equality is dataclass
equality.  Rewrites build new trees (``dataclasses.replace``).
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Optional, Union

# ---------------------------------------------------------------------------
# Scalar expressions

AGGREGATE_FUNCS = frozenset({"COUNT", "SUM", "AVG", "MIN", "MAX"})
SCALAR_FUNCS = AGGREGATE_FUNCS | frozenset({"ROUND", "CAST", "ISNULL"})

COLUMN_TYPES = ("integer", "decimal", "text", "date", "boolean")


@dataclass(frozen=True)
class ColumnRef:
    name: str
    qualifier: Optional[str] = None


@dataclass(frozen=True)
class Literal:
    kind: str  # "int" | "dec" | "str" | "null"
    value: object = None  # int, str (decimal text / string contents), or None


@dataclass(frozen=True)
class Star:
    qualifier: Optional[str] = None


@dataclass(frozen=True)
class FuncCall:
    name: str  # member of SCALAR_FUNCS, upper-case
    args: tuple = ()
    cast_type: Optional[str] = None  # CAST only


@dataclass(frozen=True)
class BinOp:
    op: str  # + - * /
    left: "ScalarExpr"
    right: "ScalarExpr"


@dataclass(frozen=True)
class Subquery:
    """A nested SELECT used as a scalar operand or IN right-hand side."""

    query: "QueryTree"


ScalarExpr = Union[ColumnRef, Literal, Star, FuncCall, BinOp, Subquery]


# ---------------------------------------------------------------------------
# Boolean expressions

COMPARISON_OPS = ("=", "<>", "<", "<=", ">", ">=")
FLIPPED_OP = {"<": ">", ">": "<", "<=": ">=", ">=": "<=", "=": "=", "<>": "<>"}


@dataclass(frozen=True)
class InList:
    items: tuple = ()


@dataclass(frozen=True)
class Atom:
    """Leaf predicate.

    Operand arity by operator: comparisons and LIKE take 2; BETWEEN takes 3
    (subject, low, high); IS NULL takes 1; IN takes (subject, InList|Subquery).
    """

    op: str
    operands: tuple = ()


@dataclass(frozen=True)
class Not:
    child: "BoolExpr"


@dataclass(frozen=True)
class And:
    children: tuple = ()


@dataclass(frozen=True)
class Or:
    children: tuple = ()


@dataclass(frozen=True)
class ChainCmp:
    """Chained comparison shorthand students write, e.g. ``50 < x < 70``."""

    operands: tuple = ()  # len(ops) + 1 scalar expressions
    ops: tuple = ()


@dataclass(frozen=True)
class ExprCond:
    """A bare scalar expression in boolean position, e.g. ``isnull(x)``."""

    expr: ScalarExpr


BoolExpr = Union[Atom, Not, And, Or, ChainCmp, ExprCond]

BOOL_LEAF_TYPES = (Atom, ChainCmp, ExprCond)


def and_(*parts) -> BoolExpr:
    """Conjunction with flattening; single part returned unchanged."""
    flat = []
    for p in parts:
        if p is None:
            continue
        if isinstance(p, And):
            flat.extend(p.children)
        else:
            flat.append(p)
    if not flat:
        raise ValueError("empty conjunction")
    if len(flat) == 1:
        return flat[0]
    return And(tuple(flat))


def or_(*parts) -> BoolExpr:
    flat = []
    for p in parts:
        if isinstance(p, Or):
            flat.extend(p.children)
        else:
            flat.append(p)
    if not flat:
        raise ValueError("empty disjunction")
    if len(flat) == 1:
        return flat[0]
    return Or(tuple(flat))


# ---------------------------------------------------------------------------
# FROM clause

JOIN_KINDS = ("inner", "left", "right", "cross", "comma")


@dataclass(frozen=True)
class TableRef:
    name: str
    alias: Optional[str] = None


@dataclass(frozen=True)
class DerivedTable:
    query: "QueryTree"
    alias: str


@dataclass(frozen=True)
class Join:
    kind: str  # member of JOIN_KINDS
    left: "FromNode"
    right: "FromNode"
    condition: Optional[BoolExpr] = None  # None for comma/cross


FromNode = Union[TableRef, DerivedTable, Join]


# ---------------------------------------------------------------------------
# Query

@dataclass(frozen=True)
class SelectItem:
    expr: ScalarExpr
    alias: Optional[str] = None


@dataclass(frozen=True)
class OrderItem:
    expr: ScalarExpr
    direction: str = "asc"  # "asc" | "desc"
    asc_explicit: bool = False  # the student wrote ASC out


@dataclass(frozen=True)
class QueryTree:
    distinct: bool = False
    select_items: tuple = ()
    from_tree: Optional[FromNode] = None
    where_expr: Optional[BoolExpr] = None
    group_by: tuple = ()  # column references
    having_expr: Optional[BoolExpr] = None
    order_by: tuple = ()  # OrderItem
    limit: Optional[int] = None


#: Stand-in for "no query at all"; used when padding subquery matchings.
EMPTY_QUERY = QueryTree()


# ---------------------------------------------------------------------------
# Schema

@dataclass(frozen=True)
class SchemaDef:
    """Tables with ordered, typed columns plus key annotations."""

    tables: tuple = ()  # ((table, ((col, type), ...)), ...)
    primary_keys: tuple = ()  # ((table, (col, ...)), ...)
    foreign_keys: tuple = ()  # ((table, col, ref_table, ref_col), ...)

    def table_columns(self, table: str):
        for name, cols in self.tables:
            if name == table:
                return cols
        return None

    def column_type(self, table: str, column: str) -> Optional[str]:
        cols = self.table_columns(table)
        if cols is None:
            return None
        for col, typ in cols:
            if col == column:
                return typ
        return None

    def has_table(self, table: str) -> bool:
        return self.table_columns(table) is not None


EMPTY_SCHEMA = SchemaDef()


# ---------------------------------------------------------------------------
# Serialization

def _escape_str(s: str) -> str:
    return "'" + s.replace("'", "''") + "'"


def serialize_scalar(e: ScalarExpr, parent_prec: int = 0) -> str:
    if isinstance(e, ColumnRef):
        return f"{e.qualifier}.{e.name}" if e.qualifier else e.name
    if isinstance(e, Literal):
        if e.kind == "null":
            return "NULL"
        if e.kind == "str":
            return _escape_str(e.value)
        return str(e.value)
    if isinstance(e, Star):
        return f"{e.qualifier}.*" if e.qualifier else "*"
    if isinstance(e, FuncCall):
        if e.name == "CAST":
            return f"CAST({serialize_scalar(e.args[0])} AS {e.cast_type})"
        args = ", ".join(serialize_scalar(a) for a in e.args)
        return f"{e.name}({args})"
    if isinstance(e, BinOp):
        prec = 1 if e.op in "+-" else 2
        left = serialize_scalar(e.left, prec)
        # right operand of -, / needs parens at equal precedence
        right = serialize_scalar(e.right, prec + (1 if e.op in "-/" else 0))
        text = f"{left} {e.op} {right}"
        if prec < parent_prec:
            return f"({text})"
        return text
    if isinstance(e, Subquery):
        return f"({serialize(e.query)})"
    raise TypeError(f"not a scalar expression: {e!r}")


def serialize_atom(a: Atom) -> str:
    if a.op in COMPARISON_OPS or a.op == "LIKE":
        return f"{serialize_scalar(a.operands[0], 3)} {a.op} {serialize_scalar(a.operands[1], 3)}"
    if a.op == "BETWEEN":
        s, lo, hi = a.operands
        return (f"{serialize_scalar(s, 3)} BETWEEN {serialize_scalar(lo, 3)}"
                f" AND {serialize_scalar(hi, 3)}")
    if a.op == "IS NULL":
        return f"{serialize_scalar(a.operands[0], 3)} IS NULL"
    if a.op == "IN":
        subject, rhs = a.operands
        if isinstance(rhs, InList):
            items = ", ".join(serialize_scalar(i) for i in rhs.items)
            return f"{serialize_scalar(subject, 3)} IN ({items})"
        return f"{serialize_scalar(subject, 3)} IN {serialize_scalar(rhs)}"
    raise TypeError(f"unknown atom operator: {a.op}")


def serialize_bool(b: BoolExpr, parent: str = "or") -> str:
    """parent: enclosing context, one of "or" < "and" < "not" by binding."""
    if isinstance(b, Atom):
        return serialize_atom(b)
    if isinstance(b, ExprCond):
        return serialize_scalar(b.expr, 3)
    if isinstance(b, ChainCmp):
        parts = [serialize_scalar(b.operands[0], 3)]
        for op, operand in zip(b.ops, b.operands[1:]):
            parts.append(op)
            parts.append(serialize_scalar(operand, 3))
        return " ".join(parts)
    if isinstance(b, Not):
        if isinstance(b.child, Atom) and b.child.op == "IS NULL":
            return f"{serialize_scalar(b.child.operands[0], 3)} IS NOT NULL"
        if isinstance(b.child, Atom) and b.child.op == "IN":
            inner = serialize_atom(b.child)
            subject, _, rest = inner.partition(" IN ")
            return f"{subject} NOT IN {rest}"
        if isinstance(b.child, Atom) and b.child.op == "LIKE":
            inner = serialize_atom(b.child)
            subject, _, rest = inner.partition(" LIKE ")
            return f"{subject} NOT LIKE {rest}"
        if isinstance(b.child, Atom) and b.child.op == "BETWEEN":
            inner = serialize_atom(b.child)
            subject, _, rest = inner.partition(" BETWEEN ")
            return f"{subject} NOT BETWEEN {rest}"
        if isinstance(b.child, BOOL_LEAF_TYPES):
            return f"NOT {serialize_bool(b.child, 'not')}"
        return f"NOT ({serialize_bool(b.child, 'or')})"
    if isinstance(b, And):
        return " AND ".join(serialize_bool(c, "and") for c in b.children)
    if isinstance(b, Or):
        text = " OR ".join(serialize_bool(c, "or") for c in b.children)
        if parent != "or":
            return f"({text})"
        return text
    raise TypeError(f"not a boolean expression: {b!r}")


JOIN_KEYWORD = {
    "inner": "INNER JOIN",
    "left": "LEFT JOIN",
    "right": "RIGHT JOIN",
    "cross": "CROSS JOIN",
}


def serialize_from(f: FromNode) -> str:
    if isinstance(f, TableRef):
        return f"{f.name} {f.alias}" if f.alias else f.name
    if isinstance(f, DerivedTable):
        return f"({serialize(f.query)}) {f.alias}"
    if isinstance(f, Join):
        left = serialize_from(f.left)
        if isinstance(f.left, Join) and f.kind != "comma":
            left = f"({left})" if f.left.kind == "comma" else left
        right = serialize_from(f.right)
        if isinstance(f.right, Join):
            right = f"({right})"
        if f.kind == "comma":
            return f"{left}, {right}"
        text = f"{left} {JOIN_KEYWORD[f.kind]} {right}"
        if f.condition is not None:
            text += f" ON {serialize_bool(f.condition)}"
        return text
    raise TypeError(f"not a from node: {f!r}")


def serialize(q: QueryTree) -> str:
    """Deterministic canonical SQL text; ``parse(serialize(q))`` == ``q``."""
    parts = ["SELECT"]
    if q.distinct:
        parts.append("DISTINCT")
    items = []
    for it in q.select_items:
        text = serialize_scalar(it.expr)
        if it.alias:
            text += f" AS {it.alias}"
        items.append(text)
    parts.append(", ".join(items))
    if q.from_tree is not None:
        parts.append("FROM")
        parts.append(serialize_from(q.from_tree))
    if q.where_expr is not None:
        parts.append("WHERE")
        parts.append(serialize_bool(q.where_expr))
    if q.group_by:
        parts.append("GROUP BY")
        parts.append(", ".join(serialize_scalar(g) for g in q.group_by))
    if q.having_expr is not None:
        parts.append("HAVING")
        parts.append(serialize_bool(q.having_expr))
    if q.order_by:
        parts.append("ORDER BY")
        rendered = []
        for o in q.order_by:
            text = serialize_scalar(o.expr)
            if o.direction == "desc":
                text += " DESC"
            elif o.asc_explicit:
                text += " ASC"
            rendered.append(text)
        parts.append(", ".join(rendered))
    if q.limit is not None:
        parts.append(f"LIMIT {q.limit}")
    return " ".join(parts)


# ---------------------------------------------------------------------------
# Node extraction for static diffing

CLAUSE_TAGS = ("select", "from", "where", "group_by", "having", "order_by", "limit")


def _extract_scalar(e, clause, out):
    if isinstance(e, ColumnRef):
        out.append((clause, "attribute", serialize_scalar(e)))
    elif isinstance(e, Literal):
        out.append((clause, "value", serialize_scalar(e)))
    elif isinstance(e, Star):
        out.append((clause, "attribute", serialize_scalar(e)))
    elif isinstance(e, FuncCall):
        out.append((clause, "function", e.name))
        for a in e.args:
            _extract_scalar(a, clause, out)
        if e.cast_type:
            out.append((clause, "keyword", e.cast_type))
    elif isinstance(e, BinOp):
        _extract_scalar(e.left, clause, out)
        out.append((clause, "keyword", e.op))
        _extract_scalar(e.right, clause, out)
    elif isinstance(e, Subquery):
        _extract_query(e.query, clause, out)
    else:
        raise TypeError(f"not a scalar expression: {e!r}")


def _extract_bool(b, clause, out):
    if isinstance(b, Atom):
        if b.op == "BETWEEN":
            _extract_scalar(b.operands[0], clause, out)
            out.append((clause, "keyword", "BETWEEN"))
            _extract_scalar(b.operands[1], clause, out)
            _extract_scalar(b.operands[2], clause, out)
        elif b.op == "IS NULL":
            _extract_scalar(b.operands[0], clause, out)
            out.append((clause, "keyword", "IS NULL"))
        elif b.op == "IN":
            _extract_scalar(b.operands[0], clause, out)
            out.append((clause, "keyword", "IN"))
            rhs = b.operands[1]
            if isinstance(rhs, InList):
                for item in rhs.items:
                    _extract_scalar(item, clause, out)
            else:
                _extract_scalar(rhs, clause, out)
        else:
            _extract_scalar(b.operands[0], clause, out)
            out.append((clause, "keyword", b.op))
            _extract_scalar(b.operands[1], clause, out)
    elif isinstance(b, ExprCond):
        _extract_scalar(b.expr, clause, out)
    elif isinstance(b, ChainCmp):
        _extract_scalar(b.operands[0], clause, out)
        for op, operand in zip(b.ops, b.operands[1:]):
            out.append((clause, "keyword", op))
            _extract_scalar(operand, clause, out)
    elif isinstance(b, Not):
        out.append((clause, "keyword", "NOT"))
        _extract_bool(b.child, clause, out)
    elif isinstance(b, (And, Or)):
        kw = "AND" if isinstance(b, And) else "OR"
        for i, c in enumerate(b.children):
            if i:
                out.append((clause, "keyword", kw))
            _extract_bool(c, clause, out)
    else:
        raise TypeError(f"not a boolean expression: {b!r}")


def _extract_from(f, out):
    if isinstance(f, TableRef):
        out.append(("from", "table", f.name))
    elif isinstance(f, DerivedTable):
        _extract_query(f.query, "from", out)
    elif isinstance(f, Join):
        _extract_from(f.left, out)
        kw = "," if f.kind == "comma" else JOIN_KEYWORD[f.kind]
        out.append(("from", "keyword", kw))
        _extract_from(f.right, out)
        if f.condition is not None:
            _extract_bool(f.condition, "from", out)
    else:
        raise TypeError(f"not a from node: {f!r}")


def _extract_query(q, clause_override, out):
    def tag(clause):
        return clause_override or clause

    if q.distinct:
        out.append((tag("select"), "keyword", "DISTINCT"))
    for it in q.select_items:
        _extract_scalar(it.expr, tag("select"), out)
    if q.from_tree is not None:
        if clause_override:
            _extract_from_tagged(q.from_tree, clause_override, out)
        else:
            _extract_from(q.from_tree, out)
    if q.where_expr is not None:
        _extract_bool(q.where_expr, tag("where"), out)
    for g in q.group_by:
        _extract_scalar(g, tag("group_by"), out)
    if q.having_expr is not None:
        _extract_bool(q.having_expr, tag("having"), out)
    for o in q.order_by:
        _extract_scalar(o.expr, tag("order_by"), out)
        if o.direction == "desc":
            out.append((tag("order_by"), "keyword", "DESC"))
        elif o.asc_explicit:
            out.append((tag("order_by"), "keyword", "ASC"))
    if q.limit is not None:
        out.append((tag("limit"), "keyword", "LIMIT"))
        out.append((tag("limit"), "value", str(q.limit)))


def _extract_from_tagged(f, clause, out):
    # from-tree of a nested query: everything keeps the enclosing clause tag
    if isinstance(f, TableRef):
        out.append((clause, "table", f.name))
    elif isinstance(f, DerivedTable):
        _extract_query(f.query, clause, out)
    elif isinstance(f, Join):
        _extract_from_tagged(f.left, clause, out)
        kw = "," if f.kind == "comma" else JOIN_KEYWORD[f.kind]
        out.append((clause, "keyword", kw))
        _extract_from_tagged(f.right, clause, out)
        if f.condition is not None:
            _extract_bool(f.condition, clause, out)


def extract_nodes(q: QueryTree):
    """Flatten the tree into (clause tag, node kind, token) triples.

    Nested queries inherit the clause tag of the position they appear in.
    """
    out = []
    _extract_query(q, None, out)
    return out


# ---------------------------------------------------------------------------
# Tree utilities shared by the rewrite and distance layers

def contains_aggregate(node) -> bool:
    """True if an aggregate call appears outside any nested subquery."""
    if node is None:
        return False
    if isinstance(node, FuncCall):
        if node.name in AGGREGATE_FUNCS:
            return True
        return any(contains_aggregate(a) for a in node.args)
    if isinstance(node, BinOp):
        return contains_aggregate(node.left) or contains_aggregate(node.right)
    if isinstance(node, Subquery):
        return False
    if isinstance(node, (ColumnRef, Literal, Star)):
        return False
    if isinstance(node, Atom):
        return any(contains_aggregate(o) for o in node.operands)
    if isinstance(node, InList):
        return any(contains_aggregate(i) for i in node.items)
    if isinstance(node, Not):
        return contains_aggregate(node.child)
    if isinstance(node, (And, Or)):
        return any(contains_aggregate(c) for c in node.children)
    if isinstance(node, ChainCmp):
        return any(contains_aggregate(o) for o in node.operands)
    if isinstance(node, ExprCond):
        return contains_aggregate(node.expr)
    return False


def is_constant(expr) -> bool:
    """True when the expression references no column, star, or subquery."""
    if isinstance(expr, Literal):
        return True
    if isinstance(expr, BinOp):
        return is_constant(expr.left) and is_constant(expr.right)
    if isinstance(expr, FuncCall):
        return expr.name not in AGGREGATE_FUNCS and all(is_constant(a) for a in expr.args)
    return False


def map_scalars(node, fn):
    """Rebuild ``node`` applying ``fn`` bottom-up to every scalar expression.

    Does not descend into nested QueryTrees (Subquery / DerivedTable).
    """
    if node is None:
        return None
    if isinstance(node, (ColumnRef, Literal, Star, Subquery)):
        return fn(node)
    if isinstance(node, FuncCall):
        new = replace(node, args=tuple(map_scalars(a, fn) for a in node.args))
        return fn(new)
    if isinstance(node, BinOp):
        new = replace(node, left=map_scalars(node.left, fn),
                      right=map_scalars(node.right, fn))
        return fn(new)
    if isinstance(node, Atom):
        return replace(node, operands=tuple(map_scalars(o, fn) for o in node.operands))
    if isinstance(node, InList):
        return replace(node, items=tuple(map_scalars(i, fn) for i in node.items))
    if isinstance(node, Not):
        return replace(node, child=map_scalars(node.child, fn))
    if isinstance(node, And):
        return replace(node, children=tuple(map_scalars(c, fn) for c in node.children))
    if isinstance(node, Or):
        return replace(node, children=tuple(map_scalars(c, fn) for c in node.children))
    if isinstance(node, ChainCmp):
        return replace(node, operands=tuple(map_scalars(o, fn) for o in node.operands))
    if isinstance(node, ExprCond):
        return replace(node, expr=map_scalars(node.expr, fn))
    raise TypeError(f"cannot map over {node!r}")


def map_bool_leaves(b, fn):
    """Rebuild a boolean tree applying ``fn`` to each leaf (Atom/Chain/ExprCond).

    ``fn`` may return any BoolExpr, so leaves can expand into conjunctions.
    """
    if b is None:
        return None
    if isinstance(b, BOOL_LEAF_TYPES):
        return fn(b)
    if isinstance(b, Not):
        return Not(map_bool_leaves(b.child, fn))
    if isinstance(b, And):
        return and_(*[map_bool_leaves(c, fn) for c in b.children])
    if isinstance(b, Or):
        return or_(*[map_bool_leaves(c, fn) for c in b.children])
    raise TypeError(f"not a boolean expression: {b!r}")


def from_leaves(f: Optional[FromNode]):
    """TableRef/DerivedTable leaves in left-to-right order."""
    if f is None:
        return []
    if isinstance(f, (TableRef, DerivedTable)):
        return [f]
    return from_leaves(f.left) + from_leaves(f.right)


def base_table_names(f: Optional[FromNode]):
    return [leaf.name for leaf in from_leaves(f) if isinstance(leaf, TableRef)]


def derived_tables(f: Optional[FromNode]):
    return [leaf for leaf in from_leaves(f) if isinstance(leaf, DerivedTable)]


@dataclass(frozen=True)
class Binding:
    """One name visible in a query's FROM scope."""

    name: str  # alias if present, else table name
    table: Optional[str]  # base table name, None for derived tables
    columns: Optional[tuple]  # known output column names, None if unknown


def _derived_columns(q: QueryTree):
    cols = []
    for it in q.select_items:
        if it.alias:
            cols.append(it.alias)
        elif isinstance(it.expr, ColumnRef):
            cols.append(it.expr.name)
        else:
            return None  # unnamed computed column: unknown surface
    return tuple(cols)


def from_bindings(f: Optional[FromNode], schema: SchemaDef):
    """Visible bindings of a FROM tree, in leaf order."""
    bindings = []
    for leaf in from_leaves(f):
        if isinstance(leaf, TableRef):
            cols = schema.table_columns(leaf.name)
            bindings.append(Binding(
                name=leaf.alias or leaf.name,
                table=leaf.name,
                columns=tuple(c for c, _ in cols) if cols is not None else None,
            ))
        else:
            bindings.append(Binding(
                name=leaf.alias,
                table=None,
                columns=_derived_columns(leaf.query),
            ))
    return bindings


def resolve_column(ref: ColumnRef, bindings, select_aliases=()):
    """The binding a column reference belongs to, or None if ambiguous/unknown.

    A bare name that matches one of the query's own select-item aliases is an
    output-name reference, never a table column.
    """
    if ref.qualifier:
        for b in bindings:
            if b.name == ref.qualifier:
                return b
        return None
    if ref.name in select_aliases:
        return None
    owners = [b for b in bindings if b.columns is not None and ref.name in b.columns]
    if len(owners) == 1:
        return owners[0]
    if not owners and len(bindings) == 1 and bindings[0].columns is None:
        # single table of unknown shape: the column can only come from it
        return bindings[0]
    return None


def subqueries_of(q: QueryTree):
    """Directly nested QueryTrees with location labels (not recursive)."""
    found = []

    def scan_scalar(e, where):
        if isinstance(e, Subquery):
            found.append((where, e.query))
        elif isinstance(e, FuncCall):
            for a in e.args:
                scan_scalar(a, where)
        elif isinstance(e, BinOp):
            scan_scalar(e.left, where)
            scan_scalar(e.right, where)

    def scan_bool(b, where):
        if b is None:
            return
        if isinstance(b, Atom):
            for o in b.operands:
                if isinstance(o, InList):
                    for i in o.items:
                        scan_scalar(i, where)
                else:
                    scan_scalar(o, where)
        elif isinstance(b, ExprCond):
            scan_scalar(b.expr, where)
        elif isinstance(b, ChainCmp):
            for o in b.operands:
                scan_scalar(o, where)
        elif isinstance(b, Not):
            scan_bool(b.child, where)
        elif isinstance(b, (And, Or)):
            for c in b.children:
                scan_bool(c, where)

    def scan_from(f):
        if f is None:
            return
        if isinstance(f, DerivedTable):
            found.append(("from", f.query))
        elif isinstance(f, Join):
            scan_from(f.left)
            scan_from(f.right)
            scan_bool(f.condition, "from")

    for it in q.select_items:
        scan_scalar(it.expr, "select")
    scan_from(q.from_tree)
    scan_bool(q.where_expr, "where")
    scan_bool(q.having_expr, "having")
    for o in q.order_by:
        scan_scalar(o.expr, "order_by")
    return found


def clause_presence(q: QueryTree):
    """Clauses used anywhere in the query, including nested subqueries."""
    present = set()
    if q.select_items:
        present.add("select")
    if q.from_tree is not None:
        present.add("from")
    if q.where_expr is not None:
        present.add("where")
    if q.group_by:
        present.add("group_by")
    if q.having_expr is not None:
        present.add("having")
    if q.order_by:
        present.add("order_by")
    for _, sub in subqueries_of(q):
        present |= clause_presence(sub)
    return present
