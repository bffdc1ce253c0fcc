"""Hypothesis strategies generating valid QueryTrees over the golden schema."""
from hypothesis import strategies as st

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
)

TABLES = {
    "customers": ["customer_id", "name", "city"],
    "orders": ["order_id", "customer_id", "invoice"],
    "employees": ["employee_id", "first_name", "last_name", "salary",
                  "division", "age", "div_id"],
    "divisions": ["id", "name"],
    "user": ["id", "name", "age"],
}

table_names = st.sampled_from(sorted(TABLES))


def columns_of(table):
    return st.sampled_from(TABLES[table])


@st.composite
def column_ref(draw, table, qualify=None):
    name = draw(columns_of(table))
    if qualify is None:
        qualify = draw(st.booleans())
    return ColumnRef(name, qualifier=table if qualify else None)


@st.composite
def literal(draw):
    kind = draw(st.sampled_from(["int", "str", "dec", "null"]))
    if kind == "int":
        return Literal("int", draw(st.integers(-999, 9999)))
    if kind == "dec":
        whole = draw(st.integers(0, 99))
        frac = draw(st.integers(0, 99))
        return Literal("dec", f"{whole}.{frac:02d}")
    if kind == "str":
        return Literal("str", draw(st.text(
            alphabet="abcxyz %_'", min_size=0, max_size=6)))
    return Literal("null")


@st.composite
def scalar_expr(draw, table, depth=0):
    choices = ["column", "literal"]
    if depth < 1:
        choices += ["func"]
    kind = draw(st.sampled_from(choices))
    if kind == "column":
        return draw(column_ref(table))
    if kind == "literal":
        return draw(literal())
    func = draw(st.sampled_from(["COUNT", "SUM", "AVG", "MIN", "MAX", "ROUND"]))
    if func == "COUNT" and draw(st.booleans()):
        return FuncCall("COUNT", (Star(),))
    arg = draw(column_ref(table))
    if func == "ROUND":
        return FuncCall("ROUND", (arg, Literal("int", draw(st.integers(0, 3)))))
    return FuncCall(func, (arg,))


@st.composite
def atom(draw, table):
    op = draw(st.sampled_from(["=", "<>", "<", "<=", ">", ">=", "LIKE",
                               "BETWEEN", "IS NULL", "IN"]))
    col = draw(column_ref(table))
    if op == "IS NULL":
        return Atom("IS NULL", (col,))
    if op == "BETWEEN":
        low = draw(st.integers(-50, 50))
        high = draw(st.integers(-50, 200))
        return Atom("BETWEEN", (col, Literal("int", low), Literal("int", high)))
    if op == "IN":
        items = draw(st.lists(literal(), min_size=1, max_size=3))
        return Atom("IN", (col, InList(tuple(items))))
    if op == "LIKE":
        return Atom("LIKE", (col, Literal("str", draw(st.text(
            alphabet="ab%_", min_size=1, max_size=4)))))
    return Atom(op, (col, draw(literal())))


@st.composite
def bool_expr(draw, table, depth=0):
    from sqltutor.nodes import and_, or_

    if depth >= 2:
        return draw(atom(table))
    kind = draw(st.sampled_from(["atom", "atom", "and", "or", "not"]))
    if kind == "atom":
        return draw(atom(table))
    if kind == "not":
        return Not(draw(bool_expr(table, depth + 1)))
    parts = draw(st.lists(bool_expr(table, depth + 1), min_size=2, max_size=3))
    return and_(*parts) if kind == "and" else or_(*parts)


JOINABLE = {
    ("customers", "orders"): ("customer_id", "customer_id"),
    ("employees", "divisions"): ("div_id", "id"),
    ("user", "user"): ("id", "id"),
}


@st.composite
def from_clause(draw):
    shape = draw(st.sampled_from(["single", "single", "join", "comma"]))
    if shape == "single":
        table = draw(table_names)
        alias = draw(st.sampled_from([None, None, "t", "x1"]))
        return TableRef(table, alias), table
    (left, right) = draw(st.sampled_from(sorted(JOINABLE)))
    lcol, rcol = JOINABLE[(left, right)]
    if left == right:
        ltab, rtab = TableRef(left, "a1"), TableRef(right, "a2")
        lq, rq = "a1", "a2"
    else:
        ltab, rtab = TableRef(left), TableRef(right)
        lq, rq = left, right
    if shape == "comma":
        return Join("comma", ltab, rtab), left
    kind = draw(st.sampled_from(["inner", "left", "right", "cross"]))
    cond = None
    if kind in ("inner", "left", "right"):
        cond = Atom("=", (ColumnRef(lcol, lq), ColumnRef(rcol, rq)))
    return Join(kind, ltab, rtab, cond), left


@st.composite
def query_tree(draw, allow_nested=True):
    from sqltutor.nodes import DerivedTable, Subquery, and_ as and_nodes

    from_node, main_table = draw(from_clause())
    if allow_nested and draw(st.integers(0, 5)) == 0:
        inner = draw(query_tree(allow_nested=False))
        from_node = DerivedTable(inner, draw(st.sampled_from(["d", "dt"])))
    n_items = draw(st.integers(1, 3))
    items = []
    for _ in range(n_items):
        if draw(st.integers(0, 9)) == 0:
            items.append(SelectItem(Star()))
        else:
            expr = draw(scalar_expr(main_table))
            alias = draw(st.sampled_from([None, None, None, "out1", "val"]))
            items.append(SelectItem(expr, alias if not isinstance(expr, Star) else None))
    where = draw(st.one_of(st.none(), bool_expr(main_table)))
    if allow_nested and draw(st.integers(0, 5)) == 0:
        inner = draw(query_tree(allow_nested=False))
        membership = Atom("IN", (ColumnRef(draw(columns_of(main_table))),
                                 Subquery(inner)))
        where = membership if where is None else and_nodes(where, membership)
    group_by = ()
    having = None
    if draw(st.integers(0, 3)) == 0:
        refs = [draw(column_ref(main_table, qualify=True))
                for _ in range(draw(st.integers(1, 2)))]
        deduped = []
        for r in refs:
            if r not in deduped:
                deduped.append(r)
        group_by = tuple(deduped)
        if draw(st.booleans()):
            having = Atom(">", (FuncCall("COUNT", (Star(),)), Literal("int", draw(st.integers(0, 5)))))
    order_by = ()
    if draw(st.integers(0, 2)) == 0:
        items_o = []
        for _ in range(draw(st.integers(1, 2))):
            direction = draw(st.sampled_from(["asc", "desc"]))
            explicit = direction == "asc" and draw(st.booleans())
            items_o.append(OrderItem(draw(column_ref(main_table, qualify=True)),
                                     direction, asc_explicit=explicit))
        order_by = tuple({o.expr: o for o in items_o}.values())
    limit = draw(st.one_of(st.none(), st.integers(0, 20)))
    return QueryTree(
        distinct=draw(st.booleans()),
        select_items=tuple(items),
        from_tree=from_node,
        where_expr=where,
        group_by=group_by,
        having_expr=having,
        order_by=order_by,
        limit=limit,
    )
