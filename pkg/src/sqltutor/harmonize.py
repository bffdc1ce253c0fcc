"""Rewrite queries into canonical form by 18 harmonization rules.

Rules apply in fixed id order (R01..R18), iterating to a fixed point.
Nested subqueries are harmonized before their enclosing query.  Two rules
(R12, R13) emit style hints: they remove code that is superfluous rather
than wrong.
"""
from __future__ import annotations

from dataclasses import dataclass, replace

from .cnf import CnfBlowup, canonicalize_atom, cnf_to_expr, to_cnf, DEFAULT_ATOM_CAP
from .nodes import (
    AGGREGATE_FUNCS,
    And,
    Atom,
    BinOp,
    ChainCmp,
    ColumnRef,
    DerivedTable,
    ExprCond,
    FuncCall,
    InList,
    Join,
    Literal,
    Not,
    Or,
    OrderItem,
    QueryTree,
    SchemaDef,
    SelectItem,
    Star,
    Subquery,
    TableRef,
    and_,
    contains_aggregate,
    from_bindings,
    from_leaves,
    map_bool_leaves,
    map_scalars,
    serialize_scalar,
    EMPTY_SCHEMA,
)

MAX_PASSES = 32


class FixedPointNotReached(Exception):
    """The rule set failed to converge; signals a rule-interaction bug."""


@dataclass(frozen=True)
class StyleHint:
    rule_id: str
    clause: str
    message: str


@dataclass(frozen=True)
class CanonicalQuery:
    tree: QueryTree
    applied_rules: tuple = ()  # (rule id, location path)
    hints: tuple = ()  # StyleHint


@dataclass
class _Ctx:
    schema: SchemaDef
    output_order_required: bool
    is_top: bool
    toggles: dict
    atom_cap: int

    def enabled(self, rule_id):
        return self.toggles.get(rule_id, True)


# ---------------------------------------------------------------------------
# Scope helpers

def _comma_items(f):
    if isinstance(f, Join) and f.kind == "comma":
        return _comma_items(f.left) + _comma_items(f.right)
    return [f]


def _rebuild_comma(items):
    node = items[0]
    for item in items[1:]:
        node = Join("comma", node, item)
    return node


def _select_aliases(q):
    return tuple(it.alias for it in q.select_items if it.alias)


def _substitute_qualifiers(node, qmap, schema):
    """Rewrite column/star qualifiers per ``qmap`` respecting nested scopes.

    A nested query that redefines one of the mapped names shadows it there.
    """
    def fix(e):
        if isinstance(e, ColumnRef) and e.qualifier in qmap:
            return replace(e, qualifier=qmap[e.qualifier])
        if isinstance(e, Star) and e.qualifier in qmap:
            return replace(e, qualifier=qmap[e.qualifier])
        if isinstance(e, Subquery):
            return Subquery(_substitute_in_query(e.query, qmap, schema))
        return e

    return map_scalars(node, fix)


def _substitute_in_query(q, qmap, schema):
    shadowed = {b.name for b in from_bindings(q.from_tree, schema)}
    live = {k: v for k, v in qmap.items() if k not in shadowed}
    if not live:
        return q
    return _rewrite_query_refs(q, lambda node: _substitute_qualifiers(node, live, schema))


def _rewrite_query_refs(q, fix_part):
    """Apply ``fix_part`` to every clause expression of ``q`` (one level)."""
    def fix_from(f):
        if f is None or isinstance(f, TableRef):
            return f
        if isinstance(f, DerivedTable):
            return f  # own scope; handled by its harmonization
        return Join(f.kind, fix_from(f.left), fix_from(f.right),
                    fix_part(f.condition) if f.condition is not None else None)

    return replace(
        q,
        select_items=tuple(replace(it, expr=fix_part(it.expr)) for it in q.select_items),
        from_tree=fix_from(q.from_tree),
        where_expr=fix_part(q.where_expr) if q.where_expr is not None else None,
        group_by=tuple(fix_part(g) for g in q.group_by),
        having_expr=fix_part(q.having_expr) if q.having_expr is not None else None,
        order_by=tuple(replace(o, expr=fix_part(o.expr)) for o in q.order_by),
    )


def _map_bools(q, fn, locations, label_only=None):
    """Apply ``fn`` to each boolean-tree clause (where/having/join ON)."""
    changed_locs = []

    def apply(expr, label):
        if expr is None or (label_only and label not in label_only):
            return expr
        new = fn(expr)
        if new != expr:
            changed_locs.append(label)
        return new

    def fix_from(f, counter=[0]):
        if f is None or isinstance(f, (TableRef, DerivedTable)):
            return f
        left = fix_from(f.left)
        right = fix_from(f.right)
        cond = f.condition
        if cond is not None:
            idx = counter[0]
            counter[0] += 1
            cond = apply(cond, f"from.on[{idx}]")
        return Join(f.kind, left, right, cond)

    new_q = replace(
        q,
        where_expr=apply(q.where_expr, "where"),
        having_expr=apply(q.having_expr, "having"),
        from_tree=fix_from(q.from_tree),
    )
    locations.extend(changed_locs)
    return new_q


# ---------------------------------------------------------------------------
# Type inference (schema-guarded rules R11-R13)

def _binding_for(ref, bindings, select_aliases):
    from .nodes import resolve_column

    return resolve_column(ref, bindings, select_aliases)


def _derived_leaf_map(q):
    return {leaf.alias: leaf.query for leaf in from_leaves(q.from_tree)
            if isinstance(leaf, DerivedTable)}


def infer_type(expr, q, schema):
    """Static type of a scalar expression, or None when unknown."""
    bindings = from_bindings(q.from_tree, schema)
    derived = _derived_leaf_map(q)
    aliases = _select_aliases(q)

    def walk(e, query, bnds, drv, als):
        if isinstance(e, Literal):
            return {"int": "integer", "dec": "decimal", "str": "text"}.get(e.kind)
        if isinstance(e, ColumnRef):
            owner = _binding_for(e, bnds, als)
            if owner is None:
                return None
            if owner.table is not None:
                return schema.column_type(owner.table, e.name)
            sub = drv.get(owner.name)
            if sub is None:
                return None
            for it in sub.select_items:
                out_name = it.alias or (it.expr.name if isinstance(it.expr, ColumnRef) else None)
                if out_name == e.name:
                    return walk(it.expr, sub, from_bindings(sub.from_tree, schema),
                                _derived_leaf_map(sub), _select_aliases(sub))
            return None
        if isinstance(e, FuncCall):
            if e.name == "COUNT":
                return "integer"
            if e.name == "AVG":
                return "decimal"
            if e.name in ("MIN", "MAX", "SUM"):
                return walk(e.args[0], query, bnds, drv, als) if e.args else None
            if e.name == "ROUND":
                return "decimal"
            if e.name == "CAST":
                return e.cast_type
            if e.name == "ISNULL":
                return "boolean"
            return None
        if isinstance(e, BinOp):
            if e.op == "/":
                return None  # integer division semantics are dialect-dependent
            lt = walk(e.left, query, bnds, drv, als)
            rt = walk(e.right, query, bnds, drv, als)
            if lt == rt == "integer":
                return "integer"
            if {lt, rt} <= {"integer", "decimal"} and lt and rt:
                return "decimal"
            return None
        if isinstance(e, Subquery):
            sub = e.query
            if len(sub.select_items) == 1:
                return walk(sub.select_items[0].expr, sub,
                            from_bindings(sub.from_tree, schema),
                            _derived_leaf_map(sub), _select_aliases(sub))
            return None
        return None

    return walk(expr, q, bindings, derived, aliases)


# ---------------------------------------------------------------------------
# Rules; each returns (tree, locations, hints)

def _r01_aliases(q, ctx):
    """Positional alias names: table aliases t1.., derived output columns
    col1..; top-level select-item aliases are dropped outright."""
    locations = []
    leaves = from_leaves(q.from_tree)
    table_names = {l.name for l in leaves if isinstance(l, TableRef)}

    # table/derived binding aliases -> positional names
    qmap = {}
    counter = 0
    for leaf in leaves:
        alias = leaf.alias if isinstance(leaf, TableRef) else leaf.alias
        if alias is None:
            continue
        counter += 1
        target = f"t{counter}"
        while target in table_names:
            counter += 1
            target = f"t{counter}"
        if alias != target:
            qmap[alias] = target
    if qmap:
        def fix_leaf(f):
            if isinstance(f, TableRef):
                if f.alias in qmap:
                    return replace(f, alias=qmap[f.alias])
                return f
            if isinstance(f, DerivedTable):
                if f.alias in qmap:
                    return replace(f, alias=qmap[f.alias])
                return f
            return Join(f.kind, fix_leaf(f.left), fix_leaf(f.right), f.condition)

        q = replace(q, from_tree=fix_leaf(q.from_tree) if q.from_tree else None)
        q = _rewrite_query_refs(q, lambda n: _substitute_qualifiers(n, qmap, ctx.schema))
        locations.append("from")

    # derived output aliases -> positional col1.. (by item index, so
    # duplicate alias names cannot oscillate)
    while True:
        bindings = from_bindings(q.from_tree, ctx.schema)
        target_leaf = None
        for leaf in from_leaves(q.from_tree):
            if not isinstance(leaf, DerivedTable):
                continue
            if any(it.alias and it.alias != f"col{j + 1}"
                   for j, it in enumerate(leaf.query.select_items)):
                target_leaf = leaf
                break
        if target_leaf is None:
            break
        q = _rename_derived_outputs(q, target_leaf, bindings, ctx.schema)
        locations.append("from")

    # top level: select-item aliases are output labels only; drop them
    if ctx.is_top and any(it.alias for it in q.select_items):
        alias_expr = {it.alias: it.expr for it in q.select_items if it.alias}

        def drop_alias_refs(node):
            def fix(e):
                if isinstance(e, ColumnRef) and e.qualifier is None and e.name in alias_expr:
                    return alias_expr[e.name]
                return e
            return map_scalars(node, fix)

        q = replace(
            q,
            select_items=tuple(replace(it, alias=None) for it in q.select_items),
            group_by=tuple(drop_alias_refs(g) for g in q.group_by),
            having_expr=drop_alias_refs(q.having_expr) if q.having_expr is not None else None,
            order_by=tuple(replace(o, expr=drop_alias_refs(o.expr)) for o in q.order_by),
        )
        locations.append("select")

    return q, locations, []


def _rename_derived_outputs(q, leaf, bindings, schema):
    """Rename a derived table's output aliases and every reference to them.

    Aliases rename by item position; references rewrite only for old names
    that belong to exactly one item (duplicated names were ambiguous anyway).
    """
    binding_name = leaf.alias
    new_items = tuple(
        replace(it, alias=f"col{j + 1}") if it.alias else it
        for j, it in enumerate(leaf.query.select_items)
    )
    old_aliases = [it.alias for it in leaf.query.select_items if it.alias]
    name_map = {
        it.alias: f"col{j + 1}"
        for j, it in enumerate(leaf.query.select_items)
        if it.alias and old_aliases.count(it.alias) == 1
    }
    # inner references to its own output aliases (ORDER BY / GROUP BY / HAVING)
    def fix_inner(node):
        def fix(e):
            if isinstance(e, ColumnRef) and e.qualifier is None and e.name in name_map:
                return replace(e, name=name_map[e.name])
            return e
        return map_scalars(node, fix)

    new_sub = replace(
        leaf.query,
        select_items=new_items,
        group_by=tuple(fix_inner(g) for g in leaf.query.group_by),
        having_expr=fix_inner(leaf.query.having_expr) if leaf.query.having_expr is not None else None,
        order_by=tuple(replace(o, expr=fix_inner(o.expr)) for o in leaf.query.order_by),
    )

    def swap_leaf(f):
        if f is leaf:
            return replace(leaf, query=new_sub)
        if isinstance(f, Join):
            return Join(f.kind, swap_leaf(f.left), swap_leaf(f.right), f.condition)
        return f

    q = replace(q, from_tree=swap_leaf(q.from_tree))

    # outer references: qualified by the binding, or unqualified when this
    # binding is the unique owner of the old name
    unique_names = set()
    for old in name_map:
        owners = [b for b in bindings
                  if b.columns is not None and old in b.columns]
        if [b.name for b in owners] == [binding_name]:
            unique_names.add(old)

    def fix_outer(node):
        def fix(e):
            if isinstance(e, ColumnRef) and e.name in name_map:
                if e.qualifier == binding_name or (e.qualifier is None and e.name in unique_names):
                    return replace(e, name=name_map[e.name])
            return e
        return map_scalars(node, fix)

    return _rewrite_query_refs(q, fix_outer)


def _r02_qualification(q, ctx):
    """Drop aliases when no table repeats; qualify resolvable columns."""
    locations = []
    bindings = from_bindings(q.from_tree, ctx.schema)
    names = [b.table for b in bindings if b.table is not None]
    duplicates = len(names) != len(set(names))

    if not duplicates:
        qmap = {}

        def drop_alias(f):
            if isinstance(f, TableRef) and f.alias:
                qmap[f.alias] = f.name
                return replace(f, alias=None)
            if isinstance(f, Join):
                return Join(f.kind, drop_alias(f.left), drop_alias(f.right), f.condition)
            return f

        new_from = drop_alias(q.from_tree) if q.from_tree else None
        if qmap:
            q = replace(q, from_tree=new_from)
            q = _rewrite_query_refs(q, lambda n: _substitute_qualifiers(n, qmap, ctx.schema))
            locations.append("from")

    q2 = _qualify_columns(q, ctx.schema)
    if q2 != q:
        locations.append("select")
        q = q2
    return q, locations, []


def _qualify_columns(q, schema, outer_stack=()):
    bindings = from_bindings(q.from_tree, schema)
    aliases = _select_aliases(q)
    stack = tuple(outer_stack) + ((bindings, aliases),)

    def resolve(ref):
        for level_bindings, level_aliases in reversed(stack):
            if ref.name in level_aliases:
                return None
            definite = [b for b in level_bindings
                        if b.columns is not None and ref.name in b.columns]
            if len(definite) == 1:
                return definite[0]
            if len(definite) > 1:
                return None
            unknown = [b for b in level_bindings if b.columns is None]
            if unknown:
                if len(level_bindings) == 1:
                    return level_bindings[0]
                return None
        return None

    def fix(e):
        if isinstance(e, ColumnRef) and e.qualifier is None:
            owner = resolve(e)
            if owner is not None:
                return replace(e, qualifier=owner.name)
            return e
        if isinstance(e, Subquery):
            return Subquery(_qualify_columns(e.query, schema, stack))
        return e

    def fix_part(node):
        return map_scalars(node, fix)

    new_q = _rewrite_query_refs(q, fix_part)

    # join conditions comparing same-named columns of both sides: qualify
    # each side with its own operand subtree
    def fix_join(f):
        if f is None or isinstance(f, (TableRef, DerivedTable)):
            return f
        left = fix_join(f.left)
        right = fix_join(f.right)
        cond = f.condition
        if cond is not None:
            cond = _disambiguate_on(cond, left, right, schema)
        return Join(f.kind, left, right, cond)

    return replace(new_q, from_tree=fix_join(new_q.from_tree))


def _disambiguate_on(cond, left, right, schema):
    left_bindings = from_bindings(left, schema)
    right_bindings = from_bindings(right, schema)

    def owner(name, bindings):
        found = [b for b in bindings if b.columns is not None and name in b.columns]
        if len(found) == 1:
            return found[0]
        if not found and len(bindings) == 1 and bindings[0].columns is None:
            return bindings[0]
        return None

    def fix_leaf(leaf):
        if (isinstance(leaf, Atom) and leaf.op == "=" and
                isinstance(leaf.operands[0], ColumnRef) and
                isinstance(leaf.operands[1], ColumnRef)):
            a, b = leaf.operands
            if a.qualifier is None and b.qualifier is None and a.name == b.name:
                la, rb = owner(a.name, left_bindings), owner(b.name, right_bindings)
                if la is not None and rb is not None:
                    return Atom("=", (replace(a, qualifier=la.name),
                                      replace(b, qualifier=rb.name)))
        return leaf

    return map_bool_leaves(cond, fix_leaf)


def _r03_order_normalization(q, ctx):
    locations = []
    if any(o.asc_explicit for o in q.order_by):
        q = replace(q, order_by=tuple(replace(o, asc_explicit=False) for o in q.order_by))
        locations.append("order_by")
    if q.order_by and not ctx.output_order_required and q.limit is None:
        q = replace(q, order_by=())
        locations.append("order_by")
    return q, locations, []


def _scalar_subquery_guaranteed(sub: QueryTree) -> bool:
    """Single row guaranteed: one aggregate output and no grouping."""
    return (len(sub.select_items) == 1
            and not sub.group_by
            and contains_aggregate(sub.select_items[0].expr))


def _r04_in_to_equality(q, ctx):
    locations = []

    def fix_leaf(leaf):
        if isinstance(leaf, Atom) and leaf.op == "IN":
            subject, rhs = leaf.operands
            if isinstance(rhs, InList) and len(rhs.items) == 1:
                return canonicalize_atom(Atom("=", (subject, rhs.items[0])))
            if isinstance(rhs, Subquery) and _scalar_subquery_guaranteed(rhs.query):
                return canonicalize_atom(Atom("=", (subject, rhs)))
        return leaf

    q = _map_bools(q, lambda b: map_bool_leaves(b, fix_leaf), locations)
    return q, locations, []


def _r05_limit_to_min_max(q, ctx):
    if (len(q.select_items) == 1 and len(q.order_by) == 1 and q.limit == 1
            and not q.distinct and not q.group_by and q.having_expr is None):
        item = q.select_items[0]
        order = q.order_by[0]
        if (not isinstance(item.expr, (Star, Subquery))
                and not contains_aggregate(item.expr)
                and serialize_scalar(item.expr) == serialize_scalar(order.expr)):
            func = "MIN" if order.direction == "asc" else "MAX"
            new_item = replace(item, expr=FuncCall(func, (item.expr,)))
            q = replace(q, select_items=(new_item,), order_by=(), limit=None)
            return q, ["select"], []
    return q, [], []


def _r06_star_expansion(q, ctx):
    locations = []
    bindings = from_bindings(q.from_tree, ctx.schema)
    by_name = {b.name: b for b in bindings}

    new_items = []
    changed = False
    for it in q.select_items:
        if not isinstance(it.expr, Star):
            new_items.append(it)
            continue
        targets = [by_name[it.expr.qualifier]] if it.expr.qualifier in by_name \
            else (bindings if it.expr.qualifier is None else None)
        if not targets or any(b.columns is None for b in targets):
            new_items.append(it)  # unknown source shape; leave the star
            continue
        for b in targets:
            for col in b.columns:
                new_items.append(SelectItem(ColumnRef(col, qualifier=b.name)))
        changed = True
    if changed:
        q = replace(q, select_items=tuple(new_items))
        locations.append("select")
    return q, locations, []


def _r07_cnf(q, ctx):
    locations = []

    def normalize(expr):
        try:
            return cnf_to_expr(to_cnf(expr, ctx.atom_cap))
        except CnfBlowup:
            return expr

    q = _map_bools(q, normalize, locations)
    return q, locations, []


def _r08_projection_order(q, ctx):
    locations = []
    if not ctx.output_order_required:
        ordered = tuple(sorted(
            q.select_items,
            key=lambda it: (serialize_scalar(it.expr), it.alias or ""),
        ))
        if ordered != q.select_items:
            q = replace(q, select_items=ordered)
            locations.append("select")
        if q.order_by and q.limit is None:
            q = replace(q, order_by=())
            locations.append("order_by")
    return q, locations, []


def _r09_between(q, ctx):
    locations = []

    def fix_leaf(leaf):
        if isinstance(leaf, Atom) and leaf.op == "BETWEEN":
            subject, low, high = leaf.operands
            return and_(
                canonicalize_atom(Atom("<=", (low, subject))),
                canonicalize_atom(Atom("<=", (subject, high))),
            )
        return leaf

    q = _map_bools(q, lambda b: map_bool_leaves(b, fix_leaf), locations)
    return q, locations, []


def _r10_chains(q, ctx):
    locations = []

    def fix_leaf(leaf):
        if isinstance(leaf, ChainCmp):
            atoms = [
                canonicalize_atom(Atom(op, (a, b)))
                for op, a, b in zip(leaf.ops, leaf.operands, leaf.operands[1:])
            ]
            return and_(*atoms)
        return leaf

    q = _map_bools(q, lambda b: map_bool_leaves(b, fix_leaf), locations)
    return q, locations, []


def _r11_integer_strictness(q, ctx):
    locations = []

    def fix_leaf(leaf):
        if not (isinstance(leaf, Atom) and leaf.op in ("<=", ">=")):
            return leaf
        left, right = leaf.operands
        col, lit, col_left = None, None, True
        if isinstance(left, ColumnRef) and isinstance(right, Literal) and right.kind == "int":
            col, lit = left, right
        elif isinstance(right, ColumnRef) and isinstance(left, Literal) and left.kind == "int":
            col, lit, col_left = right, left, False
        else:
            return leaf
        if infer_type(col, q, ctx.schema) != "integer":
            return leaf
        c = lit.value
        if col_left:
            if leaf.op == ">=":  # col >= c  ->  col > c-1
                return canonicalize_atom(Atom(">", (col, Literal("int", c - 1))))
            return canonicalize_atom(Atom("<", (col, Literal("int", c + 1))))
        if leaf.op == "<=":  # c <= col  ->  c-1 < col
            return canonicalize_atom(Atom("<", (Literal("int", c - 1), col)))
        return canonicalize_atom(Atom(">", (Literal("int", c + 1), col)))

    q = _map_bools(q, lambda b: map_bool_leaves(b, fix_leaf), locations)
    return q, locations, []


def _map_all_scalars(q, fn):
    """fn over every scalar position; returns (new_q, changed clause tags)."""
    changed = []

    def apply(node, clause):
        if node is None:
            return None
        new = map_scalars(node, fn)
        if new != node:
            changed.append(clause)
        return new

    def fix_from(f):
        if f is None or isinstance(f, (TableRef, DerivedTable)):
            return f
        cond = apply(f.condition, "from") if f.condition is not None else None
        return Join(f.kind, fix_from(f.left), fix_from(f.right), cond)

    new_q = replace(
        q,
        select_items=tuple(replace(it, expr=apply(it.expr, "select")) for it in q.select_items),
        from_tree=fix_from(q.from_tree),
        where_expr=apply(q.where_expr, "where"),
        group_by=tuple(apply(g, "group_by") for g in q.group_by),
        having_expr=apply(q.having_expr, "having"),
        order_by=tuple(replace(o, expr=apply(o.expr, "order_by")) for o in q.order_by),
    )
    seen = []
    for c in changed:
        if c not in seen:
            seen.append(c)
    return new_q, seen


def _r12_round(q, ctx):
    def fix(e):
        if isinstance(e, FuncCall) and e.name == "ROUND" and e.args:
            if infer_type(e.args[0], q, ctx.schema) == "integer":
                return e.args[0]
        return e

    new_q, clauses = _map_all_scalars(q, fix)
    hints = [StyleHint("R12", c, "ROUND on an integer-valued expression has no effect")
             for c in clauses]
    return new_q, clauses, hints


def _r13_cast(q, ctx):
    def fix(e):
        if isinstance(e, FuncCall) and e.name == "CAST" and e.args:
            if infer_type(e.args[0], q, ctx.schema) == e.cast_type:
                return e.args[0]
        return e

    new_q, clauses = _map_all_scalars(q, fix)
    hints = [StyleHint("R13", c, "CAST to the column's existing type is unnecessary")
             for c in clauses]
    return new_q, clauses, hints


def _r14_comma_join(q, ctx):
    if q.from_tree is None or q.where_expr is None:
        return q, [], []
    locations = []
    while True:
        items = _comma_items(q.from_tree)
        if len(items) < 2:
            break
        bindings = from_bindings(q.from_tree, ctx.schema)
        item_of_binding = {}
        for idx, item in enumerate(items):
            for leaf in from_leaves(item):
                name = leaf.alias or leaf.name
                item_of_binding[name] = idx

        conjuncts = list(q.where_expr.children) if isinstance(q.where_expr, And) \
            else [q.where_expr]
        hit = None
        for ci, conj in enumerate(conjuncts):
            link = _linking_equality(conj, bindings, item_of_binding, ctx.schema)
            if link is not None:
                hit = (ci, link)
                break
        if hit is None:
            break
        ci, (qual_atom, idx_a, idx_b) = hit
        i, j = min(idx_a, idx_b), max(idx_a, idx_b)
        merged = Join("inner", items[i], items[j], qual_atom)
        rest = [it for k, it in enumerate(items) if k not in (i, j)]
        rest.insert(i, merged)
        remaining = conjuncts[:ci] + conjuncts[ci + 1:]
        q = replace(
            q,
            from_tree=_rebuild_comma(rest),
            where_expr=and_(*remaining) if remaining else None,
        )
        locations.append("from")
    return q, locations, []


def _linking_equality(conj, bindings, item_of_binding, schema):
    """A bare equality conjunct joining two distinct comma items, if any."""
    if not (isinstance(conj, Atom) and conj.op == "="):
        return None
    a, b = conj.operands
    if not (isinstance(a, ColumnRef) and isinstance(b, ColumnRef)):
        return None

    def candidates(ref):
        if ref.qualifier:
            return [x for x in bindings if x.name == ref.qualifier]
        return [x for x in bindings
                if x.columns is not None and ref.name in x.columns]

    pairs = set()
    ordered = []
    for ba in candidates(a):
        for bb in candidates(b):
            if ba.name == bb.name:
                continue
            ia, ib = item_of_binding.get(ba.name), item_of_binding.get(bb.name)
            if ia is None or ib is None or ia == ib:
                continue
            key = frozenset((ba.name, bb.name))
            if key not in pairs:
                pairs.add(key)
                ordered.append((ba, bb, ia, ib))
    if len(pairs) != 1:
        return None
    ba, bb, ia, ib = ordered[0]
    # earlier comma item qualifies the left operand
    if ia > ib:
        ba, bb, ia, ib = bb, ba, ib, ia
        a, b = b, a
    atom = canonicalize_atom(Atom("=", (replace(a, qualifier=ba.name),
                                        replace(b, qualifier=bb.name))))
    return atom, ia, ib


def _r15_groupby_distinct(q, ctx):
    if (q.group_by and q.having_expr is None
            and not contains_aggregate(And(tuple(ExprCond(it.expr) for it in q.select_items)))
            and not any(contains_aggregate(o.expr) for o in q.order_by)):
        select_keys = {serialize_scalar(it.expr) for it in q.select_items}
        group_keys = {serialize_scalar(g) for g in q.group_by}
        if select_keys == group_keys:
            q = replace(q, distinct=True, group_by=())
            return q, ["group_by"], []
    return q, [], []


def _r16_isnull(q, ctx):
    locations = []

    def fix_leaf(leaf):
        if (isinstance(leaf, ExprCond) and isinstance(leaf.expr, FuncCall)
                and leaf.expr.name == "ISNULL" and len(leaf.expr.args) == 1):
            return Atom("IS NULL", (leaf.expr.args[0],))
        return leaf

    q = _map_bools(q, lambda b: map_bool_leaves(b, fix_leaf), locations)
    return q, locations, []


def _r17_having_to_where(q, ctx):
    if (q.having_expr is not None and not q.group_by
            and not contains_aggregate(q.having_expr)
            and not any(contains_aggregate(it.expr) for it in q.select_items)):
        q = replace(
            q,
            where_expr=and_(q.where_expr, q.having_expr) if q.where_expr is not None
            else q.having_expr,
            having_expr=None,
        )
        return q, ["where"], []
    return q, [], []


def _r18_right_to_left(q, ctx):
    changed = []

    def fix(f):
        if f is None or isinstance(f, (TableRef, DerivedTable)):
            return f
        left = fix(f.left)
        right = fix(f.right)
        if f.kind == "right":
            changed.append(True)
            return Join("left", right, left, f.condition)
        return Join(f.kind, left, right, f.condition)

    new_from = fix(q.from_tree)
    if changed:
        return replace(q, from_tree=new_from), ["from"], []
    return q, [], []


@dataclass(frozen=True)
class RuleInfo:
    rule_id: str
    title: str
    hint_bearing: bool
    guard: str
    apply: object


RULES = (
    RuleInfo("R01", "Normalize alias names positionally", False,
             "aliases present", _r01_aliases),
    RuleInfo("R02", "Drop aliases and qualify columns when unambiguous", False,
             "no table repeated in scope", _r02_qualification),
    RuleInfo("R03", "Strip explicit ASC; drop ORDER BY when output order is free", False,
             "ORDER BY present; no LIMIT for the drop", _r03_order_normalization),
    RuleInfo("R04", "Rewrite one-element IN to equality", False,
             "one-element list or single-row aggregate subquery", _r04_in_to_equality),
    RuleInfo("R05", "Rewrite ORDER BY with LIMIT 1 to MIN/MAX", False,
             "single selected expression equals the sort expression", _r05_limit_to_min_max),
    RuleInfo("R06", "Expand star to the explicit column list", False,
             "column list known for every source", _r06_star_expansion),
    RuleInfo("R07", "Normalize conditions to sorted CNF, NOT pushed inward", False,
             "below the distribution cap", _r07_cnf),
    RuleInfo("R08", "Sort projection attributes when output order is free", False,
             "output order not required", _r08_projection_order),
    RuleInfo("R09", "Expand BETWEEN into two comparisons", False,
             "always", _r09_between),
    RuleInfo("R10", "Split chained comparisons into conjunctions", False,
             "always", _r10_chains),
    RuleInfo("R11", "Make non-strict integer comparisons strict", False,
             "integer-typed column against integer literal", _r11_integer_strictness),
    RuleInfo("R12", "Drop ROUND on integer-valued expressions", True,
             "argument provably integer", _r12_round),
    RuleInfo("R13", "Drop CAST to the already-correct type", True,
             "argument type equals the target type", _r13_cast),
    RuleInfo("R14", "Rewrite comma join with WHERE equality to INNER JOIN", False,
             "equality links two comma-joined tables; toggleable", _r14_comma_join),
    RuleInfo("R15", "Rewrite aggregate-free GROUP BY to SELECT DISTINCT", False,
             "grouping set equals projection; no aggregates or HAVING", _r15_groupby_distinct),
    RuleInfo("R16", "Rewrite ISNULL(x) to x IS NULL", False,
             "always", _r16_isnull),
    RuleInfo("R17", "Move aggregate-free HAVING into WHERE", False,
             "no GROUP BY, no aggregates", _r17_having_to_where),
    RuleInfo("R18", "Rewrite RIGHT JOIN to LEFT JOIN with swapped operands", False,
             "always", _r18_right_to_left),
)


def rule_catalog():
    """(rule id, title, hint-bearing flag, guard) for all 18 rules."""
    return [(r.rule_id, r.title, r.hint_bearing, r.guard) for r in RULES]


# ---------------------------------------------------------------------------
# Driver

def _map_nested_queries(q, fn):
    """Apply ``fn(sub_tree, path)`` to each directly nested QueryTree."""
    counters = {}

    def label(kind):
        idx = counters.get(kind, 0)
        counters[kind] = idx + 1
        return f"{kind}[{idx}]"

    def fix_scalar(clause):
        def fix(e):
            if isinstance(e, Subquery):
                return Subquery(fn(e.query, label(f"{clause}.sub")))
            return e
        return fix

    def fix_part(node, clause):
        return map_scalars(node, fix_scalar(clause))

    def fix_from(f):
        if f is None:
            return None
        if isinstance(f, TableRef):
            return f
        if isinstance(f, DerivedTable):
            return replace(f, query=fn(f.query, label("from.derived")))
        cond = fix_part(f.condition, "from") if f.condition is not None else None
        return Join(f.kind, fix_from(f.left), fix_from(f.right), cond)

    return replace(
        q,
        select_items=tuple(replace(it, expr=fix_part(it.expr, "select")) for it in q.select_items),
        from_tree=fix_from(q.from_tree),
        where_expr=fix_part(q.where_expr, "where") if q.where_expr is not None else None,
        group_by=tuple(fix_part(g, "group_by") for g in q.group_by),
        having_expr=fix_part(q.having_expr, "having") if q.having_expr is not None else None,
        order_by=tuple(replace(o, expr=fix_part(o.expr, "order_by")) for o in q.order_by),
    )


def harmonize(tree: QueryTree, schema: SchemaDef = EMPTY_SCHEMA, *,
              output_order_required: bool = False,
              rule_toggles: dict | None = None,
              atom_cap: int = DEFAULT_ATOM_CAP,
              max_passes: int = MAX_PASSES) -> CanonicalQuery:
    """Fixed point of the 18 rules; raises FixedPointNotReached beyond the
    pass bound (which would signal a rule-interaction bug)."""
    applied = []
    hints = []
    ctx = _Ctx(schema=schema, output_order_required=output_order_required,
               is_top=True, toggles=rule_toggles or {}, atom_cap=atom_cap)
    tree = _harmonize_level(tree, ctx, applied, hints, prefix="", max_passes=max_passes)
    return CanonicalQuery(tree=tree, applied_rules=tuple(applied), hints=tuple(hints))


def _harmonize_level(tree, ctx, applied, hints, prefix, max_passes):
    def recurse(sub, path):
        sub_ctx = _Ctx(schema=ctx.schema, output_order_required=False,
                       is_top=False, toggles=ctx.toggles, atom_cap=ctx.atom_cap)
        return _harmonize_level(sub, sub_ctx, applied, hints,
                                prefix=f"{prefix}{path}.", max_passes=max_passes)

    # nested queries normalize before their enclosing query, and again on
    # every pass: this level's rewrites (qualification, alias renames) can
    # change serializations inside subqueries, which invalidates their
    # lexical CNF ordering until they renormalize
    for _ in range(max_passes):
        changed = False
        renested = _map_nested_queries(tree, recurse)
        if renested != tree:
            tree = renested
            changed = True
        for rule in RULES:
            if not ctx.enabled(rule.rule_id):
                continue
            new_tree, locations, rule_hints = rule.apply(tree, ctx)
            if new_tree != tree:
                for loc in (locations or ["query"]):
                    applied.append((rule.rule_id, f"{prefix}{loc}"))
                for h in rule_hints:
                    hints.append(StyleHint(h.rule_id, h.clause, h.message))
                tree = new_tree
                changed = True
        if not changed:
            return tree
    raise FixedPointNotReached(
        f"harmonization did not converge within {max_passes} passes")
