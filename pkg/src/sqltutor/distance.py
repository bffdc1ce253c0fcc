"""Clause-wise, category-weighted distance between two queries.

Categories: c1 counts wrong/missing used objects (attributes, tables,
values), c2 counts structural differences (joins, connectives), c3 counts
ordering differences.  Weights honor c1 > c2 > c3; the defaults (4, 2, 1)
are configurable, only the ordering is fixed.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from fractions import Fraction

from . import joins
from .cnf import CnfBlowup, DEFAULT_ATOM_CAP, to_cnf
from .nodes import (
    And,
    Atom,
    BOOL_LEAF_TYPES,
    ChainCmp,
    DerivedTable,
    EMPTY_QUERY,
    ExprCond,
    Join,
    Not,
    Or,
    QueryTree,
    TableRef,
    base_table_names,
    derived_tables,
    serialize_scalar,
)

CLAUSES = ("select", "from", "where", "group_by", "having", "order_by")


class EmptyPool(Exception):
    pass


def _to_fraction(v) -> Fraction:
    if isinstance(v, Fraction):
        return v
    if isinstance(v, int):
        return Fraction(v)
    if isinstance(v, str):
        return Fraction(v)
    if isinstance(v, float):
        return Fraction(v).limit_denominator(10 ** 6)
    raise TypeError(f"not a weight: {v!r}")


@dataclass(frozen=True)
class WeightsConfig:
    w1: Fraction = Fraction(4)
    w2: Fraction = Fraction(2)
    w3: Fraction = Fraction(1)

    def __post_init__(self):
        object.__setattr__(self, "w1", _to_fraction(self.w1))
        object.__setattr__(self, "w2", _to_fraction(self.w2))
        object.__setattr__(self, "w3", _to_fraction(self.w3))
        if not (self.w1 > self.w2 > self.w3 > 0):
            raise ValueError("weights must satisfy w1 > w2 > w3 > 0")

    def scaled(self, factor) -> "WeightsConfig":
        f = _to_fraction(factor)
        return WeightsConfig(self.w1 * f, self.w2 * f, self.w3 * f)


DEFAULT_WEIGHTS = WeightsConfig()


@dataclass
class Components:
    c1: int = 0
    c2: int = 0
    c3: int = 0

    def add(self, other: "Components"):
        self.c1 += other.c1
        self.c2 += other.c2
        self.c3 += other.c3

    def as_tuple(self):
        return (self.c1, self.c2, self.c3)


@dataclass
class DistanceBreakdown:
    weights: WeightsConfig
    clauses: dict = field(default_factory=dict)  # clause -> Components

    def __post_init__(self):
        for clause in CLAUSES:
            self.clauses.setdefault(clause, Components())

    @property
    def total(self) -> Fraction:
        w = self.weights
        return sum(
            (w.w1 * c.c1 + w.w2 * c.c2 + w.w3 * c.c3
             for c in self.clauses.values()),
            Fraction(0),
        )

    def merge(self, other: "DistanceBreakdown"):
        for clause, comp in other.clauses.items():
            self.clauses[clause].add(comp)

    def component_vector(self):
        return tuple(
            v for clause in CLAUSES for v in self.clauses[clause].as_tuple()
        )

    def to_dict(self):
        return {
            "clauses": {
                clause: {"c1": c.c1, "c2": c.c2, "c3": c.c3}
                for clause, c in self.clauses.items()
            },
            "weights": {"w1": str(self.weights.w1), "w2": str(self.weights.w2),
                        "w3": str(self.weights.w3)},
            "total": str(self.total),
        }


# ---------------------------------------------------------------------------
# List alignment primitives

def transposition_count(perm) -> int:
    """Minimal number of (arbitrary) transpositions sorting a permutation."""
    seen = [False] * len(perm)
    cycles = 0
    for start in range(len(perm)):
        if seen[start]:
            continue
        cycles += 1
        j = start
        while not seen[j]:
            seen[j] = True
            j = perm[j]
    return len(perm) - cycles


def keyed_list_distance(keys_a, keys_b):
    """(c1, c3) for two ordered key lists.

    c1 is the multiset symmetric difference; c3 is the minimal transposition
    count aligning the order of the common items (duplicates pair up by
    occurrence index).
    """
    from collections import Counter

    count_a, count_b = Counter(keys_a), Counter(keys_b)
    common = count_a & count_b
    c1 = sum((count_a - common).values()) + sum((count_b - common).values())

    remaining = dict(common)
    positions_b = {}
    taken = Counter()
    order_in_b = []
    for key in keys_b:
        if remaining.get(key, 0) > taken[key]:
            positions_b.setdefault(key, []).append(len(order_in_b))
            order_in_b.append(key)
            taken[key] += 1
    used = Counter()
    perm = []
    for key in keys_a:
        if key in positions_b and used[key] < len(positions_b[key]):
            perm.append(positions_b[key][used[key]])
            used[key] += 1
    c3 = transposition_count(perm)
    return c1, c3


def hungarian(cost) -> tuple:
    """Exact minimum-cost square assignment (augmenting paths, potentials).

    Costs may be Fractions; returns (assignment row->col, total cost).
    """
    n = len(cost)
    if n == 0:
        return (), Fraction(0)
    INF = None  # sentinel for "unvisited"
    u = [Fraction(0)] * (n + 1)
    v = [Fraction(0)] * (n + 1)
    way = [0] * (n + 1)
    p = [0] * (n + 1)  # p[j] = row assigned to column j (1-based)
    for i in range(1, n + 1):
        p[0] = i
        j0 = 0
        minv = [INF] * (n + 1)
        used = [False] * (n + 1)
        while True:
            used[j0] = True
            i0 = p[j0]
            delta = INF
            j1 = -1
            for j in range(1, n + 1):
                if used[j]:
                    continue
                cur = cost[i0 - 1][j - 1] - u[i0] - v[j]
                if minv[j] is None or cur < minv[j]:
                    minv[j] = cur
                    way[j] = j0
                if delta is None or minv[j] < delta:
                    delta = minv[j]
                    j1 = j
            for j in range(n + 1):
                if used[j]:
                    u[p[j]] += delta
                    v[j] -= delta
                elif minv[j] is not None:
                    minv[j] -= delta
            j0 = j1
            if p[j0] == 0:
                break
        while j0:
            j1 = way[j0]
            p[j0] = p[j1]
            j0 = j1
    assignment = [0] * n
    for j in range(1, n + 1):
        if p[j]:
            assignment[p[j] - 1] = j - 1
    total = sum((cost[i][assignment[i]] for i in range(n)), Fraction(0))
    return tuple(assignment), total


def levenshtein(a: str, b: str) -> int:
    """Single-character edit distance on raw strings."""
    if a == b:
        return 0
    if not a:
        return len(b)
    if not b:
        return len(a)
    prev = list(range(len(b) + 1))
    for i, ca in enumerate(a, start=1):
        cur = [i] + [0] * len(b)
        for j, cb in enumerate(b, start=1):
            cur[j] = min(prev[j] + 1, cur[j - 1] + 1,
                         prev[j - 1] + (ca != cb))
        prev = cur
    return prev[-1]


# ---------------------------------------------------------------------------
# Clause distances

def _tree_of(q):
    return q.tree if hasattr(q, "tree") else q


def _item_keys(q: QueryTree):
    # select-item aliases are output labels, not used objects; compare by
    # the expression's canonical serialization
    return [serialize_scalar(it.expr) for it in q.select_items]


def select_distance(a, b):
    a, b = _tree_of(a), _tree_of(b)
    return keyed_list_distance(_item_keys(a), _item_keys(b))


def groupby_distance(a, b):
    a, b = _tree_of(a), _tree_of(b)
    return keyed_list_distance(
        [serialize_scalar(g) for g in a.group_by],
        [serialize_scalar(g) for g in b.group_by],
    )


def orderby_distance(a, b):
    """(c1, c3): expression mismatches and direction flips count into c1,
    reordering of the common expressions into c3."""
    a, b = _tree_of(a), _tree_of(b)
    keys_a = [serialize_scalar(o.expr) for o in a.order_by]
    keys_b = [serialize_scalar(o.expr) for o in b.order_by]
    c1, c3 = keyed_list_distance(keys_a, keys_b)
    dir_a = {k: o.direction for k, o in zip(keys_a, a.order_by)}
    dir_b = {k: o.direction for k, o in zip(keys_b, b.order_by)}
    for key in set(dir_a) & set(dir_b):
        if dir_a[key] != dir_b[key]:
            c1 += 1
    return c1, c3


def _structural_where_counts(expr):
    """Literal keys plus textual AND/OR counts, for the CNF-blowup fallback."""
    literals = []
    ands = ors = 0

    def walk(node, negated):
        nonlocal ands, ors
        if node is None:
            return
        if isinstance(node, Not):
            walk(node.child, not negated)
        elif isinstance(node, And):
            ands += len(node.children) - 1
            for c in node.children:
                walk(c, negated)
        elif isinstance(node, Or):
            ors += len(node.children) - 1
            for c in node.children:
                walk(c, negated)
        elif isinstance(node, BOOL_LEAF_TYPES):
            from .cnf import CnfLiteral, canonicalize_atom
            literals.append(CnfLiteral(negated, canonicalize_atom(node)).key())
        else:
            raise TypeError(f"not a boolean expression: {node!r}")

    walk(expr, False)
    return sorted(literals), ands, ors


def where_distance(a, b, *, clause: str = "where", atom_cap: int = DEFAULT_ATOM_CAP):
    """(c1, c2) over the sorted CNF forms of the two conditions.

    c1 = symmetric difference of the literal multisets; c2 = unmatched
    and/or connectives, comparing clause-wise after lexical sorting.  On
    CNF blowup both sides fall back to sorted structural counting.
    """
    a, b = _tree_of(a), _tree_of(b)
    expr_a = getattr(a, f"{clause}_expr")
    expr_b = getattr(b, f"{clause}_expr")
    if expr_a is None and expr_b is None:
        return 0, 0
    try:
        lits_a, ands_a, ors_a = _cnf_counts(expr_a, atom_cap)
        lits_b, ands_b, ors_b = _cnf_counts(expr_b, atom_cap)
    except CnfBlowup:
        lits_a, flat_ands_a, flat_ors_a = _structural_where_counts(expr_a) if expr_a is not None else ([], 0, 0)
        lits_b, flat_ands_b, flat_ors_b = _structural_where_counts(expr_b) if expr_b is not None else ([], 0, 0)
        c1, _ = keyed_list_distance(lits_a, lits_b)
        c2 = abs(flat_ands_a - flat_ands_b) + abs(flat_ors_a - flat_ors_b)
        return c1, c2
    c1, _ = keyed_list_distance(lits_a, lits_b)
    c2 = abs(ands_a - ands_b)
    for i in range(max(len(ors_a), len(ors_b))):
        oa = ors_a[i] if i < len(ors_a) else 0
        ob = ors_b[i] if i < len(ors_b) else 0
        c2 += abs(oa - ob)
    return c1, c2


def _cnf_counts(expr, atom_cap):
    if expr is None:
        return [], 0, ()
    formula = to_cnf(expr, atom_cap)
    ands, ors = formula.connective_counts()
    return formula.literal_multiset(), ands, ors


def _prune_derived(node):
    """Base-table join skeleton: derived tables drop out of the tree."""
    if node is None or isinstance(node, DerivedTable):
        return None
    if isinstance(node, TableRef):
        return node
    left = _prune_derived(node.left)
    right = _prune_derived(node.right)
    if left is None:
        return right
    if right is None:
        return left
    return Join(node.kind, left, right, node.condition)


def _join_kinds_preorder(node, out):
    if isinstance(node, Join):
        out.append(node.kind)
        _join_kinds_preorder(node.left, out)
        _join_kinds_preorder(node.right, out)


def _structural_join_mismatch(a, b) -> int:
    """Positional join-kind/topology comparison; oracle fallback."""
    kinds_a, kinds_b = [], []
    _join_kinds_preorder(a, kinds_a)
    _join_kinds_preorder(b, kinds_b)
    mismatches = abs(len(kinds_a) - len(kinds_b))
    for ka, kb in zip(kinds_a, kinds_b):
        if ka != kb:
            mismatches += 1
    return mismatches


def from_distance(a, b, weights: WeightsConfig = DEFAULT_WEIGHTS):
    """(c1, c2, subquery breakdowns): table-set difference, join-structure
    difference, and the matched derived-subquery pair breakdowns."""
    a, b = _tree_of(a), _tree_of(b)
    tables_a = set(base_table_names(a.from_tree))
    tables_b = set(base_table_names(b.from_tree))
    c1 = len(tables_a ^ tables_b)

    skel_a = _prune_derived(a.from_tree)
    skel_b = _prune_derived(b.from_tree)
    if skel_a is None and skel_b is None:
        c2 = 0
    else:
        try:
            c2 = joins.join_distance(skel_a, skel_b)
        except (joins.TooManyTables, joins.UnmappableCondition):
            c2 = _structural_join_mismatch(skel_a, skel_b)

    subs_a = [d.query for d in derived_tables(a.from_tree)]
    subs_b = [d.query for d in derived_tables(b.from_tree)]
    pair_breakdowns = []
    n = max(len(subs_a), len(subs_b))
    if n:
        grid = [
            [
                total_distance(
                    subs_a[i] if i < len(subs_a) else EMPTY_QUERY,
                    subs_b[j] if j < len(subs_b) else EMPTY_QUERY,
                    weights,
                )
                for j in range(n)
            ]
            for i in range(n)
        ]
        cost = [[grid[i][j].total for j in range(n)] for i in range(n)]
        assignment, _ = hungarian(cost)
        pair_breakdowns = [grid[i][assignment[i]] for i in range(n)]
    return c1, c2, pair_breakdowns


def total_distance(a, b, weights: WeightsConfig = DEFAULT_WEIGHTS) -> DistanceBreakdown:
    """Full clause-wise breakdown; zero iff the two trees are equivalent
    under the measure.  Both queries are expected to be harmonized."""
    a, b = _tree_of(a), _tree_of(b)
    d = DistanceBreakdown(weights=weights)

    c1, c3 = select_distance(a, b)
    d.clauses["select"].c1 += c1
    d.clauses["select"].c3 += c3
    if a.distinct != b.distinct:
        d.clauses["select"].c2 += 1

    c1, c2, pair_breakdowns = from_distance(a, b, weights)
    d.clauses["from"].c1 += c1
    d.clauses["from"].c2 += c2
    for pair in pair_breakdowns:
        d.merge(pair)

    c1, c2 = where_distance(a, b, clause="where")
    d.clauses["where"].c1 += c1
    d.clauses["where"].c2 += c2

    c1, c2 = where_distance(a, b, clause="having")
    d.clauses["having"].c1 += c1
    d.clauses["having"].c2 += c2

    c1, c3 = groupby_distance(a, b)
    d.clauses["group_by"].c1 += c1
    d.clauses["group_by"].c3 += c3

    c1, c3 = orderby_distance(a, b)
    d.clauses["order_by"].c1 += c1
    d.clauses["order_by"].c3 += c3
    if a.limit != b.limit:
        d.clauses["order_by"].c2 += 1

    return d


def closest_reference(sub, pool, weights: WeightsConfig = DEFAULT_WEIGHTS):
    """(reference, breakdown) of the active reference minimizing total;
    ties break toward the earliest creation order."""
    candidates = [r for r in pool if getattr(r, "status", "active") == "active"]
    if not candidates:
        raise EmptyPool("no active reference solutions")
    best = None
    best_d = None
    for ref in sorted(candidates, key=lambda r: getattr(r, "creation_order", 0)):
        d = total_distance(sub, ref.canonical, weights)
        if best_d is None or d.total < best_d.total:
            best, best_d = ref, d
    return best, best_d
