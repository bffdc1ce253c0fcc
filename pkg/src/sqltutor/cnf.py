"""Boolean condition normalization: atom canonicalization, CNF, truth oracle.

Atoms are opaque leaves compared by serialized text after canonicalization;
there is no arithmetic reasoning (``x+1 > 2`` and ``x > 1`` stay distinct).
"""
from __future__ import annotations

from dataclasses import dataclass

from .nodes import (
    And,
    Atom,
    BOOL_LEAF_TYPES,
    COMPARISON_OPS,
    FLIPPED_OP,
    Not,
    Or,
    and_,
    is_constant,
    or_,
    serialize_bool,
    serialize_scalar,
)

DEFAULT_ATOM_CAP = 64


class CnfBlowup(Exception):
    """Distribution would exceed the literal-occurrence cap."""


class TooManyAtoms(Exception):
    """truth_equivalent refuses formulas beyond its enumeration cap."""


def canonicalize_atom(leaf):
    """Orient comparison atoms into a normal form.

    Column-bearing operands go left of constants; otherwise the lexically
    smaller serialized operand goes left, flipping the operator as needed.
    ``=`` and ``<>`` order operands the same way.  Applying twice equals
    applying once.  Non-comparison leaves pass through unchanged.
    """
    if not isinstance(leaf, Atom) or leaf.op not in COMPARISON_OPS:
        return leaf
    left, right = leaf.operands
    key_l = (is_constant(left), serialize_scalar(left))
    key_r = (is_constant(right), serialize_scalar(right))
    if key_l <= key_r:
        return leaf
    return Atom(FLIPPED_OP[leaf.op], (right, left))


@dataclass(frozen=True)
class CnfLiteral:
    negated: bool
    atom: object  # Atom / ChainCmp / ExprCond leaf

    def key(self) -> str:
        text = serialize_bool(self.atom)
        return f"NOT {text}" if self.negated else text


@dataclass(frozen=True)
class CnfFormula:
    clauses: tuple  # tuple of tuples of CnfLiteral, each level sorted

    def literal_multiset(self):
        out = []
        for clause in self.clauses:
            out.extend(lit.key() for lit in clause)
        return out

    def connective_counts(self):
        """(and_count, per-clause or_counts) as they would appear in text."""
        ands = max(len(self.clauses) - 1, 0)
        ors = tuple(max(len(c) - 1, 0) for c in self.clauses)
        return ands, ors


def _nnf(expr, negated, out_leaf):
    """Push negations down to leaves, rebuilding with And/Or only."""
    if isinstance(expr, Not):
        return _nnf(expr.child, not negated, out_leaf)
    if isinstance(expr, And):
        parts = [_nnf(c, negated, out_leaf) for c in expr.children]
        return or_(*parts) if negated else and_(*parts)
    if isinstance(expr, Or):
        parts = [_nnf(c, negated, out_leaf) for c in expr.children]
        return and_(*parts) if negated else or_(*parts)
    if isinstance(expr, BOOL_LEAF_TYPES):
        return out_leaf(expr, negated)
    raise TypeError(f"not a boolean expression: {expr!r}")


@dataclass(frozen=True)
class _Lit:
    literal: CnfLiteral


def to_cnf(expr, atom_cap: int = DEFAULT_ATOM_CAP) -> CnfFormula:
    """Sorted, deduplicated conjunctive normal form of ``expr``.

    Raises CnfBlowup when distribution would exceed ``atom_cap`` literal
    occurrences; callers fall back to structural comparison.
    """
    def leaf(atom, negated):
        return _Lit(CnfLiteral(negated, canonicalize_atom(atom)))

    nnf = _nnf(expr, False, leaf)

    def distribute(node):
        # returns list of clauses; each clause is a list of CnfLiteral
        if isinstance(node, _Lit):
            return [[node.literal]]
        if isinstance(node, And):
            clauses = []
            for c in node.children:
                clauses.extend(distribute(c))
                _check_size(clauses, atom_cap)
            return clauses
        if isinstance(node, Or):
            product = [[]]
            for c in node.children:
                sub = distribute(c)
                product = [p + q for p in product for q in sub]
                _check_size(product, atom_cap)
            return product
        raise TypeError(f"unexpected node in NNF: {node!r}")

    clauses = distribute(nnf)
    normal = []
    for clause in clauses:
        uniq = {lit.key(): lit for lit in clause}
        normal.append(tuple(uniq[k] for k in sorted(uniq)))
    uniq_clauses = {tuple(l.key() for l in c): c for c in normal}
    # subsumption: a clause strictly containing another clause is redundant
    key_sets = {k: frozenset(k) for k in uniq_clauses}
    kept = {}
    for k, c in uniq_clauses.items():
        if not any(key_sets[other] < key_sets[k] for other in uniq_clauses
                   if other != k):
            kept[k] = c
    ordered = tuple(kept[k] for k in sorted(kept))
    return CnfFormula(ordered)


def _check_size(clauses, cap):
    if sum(len(c) for c in clauses) > cap:
        raise CnfBlowup(f"CNF exceeds {cap} literal occurrences")


def cnf_to_expr(formula: CnfFormula):
    """Rebuild a BoolExpr from a CnfFormula (collapsing trivial nesting)."""
    def lit_expr(lit: CnfLiteral):
        return Not(lit.atom) if lit.negated else lit.atom

    clause_exprs = [or_(*[lit_expr(l) for l in c]) for c in formula.clauses]
    if not clause_exprs:
        raise ValueError("empty formula")
    return and_(*clause_exprs)


MAX_TRUTH_ATOMS = 20


def truth_equivalent(a, b, max_atoms: int = MAX_TRUTH_ATOMS) -> bool:
    """Exhaustive truth-table agreement over the canonicalized atom keys."""
    keys = []

    def collect(expr):
        if isinstance(expr, Not):
            collect(expr.child)
        elif isinstance(expr, (And, Or)):
            for c in expr.children:
                collect(c)
        elif isinstance(expr, BOOL_LEAF_TYPES):
            key = serialize_bool(canonicalize_atom(expr))
            if key not in keys:
                keys.append(key)
        else:
            raise TypeError(f"not a boolean expression: {expr!r}")

    collect(a)
    collect(b)
    if len(keys) > max_atoms:
        raise TooManyAtoms(f"{len(keys)} distinct atoms exceeds cap {max_atoms}")
    index = {k: i for i, k in enumerate(keys)}

    def evaluate(expr, assignment):
        if isinstance(expr, Not):
            return not evaluate(expr.child, assignment)
        if isinstance(expr, And):
            return all(evaluate(c, assignment) for c in expr.children)
        if isinstance(expr, Or):
            return any(evaluate(c, assignment) for c in expr.children)
        key = serialize_bool(canonicalize_atom(expr))
        return assignment >> index[key] & 1 == 1

    for assignment in range(1 << len(keys)):
        if evaluate(a, assignment) != evaluate(b, assignment):
            return False
    return True
