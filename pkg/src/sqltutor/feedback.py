"""Student-facing feedback: verdict, static tree diff, and quality notes.

The static diff compares the extracted node lists of the harmonized
submission and the closest reference, clause by clause.  Hints locate the
defect (clause, kind, token) but never reveal the reference text.
"""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field

from .checker import CORRECT, NON_EXECUTABLE, REJECTED, Verdict, verdict as dynamic_verdict
from .config import EngineConfig, Task
from .distance import DistanceBreakdown, EmptyPool, closest_reference, total_distance
from .harmonize import CanonicalQuery, harmonize
from .nodes import QueryTree, clause_presence, extract_nodes
from .parser import ParseError, parse, unresolved_columns

CATEGORY_OF_KIND = {
    "table": "C1",
    "attribute": "C1",
    "value": "C1",
    "keyword": "C2",
    "function": "C2",
}

CATEGORY_ORDER = {"C1": 0, "C2": 1, "C3": 2, "Style": 3}

NOTE_MISSING_CLAUSES = "Missing multiple clauses"
NOTE_DIFFERENT_ATTRIBUTES = "Different attributes"
NOTE_ADDITIONAL_ORDER_BY = "Additional order by"
NOTE_DIFFERENT_STRUCTURE = "Different structure"


@dataclass(frozen=True)
class Hint:
    category: str  # C1 | C2 | C3 | Style
    clause: str
    kind: str  # missing | extra | mismatch | ordering | improvement
    token: str = ""

    def to_dict(self):
        return {"category": self.category, "clause": self.clause,
                "kind": self.kind, "token": self.token}


@dataclass
class FeedbackReport:
    verdict: Verdict
    mode: str  # single_ref | multi_ref
    closest_ref: str | None = None
    distance: DistanceBreakdown | None = None
    hints: list = field(default_factory=list)
    note: str = ""

    def to_dict(self):
        return {
            "verdict": {"kind": self.verdict.kind, "detail": self.verdict.detail},
            "mode": self.mode,
            "closest_ref": self.closest_ref,
            "distance": self.distance.to_dict() if self.distance else None,
            "hints": [h.to_dict() for h in self.hints],
            "note": self.note,
        }


def static_diff(sub: QueryTree, ref: QueryTree, verbosity: str = "full"):
    """Per-clause node comparison; returns a list of Hints.

    Reference-side unmatched tokens are missing, submission-side extra;
    a missing/extra pair of the same clause and node kind folds into one
    mismatch hint; order-only differences yield one ordering hint (C3).
    """
    nodes_sub = extract_nodes(sub)
    nodes_ref = extract_nodes(ref)
    hints = []
    clauses = []
    for clause, _, _ in nodes_ref + nodes_sub:
        if clause not in clauses:
            clauses.append(clause)
    for clause in clauses:
        in_sub = [(k, t) for c, k, t in nodes_sub if c == clause]
        in_ref = [(k, t) for c, k, t in nodes_ref if c == clause]
        cnt_sub, cnt_ref = Counter(in_sub), Counter(in_ref)
        if cnt_sub == cnt_ref:
            if in_sub != in_ref:
                hints.append(Hint("C3", clause, "ordering"))
            continue
        missing = list((cnt_ref - cnt_sub).elements())
        extra = list((cnt_sub - cnt_ref).elements())
        by_kind_missing = {}
        for kind, token in missing:
            by_kind_missing.setdefault(kind, []).append(token)
        by_kind_extra = {}
        for kind, token in extra:
            by_kind_extra.setdefault(kind, []).append(token)
        for kind in sorted(set(by_kind_missing) | set(by_kind_extra)):
            miss = sorted(by_kind_missing.get(kind, []))
            ext = sorted(by_kind_extra.get(kind, []))
            category = CATEGORY_OF_KIND.get(kind, "C2")
            while miss and ext:
                want, got = miss.pop(0), ext.pop(0)
                token = f"{want} vs {got}" if verbosity == "full" else ""
                hints.append(Hint(category, clause, "mismatch", token))
            for token in miss:
                hints.append(Hint(category, clause, "missing",
                                  token if verbosity == "full" else ""))
            for token in ext:
                hints.append(Hint(category, clause, "extra",
                                  token if verbosity == "full" else ""))
    return hints


def note_summary(d: DistanceBreakdown | None, sub: QueryTree, ref: QueryTree) -> str:
    """Deterministic dashboard phrase for a submission/reference pair."""
    if d is not None and d.total == 0:
        return ""
    sub_clauses = clause_presence(sub)
    ref_clauses = clause_presence(ref)
    missing = ref_clauses - sub_clauses - {"order_by"}
    if len(missing) >= 2:
        return NOTE_MISSING_CLAUSES
    if "order_by" in sub_clauses and "order_by" not in ref_clauses:
        return NOTE_ADDITIONAL_ORDER_BY
    if d is not None:
        c1_focus = d.clauses["select"].c1 + d.clauses["where"].c1
        rest = sum(c.c2 + c.c3 for c in d.clauses.values()) \
            + d.clauses["from"].c1 + d.clauses["group_by"].c1 \
            + d.clauses["having"].c1 + d.clauses["order_by"].c1
        if c1_focus > 0 and c1_focus >= rest:
            return NOTE_DIFFERENT_ATTRIBUTES
    return NOTE_DIFFERENT_STRUCTURE


def _sorted_capped(hints, cap):
    ranked = sorted(hints, key=lambda h: CATEGORY_ORDER.get(h.category, 9))
    return ranked[:cap]


def generate_feedback(task: Task, pool, submission_text: str,
                      mode: str = "multi_ref") -> FeedbackReport:
    """Full grading pipeline for one submission.

    ``pool`` is the task's reference pool (see sqltutor.pool).  In
    ``single_ref`` mode only the lecturer solution is considered.
    """
    cfg: EngineConfig = task.config
    v = dynamic_verdict(task, submission_text)
    report = FeedbackReport(verdict=v, mode=mode)
    if v.kind == REJECTED:
        return report

    try:
        tree = parse(submission_text, task.schema)
    except ParseError as e:
        report.verdict = Verdict(NON_EXECUTABLE, str(e))
        return report

    canonical = harmonize(
        tree, task.schema,
        output_order_required=task.output_order_required,
        rule_toggles=cfg.toggles_dict(), atom_cap=cfg.atom_cap)

    refs = pool.references(mode)
    if not refs:
        raise EmptyPool(f"task {task.id} has no active reference solutions")
    ref, dist = closest_reference(canonical, refs, cfg.weights)
    report.closest_ref = ref.id
    report.distance = dist

    style_hints = [Hint("Style", h.clause, "improvement", h.message)
                   for h in canonical.hints]

    if v.kind == CORRECT:
        report.hints = _sorted_capped(style_hints, cfg.hint_cap)
        if ref.quality == "poor":
            report.note = "Correct, and a cleaner formulation exists"
            good = [r for r in pool.references("multi_ref") if r.quality == "good"]
            if good:
                better, _ = closest_reference(canonical, good, cfg.weights)
                improvement = static_diff(canonical.tree, better.canonical.tree,
                                          cfg.hint_verbosity)
                report.hints = _sorted_capped(report.hints + improvement, cfg.hint_cap)
        return report

    # WrongResult, or NonExecutable with a parseable tree
    diff_hints = static_diff(canonical.tree, ref.canonical.tree, cfg.hint_verbosity)
    for clause, token in unresolved_columns(tree, task.schema):
        diff_hints.append(Hint("C1", clause, "mismatch",
                               f"unknown column {token}" if cfg.hint_verbosity == "full" else ""))
    report.hints = _sorted_capped(style_hints + diff_hints, cfg.hint_cap)
    report.note = note_summary(dist, canonical.tree, ref.canonical.tree)
    return report
