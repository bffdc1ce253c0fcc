"""Evaluation methodology over recorded submission corpora.

Reduction curves show how many distinct correct solutions survive a
Levenshtein-distance dedup at increasing thresholds; harmonization
reduction counts distinct canonical forms; learning metrics classify
consecutive submission pairs as progress, sideways, or backward moves.
"""
from __future__ import annotations

from dataclasses import dataclass

from .config import Task
from .distance import DEFAULT_WEIGHTS, closest_reference, levenshtein
from .harmonize import harmonize
from .nodes import serialize
from .parser import ParseError, parse


@dataclass(frozen=True)
class SubmissionRecord:
    student: str
    task: str
    index: int  # contiguous per (student, task)
    timestamp: str
    text: str
    verdict: str = ""


@dataclass(frozen=True)
class LearningMetrics:
    mode: str
    backward_moves: int
    sideways_moves: int
    progress_moves: int
    avg_trials_to_progress: float
    pairs: int


def reduction_curve(corpus, thresholds):
    """threshold -> surviving count under greedy scan-order dedup.

    A submission is kept iff its minimum Levenshtein distance to every
    previously kept submission is >= the threshold (boundary inclusive).
    """
    texts = [r.text if isinstance(r, SubmissionRecord) else r for r in corpus]
    out = {}
    for threshold in thresholds:
        kept = []
        for text in texts:
            if text in kept:
                continue  # exact duplicates never survive
            if all(levenshtein(text, k) >= threshold for k in kept):
                kept.append(text)
        out[threshold] = len(kept)
    return out


def harmonization_reduction(task: Task, corpus) -> int:
    """Number of distinct canonical forms among the corpus submissions."""
    cfg = task.config
    forms = set()
    for record in corpus:
        text = record.text if isinstance(record, SubmissionRecord) else record
        tree = parse(text, task.schema)
        canonical = harmonize(
            tree, task.schema,
            output_order_required=task.output_order_required,
            rule_toggles=cfg.toggles_dict(), atom_cap=cfg.atom_cap)
        forms.add(serialize(canonical.tree))
    return len(forms)


def learning_metrics(corpus, task: Task, pool, mode: str,
                     weights=None) -> LearningMetrics:
    """Classify consecutive submission pairs per (student, task sequence).

    backward: a clause component that was 0 becomes positive; progress:
    the weighted total strictly decreases; sideways: total unchanged.
    Trials-to-progress averages the run lengths between progress events.
    """
    weights = weights or task.config.weights
    cfg = task.config

    groups = {}
    for r in corpus:
        groups.setdefault((r.student, r.task), []).append(r)
    for key in groups:
        groups[key].sort(key=lambda r: r.index)

    backward = sideways = progress = pairs = 0
    trial_runs = []

    for records in groups.values():
        vectors = []
        for r in records:
            try:
                tree = parse(r.text, task.schema)
            except ParseError:
                vectors.append(None)
                continue
            canonical = harmonize(
                tree, task.schema,
                output_order_required=task.output_order_required,
                rule_toggles=cfg.toggles_dict(), atom_cap=cfg.atom_cap)
            refs = pool.references(mode)
            _, d = closest_reference(canonical, refs, weights)
            vectors.append(d)
        counter = 0
        for prev, cur in zip(vectors, vectors[1:]):
            if prev is None or cur is None:
                continue
            pairs += 1
            counter += 1
            pv, cv = prev.component_vector(), cur.component_vector()
            if any(p == 0 and c > 0 for p, c in zip(pv, cv)):
                backward += 1
            if cur.total < prev.total:
                progress += 1
                trial_runs.append(counter)
                counter = 0
            elif cur.total == prev.total:
                sideways += 1
    avg = sum(trial_runs) / len(trial_runs) if trial_runs else 0.0
    return LearningMetrics(
        mode=mode, backward_moves=backward, sideways_moves=sideways,
        progress_moves=progress, avg_trials_to_progress=avg, pairs=pairs)
