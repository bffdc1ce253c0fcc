"""Per-task pool of reference solutions.

The pool grows semi-automatically: correct submissions that are not
duplicates of a known canonical form become candidates (or are auto
accepted when far from everything known); a lecturer reviews them on the
dashboard.  Solutions rejected as wrong move to a separate store and stay
remembered so identical ones never resurface.
"""
from __future__ import annotations

import threading
from dataclasses import dataclass, field, replace

from .config import Task
from .distance import total_distance
from .feedback import note_summary
from .harmonize import CanonicalQuery, harmonize
from .parser import parse

ACTIVE = "active"
CANDIDATE = "candidate"
REJECTED_WRONG = "rejected_wrong"
DELETED = "deleted"

GOOD = "good"
POOR = "poor"

LECTURER_NOTE = "Lecturer solution"

WRONG_SOLUTION_ADVISORY = (
    "Add test rows on which this solution and the lecturer solution return "
    "different results, then re-run the checks so it no longer grades as correct."
)


class UnknownEntry(Exception):
    pass


class ReviewConflict(Exception):
    """The entry is not in a reviewable state."""


@dataclass
class ReferenceSolution:
    id: str
    raw_text: str
    canonical: CanonicalQuery
    quality: str = GOOD
    origin: str = "learned"  # "lecturer" | "learned"
    status: str = CANDIDATE
    creation_order: int = 0
    match_count: int = 0
    reviewed: bool = False
    note: str = ""


@dataclass(frozen=True)
class PoolEvent:
    kind: str  # Duplicate | CandidateCreated | AutoAccepted | StoredWrong
    ref_id: str
    note: str = ""


@dataclass
class PoolState:
    """All reference solutions of one task, every status included.

    Mutations are serialized through a per-task lock (single writer);
    readers take immutable snapshots.
    """

    entries: list = field(default_factory=list)
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False)

    # -- queries ------------------------------------------------------------
    def references(self, mode: str = "multi_ref"):
        active = [e for e in self.entries if e.status == ACTIVE]
        if mode == "single_ref":
            return [e for e in active if e.origin == "lecturer"]
        return active

    def wrong_store(self):
        return [e for e in self.entries if e.status == REJECTED_WRONG]

    def get(self, entry_id: str) -> ReferenceSolution:
        for e in self.entries:
            if e.id == entry_id:
                return e
        raise UnknownEntry(entry_id)

    def lecturer_entry(self) -> ReferenceSolution:
        for e in self.entries:
            if e.origin == "lecturer":
                return e
        raise UnknownEntry("lecturer solution")

    def list_candidates(self):
        """Dashboard rows: every active or candidate entry, creation order."""
        rows = []
        for e in sorted(self.entries, key=lambda e: e.creation_order):
            if e.status not in (ACTIVE, CANDIDATE):
                continue
            rows.append({
                "id": e.id,
                "sql": e.raw_text[:60],
                "note": e.note,
                "status": e.status,
                "quality": e.quality,
                "pending": e.status == CANDIDATE or not e.reviewed,
                "match_count": e.match_count,
            })
        return rows

    # -- construction ---------------------------------------------------------
    @classmethod
    def for_task(cls, task: Task) -> "PoolState":
        pool = cls()
        canonical = _harmonize_for(task, task.reference_sql)
        pool.entries.append(ReferenceSolution(
            id="r0000", raw_text=task.reference_sql.strip(), canonical=canonical,
            quality=GOOD, origin="lecturer", status=ACTIVE, creation_order=0,
            reviewed=True, note=LECTURER_NOTE,
        ))
        return pool

    def _next_id(self):
        return f"r{len(self.entries):04d}"

    # -- mutations ------------------------------------------------------------
    def ingest_correct(self, task: Task, submission_text: str) -> PoolEvent:
        """Admit a Correct submission: duplicate, candidate, or auto-accept.

        A submission whose canonical form sits at distance 0 from any
        remembered form (any status, wrong store included) is a duplicate.
        """
        with self._lock:
            cfg = task.config
            canonical = _harmonize_for(task, submission_text)
            for e in self.entries:
                d = total_distance(canonical, e.canonical, cfg.weights)
                if d.total == 0:
                    e.match_count += 1
                    return PoolEvent("Duplicate", e.id)

            lecturer = self.lecturer_entry()
            dist_lect = total_distance(canonical, lecturer.canonical, cfg.weights)
            note = note_summary(dist_lect, canonical.tree, lecturer.canonical.tree)

            pool_min = min(
                (total_distance(canonical, e.canonical, cfg.weights).total
                 for e in self.entries if e.status in (ACTIVE, CANDIDATE)),
                default=None,
            )
            entry = ReferenceSolution(
                id=self._next_id(), raw_text=submission_text.strip(),
                canonical=canonical, origin="learned",
                creation_order=len(self.entries), note=note,
            )
            self.entries.append(entry)

            flags = []
            if any(c.c1 for c in dist_lect.clauses.values()):
                flags.append("C1 differences")
            if any(c.c2 for c in dist_lect.clauses.values()):
                flags.append("C2 differences")
            event_note = "; ".join([note] + flags) if note else "; ".join(flags)
            if pool_min is not None and pool_min >= cfg.auto_accept_threshold:
                entry.status = ACTIVE
                entry.reviewed = False
                return PoolEvent("AutoAccepted", entry.id, event_note)
            entry.status = CANDIDATE
            return PoolEvent("CandidateCreated", entry.id, event_note)

    def review(self, entry_id: str, decision: str, quality: str = GOOD):
        """Lecturer decision: accept(quality) | reject_wrong | delete.

        Returns (entry, advisory or None).  Accepting an auto-accepted entry
        confirms it; rejecting or deleting one undoes the auto-acceptance.
        """
        with self._lock:
            entry = self.get(entry_id)
            reviewable = entry.status == CANDIDATE or (
                entry.status == ACTIVE and not entry.reviewed)
            if decision == "accept" and entry.status == ACTIVE and entry.reviewed:
                reviewable = True  # idempotent re-accept (quality change)
            if not reviewable:
                raise ReviewConflict(
                    f"entry {entry_id} is {entry.status} and already reviewed")
            if decision == "accept":
                entry.status = ACTIVE
                entry.quality = quality
                entry.reviewed = True
                return entry, None
            if decision == "reject_wrong":
                entry.status = REJECTED_WRONG
                entry.reviewed = True
                return entry, WRONG_SOLUTION_ADVISORY
            if decision == "delete":
                entry.status = DELETED
                entry.reviewed = True
                return entry, None
            raise ValueError(f"unknown decision {decision!r}")

    def recheck_entries(self):
        """Entries the counterexample workflow re-grades."""
        return [e for e in sorted(self.entries, key=lambda e: e.creation_order)
                if e.status in (ACTIVE, CANDIDATE, REJECTED_WRONG)]


def _harmonize_for(task: Task, text: str) -> CanonicalQuery:
    cfg = task.config
    return harmonize(
        parse(text, task.schema), task.schema,
        output_order_required=task.output_order_required,
        rule_toggles=cfg.toggles_dict(), atom_cap=cfg.atom_cap)
