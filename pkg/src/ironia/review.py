"""Human verification queue over machine annotations.

State is an append-only event log (enqueue, assign, verdict) replayed on
open, file-backed when a path is given. A single lock serializes mutations
so concurrent reviewers can poll and submit safely; assignment hands out
time-limited leases and expired leases silently return to pending.
"""

from __future__ import annotations

import json
import os
import threading
import time
from dataclasses import dataclass, replace
from enum import Enum
from pathlib import Path
from typing import Callable, Iterable, Optional

from .corpus import (
    Dataset,
    DistributionReport,
    Entry,
    Label,
    Mode,
    Provenance,
    class_distribution,
    normalize_label,
    round_half_up,
)
from .errors import (
    AlreadyResolvedError,
    ContractViolation,
    DuplicateIdError,
    IncompleteQueueError,
    InvalidVerdictError,
    NotFoundError,
    StaleAssignmentError,
)
from .gateway import Annotation

DEFAULT_LEASE_SECONDS = 30 * 60.0

MULTICLASS_TAGS = (Label.IRONIA, Label.NEGATIVO, Label.NEUTRO, Label.POSITIVO)


class Decision(str, Enum):
    ACCEPT = "accept"
    OVERRIDE = "override"
    UNREADABLE = "unreadable"


class Status(str, Enum):
    PENDING = "pending"
    ASSIGNED = "assigned"
    RESOLVED = "resolved"


@dataclass(frozen=True)
class Verdict:
    decision: Decision
    reviewer_id: str
    decided_at: float
    override_tag: Optional[Label] = None

    def __post_init__(self) -> None:
        if self.decision is Decision.OVERRIDE and self.override_tag is None:
            raise InvalidVerdictError("override verdicts require an override_tag")
        if self.decision is not Decision.OVERRIDE and self.override_tag is not None:
            raise InvalidVerdictError(
                f"{self.decision.value} verdicts must not carry an override_tag"
            )

    def final_tag(self, machine_tag: Label) -> Optional[Label]:
        if self.decision is Decision.ACCEPT:
            return machine_tag
        if self.decision is Decision.OVERRIDE:
            return self.override_tag
        return None

    def to_dict(self) -> dict:
        return {
            "decision": self.decision.value,
            "reviewer_id": self.reviewer_id,
            "decided_at": self.decided_at,
            "override_tag": self.override_tag.value if self.override_tag else None,
        }


@dataclass(frozen=True)
class ReviewItem:
    entry: Entry
    annotation: Annotation
    status: Status
    assigned_to: Optional[str] = None
    lease_expiry: Optional[float] = None
    verdict: Optional[Verdict] = None
    final_tag: Optional[Label] = None

    def to_dict(self) -> dict:
        return {
            "entry": self.entry.to_dict(),
            "annotation": self.annotation.to_dict(),
            "status": self.status.value,
            "assigned_to": self.assigned_to,
            "lease_expiry": self.lease_expiry,
            "verdict": self.verdict.to_dict() if self.verdict else None,
            "final_tag": self.final_tag.value if self.final_tag else None,
        }


@dataclass(frozen=True)
class AgreementReport:
    """Marginal distribution of machine tags vs final human tags."""

    machine_counts: dict[Label, int]
    human_counts: dict[Label, int]
    unreadable_count: int
    total: int
    machine_pct: dict[Label, float]
    human_pct: dict[Label, float]
    unreadable_pct: float

    def to_dict(self) -> dict:
        return {
            "machine_counts": {t.value: n for t, n in self.machine_counts.items()},
            "human_counts": {t.value: n for t, n in self.human_counts.items()},
            "unreadable_count": self.unreadable_count,
            "total": self.total,
            "machine_pct": {t.value: p for t, p in self.machine_pct.items()},
            "human_pct": {t.value: p for t, p in self.human_pct.items()},
            "unreadable_pct": self.unreadable_pct,
        }


class _ItemState:
    __slots__ = ("entry", "annotation", "status", "assigned_to", "lease_expiry", "verdict", "final_tag")

    def __init__(self, entry: Entry, annotation: Annotation):
        self.entry = entry
        self.annotation = annotation
        self.status = Status.PENDING
        self.assigned_to: Optional[str] = None
        self.lease_expiry: Optional[float] = None
        self.verdict: Optional[Verdict] = None
        self.final_tag: Optional[Label] = None

    def lease_expired(self, now: float) -> bool:
        return (
            self.status is Status.ASSIGNED
            and self.lease_expiry is not None
            and self.lease_expiry <= now
        )

    def snapshot(self) -> ReviewItem:
        return ReviewItem(
            entry=self.entry,
            annotation=self.annotation,
            status=self.status,
            assigned_to=self.assigned_to,
            lease_expiry=self.lease_expiry,
            verdict=self.verdict,
            final_tag=self.final_tag,
        )


class ReviewQueue:
    """Persistent verification queue; mutations go through one writer lock."""

    def __init__(
        self,
        log_path: str | Path | None = None,
        lease_seconds: float = DEFAULT_LEASE_SECONDS,
        clock: Callable[[], float] = time.time,
    ):
        self.lease_seconds = lease_seconds
        self.clock = clock
        self._lock = threading.Lock()
        self._items: dict[str, _ItemState] = {}
        self._seq = 0
        self._log_path = Path(log_path) if log_path else None
        self._log_file = None
        if self._log_path and self._log_path.exists():
            self._replay()

    # -- event log ----------------------------------------------------------

    def _replay(self) -> None:
        with self._log_path.open(encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                event = json.loads(line)
                self._seq = max(self._seq, int(event["seq"]))
                self._apply(event)

    def _apply(self, event: dict) -> None:
        kind = event["type"]
        if kind == "enqueue":
            entry = Entry.from_dict(event["entry"])
            annotation = Annotation.from_dict(event["annotation"])
            self._items[entry.id] = _ItemState(entry, annotation)
        elif kind == "assign":
            item = self._items[event["entry_id"]]
            item.status = Status.ASSIGNED
            item.assigned_to = event["reviewer_id"]
            item.lease_expiry = float(event["lease_expiry"])
        elif kind == "verdict":
            item = self._items[event["entry_id"]]
            verdict = Verdict(
                decision=Decision(event["decision"]),
                reviewer_id=event["reviewer_id"],
                decided_at=float(event.get("decided_at", event["at"])),
                override_tag=(
                    normalize_label(event["override_tag"])
                    if event.get("override_tag")
                    else None
                ),
            )
            item.verdict = verdict
            item.final_tag = verdict.final_tag(item.annotation.tag)
            item.status = Status.RESOLVED
            item.assigned_to = None
            item.lease_expiry = None
        else:
            raise ValueError(f"unknown event type {kind!r}")

    def _append(self, event: dict) -> None:
        self._seq += 1
        event = {"seq": self._seq, "at": self.clock(), **event}
        if self._log_path is not None:
            if self._log_file is None:
                self._log_path.parent.mkdir(parents=True, exist_ok=True)
                self._log_file = self._log_path.open("a", encoding="utf-8")
            self._log_file.write(json.dumps(event, ensure_ascii=False) + "\n")
            self._log_file.flush()
            os.fsync(self._log_file.fileno())
        self._apply(event)

    def close(self) -> None:
        if self._log_file is not None:
            self._log_file.close()
            self._log_file = None

    # -- operations -----------------------------------------------------------

    def enqueue(self, items: Iterable[tuple[Entry, Annotation]]) -> int:
        """Queue (entry, annotation) pairs for review; returns count added.

        The batch is validated before anything is admitted, so a duplicate
        id rejects the whole call.
        """
        items = list(items)
        with self._lock:
            seen: set[str] = set()
            for entry, annotation in items:
                if annotation.entry_id != entry.id:
                    raise ContractViolation(
                        f"annotation {annotation.entry_id!r} does not match entry {entry.id!r}"
                    )
                if entry.id in self._items or entry.id in seen:
                    raise DuplicateIdError(f"entry {entry.id!r} already queued")
                seen.add(entry.id)
            for entry, annotation in items:
                self._append(
                    {
                        "type": "enqueue",
                        "entry": entry.to_dict(),
                        "annotation": annotation.to_dict(),
                    }
                )
            return len(items)

    def next_pending(self, reviewer_id: str) -> Optional[ReviewItem]:
        """Atomically assign the oldest pending item to the reviewer.

        Items whose lease expired without a verdict are served again.
        Returns None when nothing is available.
        """
        with self._lock:
            now = self.clock()
            for item in self._items.values():
                if item.status is Status.PENDING or item.lease_expired(now):
                    self._append(
                        {
                            "type": "assign",
                            "entry_id": item.entry.id,
                            "reviewer_id": reviewer_id,
                            "lease_expiry": now + self.lease_seconds,
                        }
                    )
                    return item.snapshot()
            return None

    def submit_verdict(self, entry_id: str, verdict: Verdict) -> ReviewItem:
        """Resolve an item; the write is durable before this returns."""
        with self._lock:
            item = self._items.get(entry_id)
            if item is None:
                raise NotFoundError(f"no review item for entry {entry_id!r}")
            if item.status is Status.RESOLVED:
                raise AlreadyResolvedError(f"entry {entry_id!r} is already resolved")
            now = self.clock()
            if (
                item.status is Status.ASSIGNED
                and item.assigned_to != verdict.reviewer_id
                and not item.lease_expired(now)
            ):
                raise StaleAssignmentError(
                    f"entry {entry_id!r} is leased to {item.assigned_to!r}"
                )
            if (
                verdict.decision is Decision.OVERRIDE
                and verdict.override_tag == item.annotation.tag
            ):
                raise InvalidVerdictError(
                    "override_tag must differ from the machine tag"
                )
            self._append(
                {
                    "type": "verdict",
                    "entry_id": entry_id,
                    "decision": verdict.decision.value,
                    "reviewer_id": verdict.reviewer_id,
                    "decided_at": verdict.decided_at,
                    "override_tag": verdict.override_tag.value if verdict.override_tag else None,
                    "final_tag": (
                        tag.value if (tag := verdict.final_tag(item.annotation.tag)) else None
                    ),
                }
            )
            return item.snapshot()

    # -- views ----------------------------------------------------------------

    def get(self, entry_id: str) -> ReviewItem:
        with self._lock:
            item = self._items.get(entry_id)
            if item is None:
                raise NotFoundError(f"no review item for entry {entry_id!r}")
            return item.snapshot()

    def items(self) -> list[ReviewItem]:
        with self._lock:
            return [item.snapshot() for item in self._items.values()]

    def counts(self) -> dict[str, int]:
        """Pending/assigned/resolved totals; expired leases count as pending."""
        with self._lock:
            now = self.clock()
            pending = assigned = resolved = 0
            for item in self._items.values():
                if item.status is Status.RESOLVED:
                    resolved += 1
                elif item.status is Status.ASSIGNED and not item.lease_expired(now):
                    assigned += 1
                else:
                    pending += 1
            return {
                "pending": pending,
                "assigned": assigned,
                "resolved": resolved,
                "total": len(self._items),
            }


def agreement_report(queue: ReviewQueue, partial: bool = False) -> AgreementReport:
    """Machine-vs-human marginal tag distributions over resolved items.

    With partial=False every queued item must be resolved; partial=True
    reports over whatever has been resolved so far (for live dashboards).
    """
    items = queue.items()
    resolved = [i for i in items if i.status is Status.RESOLVED]
    if not partial and len(resolved) != len(items):
        raise IncompleteQueueError(
            f"{len(items) - len(resolved)} of {len(items)} items still unresolved"
        )
    machine = {tag: 0 for tag in MULTICLASS_TAGS}
    human = {tag: 0 for tag in MULTICLASS_TAGS}
    unreadable = 0
    for item in resolved:
        machine[item.annotation.tag] += 1
        if item.final_tag is None:
            unreadable += 1
        else:
            human[item.final_tag] += 1
    total = len(resolved)
    if total:
        machine_pct = {t: round_half_up(n, total) for t, n in machine.items()}
        human_pct = {t: round_half_up(n, total) for t, n in human.items()}
        unreadable_pct = round_half_up(unreadable, total)
    else:
        machine_pct = {t: 0.0 for t in MULTICLASS_TAGS}
        human_pct = {t: 0.0 for t in MULTICLASS_TAGS}
        unreadable_pct = 0.0
    return AgreementReport(
        machine_counts=machine,
        human_counts=human,
        unreadable_count=unreadable,
        total=total,
        machine_pct=machine_pct,
        human_pct=human_pct,
        unreadable_pct=unreadable_pct,
    )


def export_verified(queue: ReviewQueue) -> list[Entry]:
    """Entries for every resolved, readable item: label = final human tag,
    provenance machine_verified. Unreadable items are retained in the log
    but never exported."""
    items = queue.items()
    unresolved = [i for i in items if i.status is not Status.RESOLVED]
    if unresolved:
        raise IncompleteQueueError(f"{len(unresolved)} items still unresolved")
    exported = []
    for item in items:
        if item.final_tag is None:
            continue
        exported.append(
            replace(
                item.entry,
                label=item.final_tag,
                category_encoded=None,
                provenance=Provenance.MACHINE_VERIFIED,
            )
        )
    return exported


def verified_distribution(queue: ReviewQueue) -> Optional[DistributionReport]:
    """Class distribution of final tags resolved so far; None when empty."""
    resolved = [i for i in queue.items() if i.final_tag is not None]
    if not resolved:
        return None
    entries = tuple(
        replace(i.entry, label=i.final_tag, category_encoded=None) for i in resolved
    )
    return class_distribution(Dataset(name="verified", mode=Mode.MULTICLASS, entries=entries))
