"""Verification state backed by an append-only event log.

Every decision is appended as one JSON line; replaying the log rebuilds the
exact store state, and for a segment decided more than once the latest
event wins while all events stay on record.
"""
from __future__ import annotations

import json
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..candidates import CandidatePool
from ..errors import DataError, ValidationError
from ..store.types import ClassTable, NameAssignment, SegmentRecord, VerificationState

DECISION_SOURCES = ("top1", "top3", "others", "cross_class")
TOP_K = 3


class ConflictError(DataError):
    """Raised when a decision expected a pending task that is already decided."""


@dataclass
class Decision:
    segment_id: int
    chosen: str
    source: str
    annotator: str
    timestamp: float
    seq: int

    def to_json(self) -> dict:
        return {
            "segment_id": self.segment_id,
            "chosen": self.chosen,
            "source": self.source,
            "annotator": self.annotator,
            "timestamp": self.timestamp,
            "seq": self.seq,
        }


@dataclass
class TaskState:
    assignment: NameAssignment
    segment: SegmentRecord
    decision: Decision | None = None

    @property
    def state(self) -> str:
        return "decided" if self.decision is not None else "pending"

    @property
    def top3(self) -> list[tuple[str, float]]:
        return self.assignment.ranked[:TOP_K]


class VerificationStore:
    def __init__(
        self,
        table: ClassTable,
        segments: list[SegmentRecord],
        assignments: list[NameAssignment],
        pools: dict[int, CandidatePool],
        event_log: str | Path,
    ):
        self.table = table
        self.pools = pools
        self.segments = {s.segment_id: s for s in segments}
        self.tasks: dict[int, TaskState] = {}
        for a in assignments:
            if a.segment_id not in self.segments:
                raise DataError(f"assignment {a.segment_id} has no matching segment")
            self.tasks[a.segment_id] = TaskState(a, self.segments[a.segment_id])
        self.event_log = Path(event_log)
        self._seq = 0
        if self.event_log.exists():
            self._replay()

    def _replay(self) -> None:
        for lineno, line in enumerate(self.event_log.read_text().splitlines(), start=1):
            if not line.strip():
                continue
            try:
                doc = json.loads(line)
                decision = Decision(
                    segment_id=int(doc["segment_id"]),
                    chosen=str(doc["chosen"]),
                    source=str(doc["source"]),
                    annotator=str(doc["annotator"]),
                    timestamp=float(doc["timestamp"]),
                    seq=int(doc["seq"]),
                )
            except (KeyError, ValueError) as exc:
                raise DataError(f"{self.event_log}:{lineno}: malformed event") from exc
            task = self.tasks.get(decision.segment_id)
            if task is not None:
                task.decision = decision
            self._seq = max(self._seq, decision.seq)

    def allowed_names(self, segment_id: int, replacement_class_id: int | None = None) -> list[str]:
        task = self.tasks[segment_id]
        if replacement_class_id is not None:
            if replacement_class_id not in self.pools:
                raise DataError(f"no candidate pool for class {replacement_class_id}")
            return list(self.pools[replacement_class_id].candidates)
        return list(self.pools[task.segment.class_id].candidates)

    def others(self, segment_id: int) -> list[str]:
        task = self.tasks[segment_id]
        top3_names = {name for name, _ in task.top3}
        return [n for n in self.allowed_names(segment_id) if n not in top3_names]

    def list_tasks(self, state: str = "all", page: int = 0, page_size: int = 50) -> dict:
        if state not in ("all", "pending", "decided"):
            raise ValidationError(f"unknown state filter: {state}")
        if page < 0 or page_size < 1:
            raise ValidationError(f"invalid page {page} / page_size {page_size}")
        rows = [
            t for _, t in sorted(self.tasks.items())
            if state == "all" or t.state == state
        ]
        start = page * page_size
        return {
            "total": len(rows),
            "page": page,
            "page_size": page_size,
            "tasks": rows[start : start + page_size],
        }

    def get_task(self, segment_id: int) -> TaskState:
        if segment_id not in self.tasks:
            raise KeyError(segment_id)
        return self.tasks[segment_id]

    def decide(
        self,
        segment_id: int,
        chosen: str,
        source: str,
        annotator: str,
        replacement_class_id: int | None = None,
        expect_pending: bool = False,
    ) -> TaskState:
        """Validate and append one decision; latest event wins.

        Identical repeat payloads are absorbed without a duplicate event.
        With ``expect_pending`` the call fails on an already-decided task
        instead of overriding it (the review UI's conflict check).
        """
        task = self.get_task(segment_id)
        if source not in DECISION_SOURCES:
            raise ValidationError(f"unknown decision source: {source}")
        if expect_pending and task.decision is not None:
            raise ConflictError(f"segment {segment_id} already decided")
        if source == "cross_class":
            if replacement_class_id is None:
                raise ValidationError("cross_class decisions need replacement_class_id")
            allowed = self.allowed_names(segment_id, replacement_class_id)
        else:
            allowed = self.allowed_names(segment_id)
            top3_names = [name for name, _ in task.top3]
            if source == "top1" and (not top3_names or chosen != top3_names[0]):
                raise ValidationError(f"{chosen!r} is not the top-1 suggestion")
            if source == "top3" and chosen not in top3_names:
                raise ValidationError(f"{chosen!r} is not among the top-3 suggestions")
        if chosen not in allowed:
            raise ValidationError(
                f"{chosen!r} is outside the allowed candidate set for segment {segment_id}"
            )
        prev = task.decision
        if (
            prev is not None
            and prev.chosen == chosen
            and prev.source == source
            and prev.annotator == annotator
        ):
            return task  # idempotent repeat
        self._seq += 1
        decision = Decision(
            segment_id=segment_id,
            chosen=chosen,
            source=source,
            annotator=annotator,
            timestamp=time.time(),
            seq=self._seq,
        )
        with self.event_log.open("a") as fh:
            fh.write(json.dumps(decision.to_json(), sort_keys=True) + "\n")
        task.decision = decision
        return task

    def progress(self) -> dict:
        decided = [t for t in self.tasks.values() if t.decision is not None]
        by_source = {source: 0 for source in DECISION_SOURCES}
        for t in decided:
            by_source[t.decision.source] += 1
        return {
            "total": len(self.tasks),
            "decided": len(decided),
            "pending": len(self.tasks) - len(decided),
            "by_source": by_source,
        }

    def export(self, path: str | Path) -> dict:
        """Write decided tasks as an assignments file; returns statistics."""
        from ..store.assignments import write_assignments

        decided = sorted(
            (t for t in self.tasks.values() if t.decision is not None),
            key=lambda t: t.assignment.segment_id,
        )
        exported = [
            NameAssignment(
                segment_id=t.assignment.segment_id,
                ranked=t.assignment.ranked,
                chosen=t.decision.chosen,
                verification=VerificationState(t.decision.source),
            )
            for t in decided
        ]
        write_assignments(exported, path)
        n = len(decided)
        fractions = {
            source: (
                sum(1 for t in decided if t.decision.source == source) / n if n else 0.0
            )
            for source in DECISION_SOURCES
        }
        return {"count": n, "fractions": fractions, "path": str(path)}

    def image_for(self, segment_id: int, images_root: Path) -> np.ndarray:
        from PIL import Image

        task = self.get_task(segment_id)
        path = images_root / f"{task.segment.image_id}.png"
        if not path.exists():
            raise DataError(f"image not found: {path}")
        with Image.open(path) as img:
            return np.asarray(img.convert("RGB"))
