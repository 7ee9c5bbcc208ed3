"""Human verification walkthrough: tasks, decisions, event log, export.

Annotators see each segment with its top-3 suggested names and scores,
confirm one or pick from the remaining candidates; every decision appends
to an event log (latest wins, nothing is erased), and the export writes
the verified assignments plus the per-source statistics.

The same store backs the HTTP API (`renamekit serve-verify`) and the
browser client under frontend/.
"""
import tempfile
from pathlib import Path

import numpy as np
from PIL import Image

from renamekit.candidates import CandidatePool
from renamekit.service.store import VerificationStore
from renamekit.store.types import ClassEntry, ClassTable, NameAssignment, SegmentRecord

workdir = Path(tempfile.mkdtemp())
table = ClassTable()
table.add(ClassEntry(class_id=0, original_names=["field"], is_thing=False))
pools = {0: CandidatePool(0, ["rural field", "sports field", "crop field",
                              "grassland", "green field"], "manual")}

segments, assignments = [], []
rng = np.random.default_rng(0)
(workdir / "images").mkdir()
for i in range(4):
    mask = np.zeros((20, 20), dtype=bool)
    mask[3:12, 3 + i:14 + i] = True
    segments.append(SegmentRecord(segment_id=i + 1, image_id=f"img{i}", class_id=0,
                                  mask=mask, area=int(mask.sum()), is_thing=False))
    rgb = rng.integers(50, 200, size=(20, 20, 3), dtype=np.uint8)
    Image.fromarray(rgb, "RGB").save(workdir / "images" / f"img{i}.png")
    assignments.append(NameAssignment(
        segment_id=i + 1,
        ranked=[("rural field", 0.91), ("sports field", 0.64), ("crop field", 0.4)],
        chosen="rural field",
    ))

store = VerificationStore(table, segments, assignments, pools,
                          workdir / "events.jsonl")
print(f"pending tasks: {store.progress()['pending']}")
task = store.get_task(1)
print(f"task 1 top-3: {task.top3}")
print(f"task 1 others: {store.others(1)}")

store.decide(1, "rural field", "top1", annotator="ann-a")
store.decide(2, "sports field", "top3", annotator="ann-a")
store.decide(3, "grassland", "others", annotator="ann-b")
store.decide(3, "green field", "others", annotator="ann-a")  # later event wins
print(f"\nafter four decisions: {store.progress()}")
print(f"task 3 resolved to: {store.get_task(3).decision.chosen!r} "
      f"(both events kept in {store.event_log.name})")

stats = store.export(workdir / "verified.jsonl")
print(f"\nexported {stats['count']} verified assignments")
print("fractions by source:", {k: round(v, 3) for k, v in stats["fractions"].items()})

rebuilt = VerificationStore(table, segments, assignments, pools,
                            workdir / "events.jsonl")
print(f"replaying the event log reconstructs the state: "
      f"{rebuilt.progress() == store.progress()}")
