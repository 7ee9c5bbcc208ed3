"""Line-delimited persistence for name assignments."""
from __future__ import annotations

import json
from pathlib import Path

from ..errors import DataError
from .types import NameAssignment


def write_assignments(assignments: list[NameAssignment], path: str | Path) -> None:
    """Write one JSON record per line, ordered by segment id.

    Invariants are checked before anything is written, so a failed call
    leaves no partial file behind.
    """
    for a in assignments:
        a.validate()
    ordered = sorted(assignments, key=lambda a: a.segment_id)
    lines = [json.dumps(a.to_json(), sort_keys=True) for a in ordered]
    Path(path).write_text("\n".join(lines) + ("\n" if lines else ""))


def read_assignments(path: str | Path) -> list[NameAssignment]:
    path = Path(path)
    if not path.exists():
        raise DataError(f"assignments file not found: {path}")
    assignments = []
    for lineno, line in enumerate(path.read_text().splitlines(), start=1):
        if not line.strip():
            continue
        try:
            assignments.append(NameAssignment.from_json(json.loads(line)))
        except (KeyError, ValueError) as exc:
            raise DataError(f"{path}:{lineno}: malformed assignment record") from exc
    for a in assignments:
        a.validate()
    return assignments
