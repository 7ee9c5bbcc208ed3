"""Core record types for segmentation datasets and name assignments."""
from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from ..errors import ValidationError


class VerificationState(str, enum.Enum):
    UNVERIFIED = "unverified"
    TOP1 = "top1"
    TOP3 = "top3"
    OTHERS = "others"
    CROSS_CLASS = "cross_class"


@dataclass
class ClassEntry:
    class_id: int
    original_names: list[str]
    is_thing: bool

    def __post_init__(self):
        if not self.original_names:
            raise ValidationError(f"class {self.class_id} has no original names")
        self.original_names = [n.strip().lower() for n in self.original_names]
        if any(not n for n in self.original_names):
            raise ValidationError(f"class {self.class_id} has an empty original name")

    @property
    def primary_name(self) -> str:
        return self.original_names[0]

    def name_string(self) -> str:
        """All originals as one comma-joined string (e.g. "rock, stone")."""
        return ", ".join(self.original_names)


@dataclass
class ClassTable:
    entries: dict[int, ClassEntry] = field(default_factory=dict)

    def __contains__(self, class_id: int) -> bool:
        return class_id in self.entries

    def __getitem__(self, class_id: int) -> ClassEntry:
        return self.entries[class_id]

    def __len__(self) -> int:
        return len(self.entries)

    def ids(self) -> list[int]:
        return sorted(self.entries)

    def add(self, entry: ClassEntry) -> None:
        if entry.class_id in self.entries:
            raise ValidationError(f"duplicate class id {entry.class_id}")
        self.entries[entry.class_id] = entry

    def to_json(self) -> dict:
        return {
            "classes": [
                {
                    "class_id": e.class_id,
                    "original_names": e.original_names,
                    "is_thing": e.is_thing,
                }
                for e in (self.entries[i] for i in self.ids())
            ]
        }

    @classmethod
    def from_json(cls, doc: dict) -> "ClassTable":
        table = cls()
        for row in doc.get("classes", []):
            table.add(
                ClassEntry(
                    class_id=int(row["class_id"]),
                    original_names=list(row["original_names"]),
                    is_thing=bool(row["is_thing"]),
                )
            )
        return table


@dataclass
class SegmentRecord:
    segment_id: int
    image_id: str
    class_id: int
    mask: np.ndarray  # bool, H x W
    area: int
    is_thing: bool

    def validate(self) -> None:
        pixels = int(np.count_nonzero(self.mask))
        if pixels == 0:
            raise ValidationError(f"segment {self.segment_id} has an empty mask")
        if pixels != self.area:
            raise ValidationError(
                f"segment {self.segment_id}: declared area {self.area} != mask pixels {pixels}"
            )


@dataclass
class NameAssignment:
    segment_id: int
    ranked: list[tuple[str, float]]  # (name, score), non-increasing by score
    chosen: str
    verification: VerificationState = VerificationState.UNVERIFIED

    def validate(self) -> None:
        scores = [s for _, s in self.ranked]
        if any(not (0.0 <= s <= 1.0) for s in scores):
            raise ValidationError(
                f"assignment {self.segment_id}: scores must lie in [0, 1]"
            )
        if any(a < b for a, b in zip(scores, scores[1:])):
            raise ValidationError(
                f"assignment {self.segment_id}: ranked list not sorted by score"
            )
        if not self.chosen:
            raise ValidationError(f"assignment {self.segment_id}: empty chosen name")

    def to_json(self) -> dict:
        return {
            "segment_id": self.segment_id,
            "ranked": [[name, float(score)] for name, score in self.ranked],
            "chosen": self.chosen,
            "verification": self.verification.value,
        }

    @classmethod
    def from_json(cls, doc: dict) -> "NameAssignment":
        return cls(
            segment_id=int(doc["segment_id"]),
            ranked=[(str(n), float(s)) for n, s in doc["ranked"]],
            chosen=str(doc["chosen"]),
            verification=VerificationState(doc.get("verification", "unverified")),
        )
