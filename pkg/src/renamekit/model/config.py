"""Model and training configuration."""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from pathlib import Path


@dataclass
class ModelConfig:
    channels: int = 32            # query/feature width; equals the text-embedding dim
    num_heads: int = 4
    num_blocks: int = 3           # 9 at reference scale; 3 is the desk default
    ffn_factor: int = 4
    scales: tuple[int, ...] = (4, 2, 1)  # cross-attention feature strides, cycled per block
    num_classes: int = 5
    mask_threshold: float = 0.5
    dropout: float = 0.0

    @property
    def void_index(self) -> int:
        return self.num_classes


@dataclass
class TrainConfig:
    steps: int = 2000
    lr: float = 1e-4
    weight_decay: float = 0.05
    lr_milestones: tuple[float, ...] = (0.6, 0.85)  # fractions of total steps
    lr_gamma: float = 0.1
    p_replace: float = 0.3        # predicted-for-gt bias swap probability
    warmup_fraction: float = 0.1  # pure gt biases for this fraction of steps
    bce_weight: float = 5.0
    dice_weight: float = 5.0
    class_weight: float = 2.0
    seed: int = 0
    num_threads: int = 1


@dataclass
class RunConfig:
    model: ModelConfig = field(default_factory=ModelConfig)
    train: TrainConfig = field(default_factory=TrainConfig)

    def to_json(self) -> dict:
        return asdict(self)

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_json(), indent=2))

    @classmethod
    def from_json(cls, doc: dict) -> "RunConfig":
        model = doc.get("model", {})
        train = doc.get("train", {})
        model = {**model, "scales": tuple(model.get("scales", (4, 2, 1)))}
        train = {**train, "lr_milestones": tuple(train.get("lr_milestones", (0.6, 0.85)))}
        return cls(model=ModelConfig(**model), train=TrainConfig(**train))

    @classmethod
    def load(cls, path: str | Path) -> "RunConfig":
        return cls.from_json(json.loads(Path(path).read_text()))
