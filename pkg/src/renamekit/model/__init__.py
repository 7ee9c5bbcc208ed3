from .blocks import DecoderBlock, MaskedCrossAttention, SelfAttention
from .config import ModelConfig, RunConfig, TrainConfig
from .losses import (
    LossWeights,
    QueryBatch,
    binary_cross_entropy,
    compute_batch_loss,
    compute_segment_loss,
    dice_loss,
    threshold_iou,
)
from .network import (
    FrozenBackbone,
    ModelOutput,
    PixelDecoder,
    RenamingModel,
    downsample_bias,
    parameter_checksum,
    predict_heads,
    replace_bias,
)
from .training import (
    TrainingData,
    TrainResult,
    build_query_batch,
    load_checkpoint,
    save_checkpoint,
    train,
    write_loss_curve,
)

__all__ = [
    "DecoderBlock",
    "FrozenBackbone",
    "LossWeights",
    "MaskedCrossAttention",
    "ModelConfig",
    "ModelOutput",
    "PixelDecoder",
    "QueryBatch",
    "RenamingModel",
    "RunConfig",
    "SelfAttention",
    "TrainConfig",
    "TrainingData",
    "TrainResult",
    "binary_cross_entropy",
    "build_query_batch",
    "compute_batch_loss",
    "compute_segment_loss",
    "dice_loss",
    "downsample_bias",
    "load_checkpoint",
    "parameter_checksum",
    "predict_heads",
    "replace_bias",
    "save_checkpoint",
    "threshold_iou",
    "train",
    "write_loss_curve",
]
