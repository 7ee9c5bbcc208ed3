"""The renaming network.

A frozen vision backbone maps RGB to per-pixel features; a trainable pixel
decoder refines them into the prediction feature map and a feature pyramid
for cross-attention. Candidate-name text embeddings enter the transformer
decoder directly as queries and are updated block by block under
ground-truth-mask attention biases. Each query then yields a mask via its
correlation with the pixel features and a class distribution via a linear
head:

    mask  = sigmoid(X . F_pix)          (per pixel)
    class = softmax(Linear(X))          (K + 1 classes incl. void)
"""
from __future__ import annotations

import hashlib
from dataclasses import dataclass

import numpy as np
import torch
from torch import nn
from torch.nn import functional as F

from ..errors import DataError
from .blocks import DecoderBlock
from .config import ModelConfig


def parameter_checksum(module: nn.Module) -> str:
    """Order-stable digest of all parameters and buffers."""
    h = hashlib.sha256()
    state = module.state_dict()
    for key in sorted(state):
        h.update(key.encode("utf-8"))
        h.update(np.ascontiguousarray(state[key].detach().cpu().numpy()).tobytes())
    return h.hexdigest()


class FrozenBackbone(nn.Module):
    """Fixed random convolutional feature extractor (stand-in vision tower).

    Weights are seeded and never trained; a real frozen tower can be dropped
    into the same slot as long as it maps [3, H, W] -> [C, H, W].
    """

    INPUT_CENTER = 0.5  # inputs are RGB in [0, 1]

    def __init__(self, channels: int, seed: int = 0):
        super().__init__()
        gen = torch.Generator().manual_seed(seed)
        self.conv1 = nn.Conv2d(3, channels, kernel_size=3, padding=1)
        self.conv2 = nn.Conv2d(channels, channels, kernel_size=3, padding=1)
        nn.init.normal_(self.conv1.weight, std=0.5, generator=gen)
        nn.init.normal_(self.conv2.weight, std=0.1, generator=gen)
        nn.init.zeros_(self.conv1.bias)
        nn.init.zeros_(self.conv2.bias)
        for p in self.parameters():
            p.requires_grad_(False)

    def forward(self, image: torch.Tensor) -> torch.Tensor:
        x = F.gelu(self.conv1(image.unsqueeze(0) - self.INPUT_CENTER))
        return self.conv2(x).squeeze(0)  # [C, H, W]

    def checksum(self) -> str:
        return parameter_checksum(self)


class PixelDecoder(nn.Module):
    """Refines backbone features into F_pix plus a cross-attention pyramid.

    The refinement branch starts at zero, so F_pix initially equals the
    backbone features and drifts from them only through training.
    """

    def __init__(self, config: ModelConfig):
        super().__init__()
        c = config.channels
        self.scales = config.scales
        self.refine = nn.Sequential(
            nn.Conv2d(c, c, kernel_size=3, padding=1),
            nn.GELU(),
            nn.Conv2d(c, c, kernel_size=3, padding=1),
        )
        nn.init.zeros_(self.refine[-1].weight)
        nn.init.zeros_(self.refine[-1].bias)
        self.scale_convs = nn.ModuleList(
            [nn.Conv2d(c, c, kernel_size=1) for _ in self.scales]
        )
        for conv in self.scale_convs:
            nn.init.zeros_(conv.weight)
            nn.init.zeros_(conv.bias)

    def forward(self, backbone_features: torch.Tensor):
        x = backbone_features.unsqueeze(0)
        f_pix = (x + self.refine(x)).squeeze(0)  # [C, H, W]
        pyramid = []
        for stride, conv in zip(self.scales, self.scale_convs):
            pooled = F.avg_pool2d(x, kernel_size=stride) if stride > 1 else x
            pyramid.append((pooled + conv(pooled)).squeeze(0))
        return f_pix, pyramid


def predict_heads(
    queries: torch.Tensor, f_pix: torch.Tensor, class_head: nn.Linear
) -> tuple[torch.Tensor, torch.Tensor]:
    """Mask probabilities [N, H, W] and class rows [N, K+1] summing to 1."""
    if not torch.isfinite(queries).all() or not torch.isfinite(f_pix).all():
        raise DataError("non-finite inputs to prediction heads")
    mask_logits = torch.einsum("nc,chw->nhw", queries, f_pix)
    return torch.sigmoid(mask_logits), torch.softmax(class_head(queries), dim=-1)


def downsample_bias(bias: torch.Tensor, stride: int) -> torch.Tensor:
    """Nearest-neighbor downsample of per-query bool masks [N, H, W]."""
    if stride == 1:
        return bias
    return bias[:, ::stride, ::stride]


def replace_bias(
    gt_mask: np.ndarray,
    predicted_mask_prev: np.ndarray | None,
    p_replace: float,
    rng: np.random.Generator,
) -> np.ndarray:
    """Pick the attention bias for one query: the ground-truth mask, or with
    probability ``p_replace`` the preceding block's thresholded prediction."""
    if not 0.0 <= p_replace <= 1.0:
        raise DataError(f"p_replace must lie in [0, 1], got {p_replace}")
    if predicted_mask_prev is not None and rng.random() < p_replace:
        return predicted_mask_prev > 0.5
    return gt_mask.astype(bool)


@dataclass
class ModelOutput:
    mask_probs: torch.Tensor   # [N, H, W]
    class_probs: torch.Tensor  # [N, K+1]
    queries: torch.Tensor      # [N, C], final block


class RenamingModel(nn.Module):
    def __init__(self, config: ModelConfig, backbone: nn.Module | None = None):
        super().__init__()
        self.config = config
        self.backbone = backbone if backbone is not None else FrozenBackbone(config.channels)
        self.pixel_decoder = PixelDecoder(config)
        self.blocks = nn.ModuleList(
            DecoderBlock(
                config.channels, config.num_heads, config.ffn_factor, config.dropout
            )
            for _ in range(config.num_blocks)
        )
        self.class_head = nn.Linear(config.channels, config.num_classes + 1)

    def trainable_parameters(self):
        """Decoder + pixel-decoder parameters; the backbone stays frozen."""
        yield from self.pixel_decoder.parameters()
        for block in self.blocks:
            yield from block.parameters()
        yield from self.class_head.parameters()

    def forward(
        self,
        image: torch.Tensor,
        query_embeddings: torch.Tensor,
        gt_biases: torch.Tensor,
        p_replace: float = 0.0,
        rng: np.random.Generator | None = None,
    ) -> ModelOutput:
        """One image, N queries.

        ``gt_biases`` is the [N, H, W] bool stack of ground-truth region
        masks, one per query. With ``p_replace`` > 0 and an rng, each block
        after the first may swap a query's bias for the preceding block's
        thresholded mask prediction.
        """
        f_map = self.backbone(image)
        f_pix, pyramid = self.pixel_decoder(f_map)
        queries = query_embeddings
        prev_masks: np.ndarray | None = None
        for index, block in enumerate(self.blocks):
            scale = self.config.scales[index % len(self.config.scales)]
            if prev_masks is None or rng is None or p_replace == 0.0:
                bias = gt_biases
            else:
                rows = [
                    replace_bias(
                        gt_biases[q].cpu().numpy(), prev_masks[q], p_replace, rng
                    )
                    for q in range(gt_biases.shape[0])
                ]
                bias = torch.from_numpy(np.stack(rows))
            bias_s = downsample_bias(bias, scale).flatten(1)
            features = pyramid[index % len(pyramid)].flatten(1).transpose(0, 1)
            queries = block(queries, features, bias_s)
            if p_replace > 0.0 and rng is not None:
                with torch.no_grad():
                    probs, _ = predict_heads(queries, f_pix, self.class_head)
                prev_masks = probs.cpu().numpy()
        mask_probs, class_probs = predict_heads(queries, f_pix, self.class_head)
        return ModelOutput(mask_probs=mask_probs, class_probs=class_probs, queries=queries)
