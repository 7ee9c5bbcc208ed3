"""Transformer decoder blocks with region-masked cross-attention.

Queries attend to pixel features only inside their bias region: disallowed
positions receive -inf logits, so their attention weight is exactly zero
and features outside the region cannot influence the query. A query whose
region is empty at some scale falls back to full-image attention.

Block order follows the masked-attention decoder convention: masked
cross-attention, then self-attention, then the feed-forward network, each
as a pre-norm residual sublayer. The value and output projections of the
cross-attention carry no bias term, so attending to all-zero features
leaves the query untouched.
"""
from __future__ import annotations

import logging
import math

import torch
from torch import nn

log = logging.getLogger(__name__)


def _split_heads(x: torch.Tensor, num_heads: int) -> torch.Tensor:
    n, c = x.shape
    return x.reshape(n, num_heads, c // num_heads).transpose(0, 1)  # [h, n, d]


def _merge_heads(x: torch.Tensor) -> torch.Tensor:
    h, n, d = x.shape
    return x.transpose(0, 1).reshape(n, h * d)


class MaskedCrossAttention(nn.Module):
    def __init__(self, channels: int, num_heads: int):
        super().__init__()
        if channels % num_heads != 0:
            raise ValueError(f"channels {channels} not divisible by heads {num_heads}")
        self.num_heads = num_heads
        self.scale = 1.0 / math.sqrt(channels // num_heads)
        self.q_proj = nn.Linear(channels, channels)
        self.k_proj = nn.Linear(channels, channels, bias=False)
        self.v_proj = nn.Linear(channels, channels, bias=False)
        self.out_proj = nn.Linear(channels, channels, bias=False)
        self._warned_empty = False

    def forward(
        self, queries: torch.Tensor, features: torch.Tensor, bias: torch.Tensor | None
    ) -> torch.Tensor:
        """queries [N, C], features [P, C], bias [N, P] bool (True = attend)."""
        q = _split_heads(self.q_proj(queries), self.num_heads)
        k = _split_heads(self.k_proj(features), self.num_heads)
        v = _split_heads(self.v_proj(features), self.num_heads)
        logits = torch.einsum("hnd,hpd->hnp", q, k) * self.scale
        if bias is not None:
            empty = ~bias.any(dim=1)
            if empty.any():
                log.log(
                    logging.DEBUG if self._warned_empty else logging.WARNING,
                    "%d query region(s) empty at this scale; falling back to "
                    "full-image attention for them",
                    int(empty.sum()),
                )
                self._warned_empty = True
                bias = bias | empty.unsqueeze(1)
            logits = logits.masked_fill(~bias.unsqueeze(0), float("-inf"))
        weights = torch.softmax(logits, dim=-1)
        out = torch.einsum("hnp,hpd->hnd", weights, v)
        return self.out_proj(_merge_heads(out))


class SelfAttention(nn.Module):
    def __init__(self, channels: int, num_heads: int):
        super().__init__()
        self.num_heads = num_heads
        self.scale = 1.0 / math.sqrt(channels // num_heads)
        self.qkv_proj = nn.Linear(channels, 3 * channels)
        self.out_proj = nn.Linear(channels, channels)

    def forward(self, queries: torch.Tensor) -> torch.Tensor:
        q, k, v = self.qkv_proj(queries).chunk(3, dim=-1)
        q = _split_heads(q, self.num_heads)
        k = _split_heads(k, self.num_heads)
        v = _split_heads(v, self.num_heads)
        weights = torch.softmax(torch.einsum("hnd,hmd->hnm", q, k) * self.scale, dim=-1)
        return self.out_proj(_merge_heads(torch.einsum("hnm,hmd->hnd", weights, v)))


class DecoderBlock(nn.Module):
    """Masked cross-attention -> self-attention -> FFN, pre-norm residuals."""

    def __init__(
        self,
        channels: int,
        num_heads: int,
        ffn_factor: int = 4,
        dropout: float = 0.0,
        zero_init_residuals: bool = True,
    ):
        super().__init__()
        self.cross_attn = MaskedCrossAttention(channels, num_heads)
        self.self_attn = SelfAttention(channels, num_heads)
        self.ffn = nn.Sequential(
            nn.Linear(channels, ffn_factor * channels),
            nn.GELU(),
            nn.Dropout(dropout),
            nn.Linear(ffn_factor * channels, channels),
        )
        self.norm_ca = nn.LayerNorm(channels)
        self.norm_sa = nn.LayerNorm(channels)
        self.norm_ffn = nn.LayerNorm(channels)
        if zero_init_residuals:
            # Residual branches start as identity; input queries pass through
            # unchanged until training opens them up.
            nn.init.zeros_(self.cross_attn.out_proj.weight)
            nn.init.zeros_(self.self_attn.out_proj.weight)
            nn.init.zeros_(self.self_attn.out_proj.bias)
            nn.init.zeros_(self.ffn[-1].weight)
            nn.init.zeros_(self.ffn[-1].bias)

    def cross_attend(
        self, queries: torch.Tensor, features: torch.Tensor, bias: torch.Tensor | None
    ) -> torch.Tensor:
        return queries + self.cross_attn(self.norm_ca(queries), features, bias)

    def self_attend(self, queries: torch.Tensor) -> torch.Tensor:
        return queries + self.self_attn(self.norm_sa(queries))

    def feed_forward(self, queries: torch.Tensor) -> torch.Tensor:
        return queries + self.ffn(self.norm_ffn(queries))

    def forward(
        self, queries: torch.Tensor, features: torch.Tensor, bias: torch.Tensor | None
    ) -> torch.Tensor:
        queries = self.cross_attend(queries, features, bias)
        queries = self.self_attend(queries)
        return self.feed_forward(queries)
