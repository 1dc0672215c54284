"""Per-component cross-attention streams combined by a weighted sum.

Each context component gets its own attention pass against shared Q/K/V
projections; the outputs are mixed with per-component weights. Uniform
weights reduce the mix to a plain average of the streams.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .decomposition import (
    SUBJECT_ID,
    FusedContext,
    image_component_id,
    text_component_id,
)
from .numerics import as_matrix, softmax_rows
from .sar import SarState

WEIGHT_SUM_TOL = 1e-9


@dataclass(frozen=True)
class AttentionParams:
    """Shared projection weights, deterministically initialized from a seed."""

    w_q: np.ndarray
    w_k: np.ndarray
    w_v: np.ndarray
    seed: int

    @property
    def dim(self) -> int:
        return self.w_q.shape[0]


def init_attention_params(dim: int, seed: int) -> AttentionParams:
    """Square projections with entries uniform in [-1/sqrt(dim), 1/sqrt(dim)]."""
    rng = np.random.default_rng(seed)
    bound = 1.0 / math.sqrt(dim)
    w_q, w_k, w_v = (rng.uniform(-bound, bound, size=(dim, dim)) for _ in range(3))
    return AttentionParams(w_q=w_q, w_k=w_k, w_v=w_v, seed=seed)


@dataclass(frozen=True)
class ComponentWeights:
    by_component: dict[str, float]

    def __post_init__(self):
        if any(w < 0 for w in self.by_component.values()):
            raise ValueError("component weights must be nonnegative")
        total = sum(self.by_component.values())
        if abs(total - 1.0) > WEIGHT_SUM_TOL:
            raise ValueError(f"component weights must sum to 1, got {total}")


def component_weights(ctx: FusedContext, state: SarState) -> ComponentWeights:
    """Spread style weights over the context's components.

    Each style's weight splits evenly between its text and image segments so
    the reference's total influence stays at w_i. The subject segment, when
    present, takes subject_weight unchanged.
    """
    names = ctx.style_names
    if len(names) != len(state.weights):
        raise ValueError(
            f"{len(state.weights)} style weights for {len(names)} styles in context"
        )
    if not ctx.has_subject and state.subject_weight != 0.0:
        raise ValueError("context has no subject segment but subject_weight != 0")
    by_component = {}
    for name, weight in zip(names, state.weights):
        by_component[text_component_id(name)] = weight / 2.0
        by_component[image_component_id(name)] = weight / 2.0
    if ctx.has_subject:
        by_component[SUBJECT_ID] = state.subject_weight
    return ComponentWeights(by_component)


def attention_map(x, block: np.ndarray, params: AttentionParams) -> np.ndarray:
    """Row-stochastic attention of latent queries against one component block."""
    x = as_matrix(x, "x")
    if x.shape[1] != params.dim or block.shape[1] != params.dim:
        raise ValueError("dimension mismatch between latent, block, and projections")
    q = x @ params.w_q
    k = block @ params.w_k
    return softmax_rows((q @ k.T) / math.sqrt(params.dim))


def per_component_outputs(x, ctx: FusedContext, params: AttentionParams) -> dict[str, np.ndarray]:
    outputs = {}
    for seg in ctx.segments:
        block = ctx.block(seg)
        attn = attention_map(x, block, params)
        outputs[seg.component_id] = attn @ (block @ params.w_v)
    return outputs


def cross_attend(x, ctx: FusedContext, weights: ComponentWeights,
                 params: AttentionParams) -> np.ndarray:
    """Weighted sum of per-component attention outputs, shape (rows(x), dim)."""
    x = as_matrix(x, "x")
    present = set(ctx.component_ids)
    given = set(weights.by_component)
    if present != given:
        missing = present - given
        extra = given - present
        raise ValueError(f"component weight mismatch: missing={sorted(missing)} "
                         f"extra={sorted(extra)}")
    out = np.zeros_like(x)
    for component_id, stream in per_component_outputs(x, ctx, params).items():
        out += weights.by_component[component_id] * stream
    return out
