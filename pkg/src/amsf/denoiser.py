"""Seeded toy denoising loop that exercises the full re-weighting mechanism.

There is no trained model here: the latent contracts toward the weighted
cross-attention output, x <- (1 - eta) * x + eta * attend(x). That isolates
the conditioning mechanism — weights are remeasured from the latent at every
step, before the update they influence.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .attention import component_weights, cross_attend, init_attention_params
from .decomposition import FusedContext
from .errors import NumericError
from .numerics import cosine_sim, row_mean
from .sar import SarConfig, SarState, renormalize_without_subject, sar_step, with_weights

WEIGHT_MODES = ("fixed_equal", "sar_adaptive", "manual")


@dataclass(frozen=True)
class DenoiseConfig:
    steps: int = 30
    latent_rows: int = 64
    dim: int = 32
    step_size: float = 0.3
    seed: int = 0
    sar: SarConfig = field(default_factory=SarConfig)
    weight_mode: str = "sar_adaptive"
    manual_weights: tuple[float, ...] | None = None

    def __post_init__(self):
        if self.steps < 0:
            raise ValueError("steps must be >= 0")
        if self.latent_rows < 1 or self.dim < 1:
            raise ValueError("latent_rows and dim must be >= 1")
        if not 0.0 < self.step_size <= 1.0:
            raise ValueError("step_size must be in (0, 1]")
        if self.weight_mode not in WEIGHT_MODES:
            raise ValueError(f"unknown weight_mode {self.weight_mode!r}")
        if self.weight_mode == "manual":
            if not self.manual_weights:
                raise ValueError("manual weight_mode needs manual_weights")
            if any(w < 0 for w in self.manual_weights):
                raise ValueError("manual_weights must be nonnegative")
        object.__setattr__(
            self, "manual_weights",
            tuple(self.manual_weights) if self.manual_weights is not None else None,
        )


@dataclass(frozen=True)
class StepRecord:
    step: int
    state: SarState
    latent_pool: np.ndarray


@dataclass(frozen=True)
class TrajectoryLog:
    records: tuple[StepRecord, ...]
    final_latent: np.ndarray


def _child_seeds(seed: int) -> tuple[int, int]:
    # Two decorrelated streams (latent init, projection init) from one seed.
    state = np.random.SeedSequence(seed).generate_state(2)
    return int(state[0]), int(state[1])


def _state_finite(state: SarState) -> bool:
    values = (*state.sigma, *state.tau, state.gamma_auto, *state.scores,
              *state.weights, state.subject_weight)
    return bool(np.isfinite(values).all())


def _step_state(x, styles, cfg: DenoiseConfig) -> SarState:
    state = sar_step(x, styles, cfg.sar)
    n = len(styles)
    if cfg.weight_mode == "fixed_equal":
        budget = 1.0 - state.subject_weight
        return with_weights(state, (budget / n,) * n, state.subject_weight)
    if cfg.weight_mode == "manual":
        if len(cfg.manual_weights) != n:
            raise ValueError(
                f"{len(cfg.manual_weights)} manual weights for {n} styles"
            )
        budget = 1.0 - state.subject_weight
        total = sum(cfg.manual_weights)
        if total > 0.0:
            weights = tuple(budget * w / total for w in cfg.manual_weights)
        else:
            weights = (budget / n,) * n
        return with_weights(state, weights, state.subject_weight)
    return state


def run(ctx: FusedContext, styles, cfg: DenoiseConfig) -> TrajectoryLog:
    """Run the loop and log every step's re-weighting state.

    Deterministic in cfg: the latent starts from seeded standard-normal
    values and the attention projections derive from the same seed.
    """
    if ctx.dim != cfg.dim:
        raise ValueError(f"context dim {ctx.dim} != configured dim {cfg.dim}")
    for st in styles:
        if st.pooled.shape[0] != cfg.dim:
            raise ValueError(f"style {st.name!r} dim mismatch")
    if tuple(st.name for st in styles) != ctx.style_names:
        raise ValueError("styles do not match context segments")

    latent_seed, params_seed = _child_seeds(cfg.seed)
    x = np.random.default_rng(latent_seed).standard_normal((cfg.latent_rows, cfg.dim))
    params = init_attention_params(cfg.dim, params_seed)

    records = []
    for step in range(1, cfg.steps + 1):
        state = _step_state(x, styles, cfg)
        if not _state_finite(state):
            raise NumericError(f"non-finite re-weighting state at step {step}")
        if not ctx.has_subject:
            state = renormalize_without_subject(state)
        weights = component_weights(ctx, state)
        attended = cross_attend(x, ctx, weights, params)
        x = (1.0 - cfg.step_size) * x + cfg.step_size * attended
        if not np.isfinite(x).all():
            raise NumericError(f"non-finite latent at step {step}")
        records.append(StepRecord(step=step, state=state, latent_pool=row_mean(x)))
    return TrajectoryLog(records=tuple(records), final_latent=x)


def final_alignment(log: TrajectoryLog, styles) -> tuple[float, ...]:
    """Cosine of the final latent's mean against each style's pooled vector."""
    pooled_latent = row_mean(log.final_latent)
    return tuple(cosine_sim(pooled_latent, st.pooled) for st in styles)
