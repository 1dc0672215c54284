"""Similarity-aware attention re-weighting.

Each step compares the latent against every style's pooled vector twice:
``sigma`` from the latent's spatial mean (global agreement) and ``tau``
averaged over latent rows (token-level agreement). The spread of those
statistics across styles drives a damping exponent ``gamma_auto``; each
style's score divides its agreement terms by a power of its pooled norm, so
a style whose embedding magnitude dominates gets penalized harder as the
spread grows. Scores are normalized onto the style budget, with a fixed
fraction reserved for the subject component.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .numerics import cosine_sim, cosine_sim_rows, row_mean


@dataclass(frozen=True)
class SarConfig:
    kappa: float = 4.0
    gamma_min: float = 1.0
    gamma_max: float = 5.0
    delta: float = 1e-8
    subject_fraction: float | None = None  # None -> 1 / (n_styles + 1)

    def __post_init__(self):
        if self.kappa < 0:
            raise ValueError("kappa must be >= 0")
        if self.gamma_min > self.gamma_max:
            raise ValueError("gamma_min must be <= gamma_max")
        if self.delta <= 0:
            raise ValueError("delta must be > 0")
        if self.subject_fraction is not None and not 0.0 < self.subject_fraction < 1.0:
            raise ValueError("subject_fraction must be in (0, 1)")

    def resolve_subject_fraction(self, n_styles: int) -> float:
        if self.subject_fraction is not None:
            return self.subject_fraction
        return 1.0 / (n_styles + 1)


@dataclass(frozen=True)
class SarState:
    """Per-step re-weighting record: statistics, damping, scores, weights.

    Invariants: gamma_min <= gamma_auto <= gamma_max, weights >= 0, and
    subject_weight + sum(weights) == 1.
    """

    sigma: tuple[float, ...]
    tau: tuple[float, ...]
    gamma_auto: float
    scores: tuple[float, ...]
    weights: tuple[float, ...]
    subject_weight: float


def similarity_stats(x, s) -> tuple[float, float]:
    """(global, token-level) cosine agreement of latent x with style vector s."""
    sigma = cosine_sim(row_mean(x), s)
    tau = float(cosine_sim_rows(x, s).mean())
    return sigma, tau


def gamma_auto(stats, cfg: SarConfig) -> float:
    """Damping exponent: grows with the largest pairwise disagreement in the
    global and token-level statistics, clamped to [gamma_min, gamma_max].

    A single style has no disagreement to measure, so it gets gamma_min.
    """
    if len(stats) < 2:
        return cfg.gamma_min
    sigmas = [sigma for sigma, _ in stats]
    taus = [tau for _, tau in stats]
    sigma_gap = max(sigmas) - min(sigmas)
    tau_gap = max(taus) - min(taus)
    raw = 1.0 + cfg.kappa * sigma_gap + tau_gap
    return float(min(max(raw, cfg.gamma_min), cfg.gamma_max))


def style_score(sigma: float, tau: float, s_norm: float, gamma: float) -> float:
    """(1+sigma)(1+tau) / (1 + s_norm**gamma).

    Nonnegative because sigma, tau >= -1. Raising gamma shrinks the score
    when s_norm > 1 and inflates it when s_norm < 1, which is what lets the
    damping exponent push back on a large-norm style.
    """
    return (1.0 + sigma) * (1.0 + tau) / (1.0 + s_norm ** gamma)


def normalize_weights(scores, cfg: SarConfig) -> tuple[tuple[float, ...], float]:
    """Turn raw scores into style weights plus the reserved subject weight.

    Raw ratios score_i / (sum + delta) are rescaled onto the style budget
    (1 - subject_fraction) so the full weight vector sums to exactly 1.
    All-zero scores carry no preference, so the budget splits equally.
    """
    scores = list(scores)
    if not scores:
        raise ValueError("scores must be nonempty")
    if any(s < 0 for s in scores):
        raise ValueError("scores must be nonnegative")
    subject_weight = cfg.resolve_subject_fraction(len(scores))
    budget = 1.0 - subject_weight
    total = sum(scores)
    raw = [s / (total + cfg.delta) for s in scores]
    raw_total = sum(raw)
    if raw_total > 0.0:
        weights = tuple(budget * r / raw_total for r in raw)
    else:
        weights = tuple(budget / len(scores) for _ in scores)
    return weights, subject_weight


def sar_step(x, styles, cfg: SarConfig) -> SarState:
    """One full re-weighting pass against the current latent."""
    stats = [similarity_stats(x, st.pooled) for st in styles]
    gamma = gamma_auto(stats, cfg)
    scores = tuple(
        style_score(sigma, tau, float(np.linalg.norm(st.pooled)), gamma)
        for (sigma, tau), st in zip(stats, styles)
    )
    weights, subject_weight = normalize_weights(scores, cfg)
    return SarState(
        sigma=tuple(sigma for sigma, _ in stats),
        tau=tuple(tau for _, tau in stats),
        gamma_auto=gamma,
        scores=scores,
        weights=weights,
        subject_weight=subject_weight,
    )


def with_weights(state: SarState, weights, subject_weight: float) -> SarState:
    """Same statistics with externally chosen weights (fixed or manual modes)."""
    return replace(state, weights=tuple(weights), subject_weight=subject_weight)


def renormalize_without_subject(state: SarState) -> SarState:
    """Fold the subject share back into the styles for contexts that have no
    subject component (the naive-concatenation baseline)."""
    total = sum(state.weights)
    if total <= 0.0:
        weights = tuple(1.0 / len(state.weights) for _ in state.weights)
    else:
        weights = tuple(w / total for w in state.weights)
    return replace(state, weights=weights, subject_weight=0.0)
