"""Balance metrics over per-style alignment scores."""

from __future__ import annotations

from dataclasses import dataclass


def harmonic_mean(values) -> float:
    """n / sum(1/v); 0 if any value is <= 0 (a non-positive alignment means
    total imbalance, where the harmonic mean is undefined).

    Equal inputs return the common value exactly — the reciprocal form can
    drift by an ulp, so the identity HM(a, ..., a) = a is enforced directly.
    """
    values = list(values)
    if not values:
        raise ValueError("empty input")
    if any(v <= 0 for v in values):
        return 0.0
    if all(v == values[0] for v in values):
        return float(values[0])
    return len(values) / sum(1.0 / v for v in values)


@dataclass(frozen=True)
class BalanceReport:
    per_style_alignment: tuple[float, ...]
    harmonic_mean: float
    dominant_style: int | None


def balance_report(alignments, dominance_margin: float) -> BalanceReport:
    """Flag the leading style only when it beats the runner-up by more than
    the margin; ties and near-ties report no dominant style."""
    alignments = tuple(float(a) for a in alignments)
    if not alignments:
        raise ValueError("empty input")
    if dominance_margin < 0:
        raise ValueError("dominance_margin must be >= 0")
    dominant = None
    if len(alignments) > 1:
        order = sorted(range(len(alignments)), key=lambda i: alignments[i], reverse=True)
        if alignments[order[0]] - alignments[order[1]] > dominance_margin:
            dominant = order[0]
    return BalanceReport(
        per_style_alignment=alignments,
        harmonic_mean=harmonic_mean(alignments),
        dominant_style=dominant,
    )
