"""Shared builders and the straight-line re-weighting oracle used by tests."""

from __future__ import annotations

import math

import numpy as np

from amsf.embedding import (
    StyleReference,
    SubjectPrompt,
    TokenSequence,
    toy_encode_image,
    toy_encode_text,
)


def make_style(name, dim=16, text_tokens=3, image_tokens=4, seed=0,
               scale=1.0, prompt=None, image_id=None) -> StyleReference:
    text = toy_encode_text(prompt or f"{name} style", dim, text_tokens, seed)
    image = toy_encode_image(image_id or name, dim, image_tokens, seed)
    style = StyleReference.from_tokens(name, text, image)
    return style.scaled(scale) if scale != 1.0 else style


def make_subject(text="a dog", dim=16, tokens=2, seed=0) -> SubjectPrompt:
    return SubjectPrompt(text, toy_encode_text(text, dim, tokens, seed))


def constant_style(name, row, text_tokens=1, image_tokens=1) -> StyleReference:
    """Style whose every token equals `row`, so pooled == row exactly."""
    row = np.asarray(row, dtype=float)
    text = TokenSequence(np.tile(row, (text_tokens, 1)), "text")
    image = TokenSequence(np.tile(row, (image_tokens, 1)), "image")
    return StyleReference.from_tokens(name, text, image)


# --- straight-line oracle: plain-python transcription of the re-weighting
# pipeline, deliberately independent of the package implementation ---------

def _dot(u, v):
    return sum(a * b for a, b in zip(u, v))


def _norm(u):
    return math.sqrt(_dot(u, u))


def _cos(u, v):
    nu, nv = _norm(u), _norm(v)
    if nu == 0.0 or nv == 0.0:
        return 0.0
    c = _dot(u, v) / (nu * nv)
    return max(-1.0, min(1.0, c))


def oracle_sar(x_rows, pooled, kappa=4.0, gamma_min=1.0, gamma_max=5.0,
               delta=1e-8, subject_fraction=None):
    x_rows = [list(map(float, row)) for row in x_rows]
    pooled = [list(map(float, s)) for s in pooled]
    hw = len(x_rows)
    cols = len(x_rows[0])
    xbar = [sum(row[j] for row in x_rows) / hw for j in range(cols)]
    sigmas, taus = [], []
    for s in pooled:
        sigmas.append(_cos(xbar, s))
        taus.append(sum(_cos(row, s) for row in x_rows) / hw)
    n = len(pooled)
    if n < 2:
        gamma = gamma_min
    else:
        sigma_gap = max(abs(sigmas[i] - sigmas[j])
                        for i in range(n) for j in range(i + 1, n))
        tau_gap = max(abs(taus[i] - taus[j])
                      for i in range(n) for j in range(i + 1, n))
        gamma = min(max(1.0 + kappa * sigma_gap + tau_gap, gamma_min), gamma_max)
    scores = [(1.0 + sg) * (1.0 + tu) / (1.0 + _norm(s) ** gamma)
              for sg, tu, s in zip(sigmas, taus, pooled)]
    sf = subject_fraction if subject_fraction is not None else 1.0 / (n + 1)
    budget = 1.0 - sf
    total = sum(scores)
    raw = [s / (total + delta) for s in scores]
    raw_total = sum(raw)
    if raw_total > 0.0:
        weights = [budget * r / raw_total for r in raw]
    else:
        weights = [budget / n] * n
    return {"sigma": sigmas, "tau": taus, "gamma": gamma, "scores": scores,
            "weights": weights, "subject_weight": sf}


def random_sar_instance(rng, n_styles, hw=6, dim=8):
    """Random latent plus styles with varied pooled norms (0.2 .. 3)."""
    x = rng.standard_normal((hw, dim))
    styles = []
    for i in range(n_styles):
        row = rng.standard_normal(dim) * rng.uniform(0.2, 3.0)
        styles.append(constant_style(f"s{i}", row))
    return x, styles
