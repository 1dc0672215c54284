"""Dense float64 kernels shared by every other module.

Thin numpy wrappers that pin down the conventions the rest of the package
relies on: cosine similarity of a zero vector is 0 (no directional
information), softmax is max-stabilized per row, and everything runs in
64-bit floats.
"""

from __future__ import annotations

import numpy as np


def as_matrix(values, name: str = "matrix") -> np.ndarray:
    m = np.asarray(values, dtype=np.float64)
    if m.ndim != 2:
        raise ValueError(f"{name} must be 2-dimensional, got shape {m.shape}")
    return m


def as_vector(values, name: str = "vector") -> np.ndarray:
    v = np.asarray(values, dtype=np.float64)
    if v.ndim != 1:
        raise ValueError(f"{name} must be 1-dimensional, got shape {v.shape}")
    return v


def cosine_sim(a, b) -> float:
    """Cosine similarity clamped to [-1, 1]; returns 0 if either norm is 0."""
    a = as_vector(a, "a")
    b = as_vector(b, "b")
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape[0]} vs {b.shape[0]}")
    norm_a = float(np.linalg.norm(a))
    norm_b = float(np.linalg.norm(b))
    if norm_a == 0.0 or norm_b == 0.0:
        return 0.0
    return float(np.clip(float(a @ b) / (norm_a * norm_b), -1.0, 1.0))


def cosine_sim_rows(m, v) -> np.ndarray:
    """cosine_sim of every row of m against v, same zero-norm convention."""
    m = as_matrix(m)
    v = as_vector(v)
    if m.shape[1] != v.shape[0]:
        raise ValueError(f"dimension mismatch: {m.shape[1]} vs {v.shape[0]}")
    norm_v = float(np.linalg.norm(v))
    out = np.zeros(m.shape[0])
    if norm_v == 0.0:
        return out
    row_norms = np.linalg.norm(m, axis=1)
    nonzero = row_norms > 0.0
    out[nonzero] = (m[nonzero] @ v) / (row_norms[nonzero] * norm_v)
    return np.clip(out, -1.0, 1.0)


def row_mean(m) -> np.ndarray:
    """Mean over rows (the spatial mean when rows index positions)."""
    m = as_matrix(m)
    if m.shape[0] == 0:
        raise ValueError("empty input")
    return m.mean(axis=0)


def softmax_rows(m) -> np.ndarray:
    """Row-wise softmax, stabilized by subtracting each row's max."""
    m = as_matrix(m)
    shifted = m - m.max(axis=1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=1, keepdims=True)


def matmul(a, b) -> np.ndarray:
    a = as_matrix(a, "a")
    b = as_matrix(b, "b")
    if a.shape[1] != b.shape[0]:
        raise ValueError(
            f"shape mismatch: ({a.shape[0]}x{a.shape[1]}) @ ({b.shape[0]}x{b.shape[1]})"
        )
    return a @ b
