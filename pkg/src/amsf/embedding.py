"""Token sequences, style references, toy encoders, and the interchange file.

The binary interchange format connects external encoders to the kernel:

    magic  b"AMSFEMB1"            8 bytes ASCII
    count  u32 little-endian      number of records
    per record:
        name_len  u16 LE          UTF-8 byte length of the name
        name      UTF-8 bytes
        kind      u8               0 = text, 1 = image
        rows      u32 LE
        cols      u32 LE
        values    rows*cols f64 LE row-major

Values are 64-bit IEEE-754; widening 32-bit encoder outputs is exact.
"""

from __future__ import annotations

import hashlib
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import EmbeddingIOError
from .numerics import as_matrix, as_vector

MAGIC = b"AMSFEMB1"
KIND_CODES = {"text": 0, "image": 1}
KIND_NAMES = {0: "text", 1: "image"}


@dataclass(frozen=True)
class TokenSequence:
    """One semantic component: a stack of embedding rows plus its modality."""

    tokens: np.ndarray
    source_kind: str

    def __post_init__(self):
        tokens = as_matrix(self.tokens, "tokens")
        if tokens.shape[0] < 1:
            raise ValueError("token sequence needs at least one row")
        if not np.isfinite(tokens).all():
            raise ValueError("token sequence contains non-finite values")
        if self.source_kind not in KIND_CODES:
            raise ValueError(f"unknown source_kind {self.source_kind!r}")
        object.__setattr__(self, "tokens", tokens)

    @property
    def count(self) -> int:
        return self.tokens.shape[0]

    @property
    def dim(self) -> int:
        return self.tokens.shape[1]


@dataclass(frozen=True)
class StyleReference:
    """Paired text/image token sequences for one reference style.

    ``pooled`` is the unweighted mean over all text and image token rows.
    It is deliberately not re-normalized: its norm carries the inter-token
    agreement signal the re-weighting score divides by.
    """

    name: str
    text_tokens: TokenSequence
    image_tokens: TokenSequence
    pooled: np.ndarray

    def __post_init__(self):
        if not self.name:
            raise ValueError("style name must be nonempty")
        pooled = as_vector(self.pooled, "pooled")
        if pooled.shape[0] != self.text_tokens.dim:
            raise ValueError("pooled dimension mismatch")
        object.__setattr__(self, "pooled", pooled)

    @classmethod
    def from_tokens(cls, name: str, text_tokens: TokenSequence,
                    image_tokens: TokenSequence) -> "StyleReference":
        pooled = pool_reference(text_tokens, image_tokens)
        return cls(name=name, text_tokens=text_tokens,
                   image_tokens=image_tokens, pooled=pooled)

    def scaled(self, factor: float) -> "StyleReference":
        """Same style with every token row (hence the pooled vector) scaled."""
        return StyleReference.from_tokens(
            self.name,
            TokenSequence(self.text_tokens.tokens * factor, "text"),
            TokenSequence(self.image_tokens.tokens * factor, "image"),
        )


@dataclass(frozen=True)
class SubjectPrompt:
    text: str
    tokens: TokenSequence


def _token_row(key: str, dim: int) -> np.ndarray:
    # blake2b gives a stable cross-platform hash; Python's hash() is salted.
    digest = hashlib.blake2b(key.encode("utf-8"), digest_size=8).digest()
    rng = np.random.default_rng(int.from_bytes(digest, "little"))
    row = rng.standard_normal(dim)
    return row / np.linalg.norm(row)


def _toy_encode(kind: str, source: str, dim: int, count: int, seed: int) -> TokenSequence:
    if not source:
        raise ValueError("empty prompt")
    if dim < 2:
        raise ValueError("dim must be >= 2")
    if count < 1:
        raise ValueError("token count must be >= 1")
    rows = [_token_row(f"{kind}\x1f{source}\x1f{i}\x1f{seed}", dim) for i in range(count)]
    return TokenSequence(np.stack(rows), kind)


def toy_encode_text(prompt: str, dim: int, tokens_per_prompt: int, seed: int) -> TokenSequence:
    """Deterministic stand-in text encoder: unit-norm rows keyed by
    (prompt, token index, seed)."""
    return _toy_encode("text", prompt, dim, tokens_per_prompt, seed)


def toy_encode_image(image_id: str, dim: int, tokens_per_image: int, seed: int) -> TokenSequence:
    """Deterministic stand-in image encoder; same contract as the text one."""
    return _toy_encode("image", image_id, dim, tokens_per_image, seed)


def pool_reference(text_tokens: TokenSequence, image_tokens: TokenSequence) -> np.ndarray:
    """Unweighted mean over all rows of both sequences."""
    if text_tokens.dim != image_tokens.dim:
        raise ValueError(
            f"dimension mismatch: text {text_tokens.dim} vs image {image_tokens.dim}"
        )
    stacked = np.vstack([text_tokens.tokens, image_tokens.tokens])
    return stacked.mean(axis=0)


def write_embeddings(path, records) -> None:
    """Write (name, TokenSequence) pairs in the interchange format."""
    records = list(records)
    chunks = [MAGIC, struct.pack("<I", len(records))]
    for name, seq in records:
        encoded = name.encode("utf-8")
        if len(encoded) > 0xFFFF:
            raise ValueError(f"record name too long: {name!r}")
        chunks.append(struct.pack("<H", len(encoded)))
        chunks.append(encoded)
        chunks.append(struct.pack("<BII", KIND_CODES[seq.source_kind],
                                  seq.count, seq.dim))
        chunks.append(seq.tokens.astype("<f8").tobytes())
    Path(path).write_bytes(b"".join(chunks))


class _Reader:
    def __init__(self, data: bytes):
        self.data = data
        self.pos = 0

    def take(self, n: int) -> bytes:
        if self.pos + n > len(self.data):
            raise EmbeddingIOError("corrupt record: truncated file")
        chunk = self.data[self.pos:self.pos + n]
        self.pos += n
        return chunk


def load_embeddings(path):
    """Read an interchange file back into (name, TokenSequence) pairs.

    Raises EmbeddingIOError: "not an embedding file" on a bad magic string,
    "corrupt record" when declared shapes disagree with the payload, and
    "invalid value" on non-finite entries.
    """
    try:
        data = Path(path).read_bytes()
    except OSError as exc:
        raise EmbeddingIOError(f"cannot read {path}: {exc}") from exc
    if len(data) < len(MAGIC) or data[:len(MAGIC)] != MAGIC:
        raise EmbeddingIOError("not an embedding file")
    reader = _Reader(data)
    reader.take(len(MAGIC))
    (count,) = struct.unpack("<I", reader.take(4))
    records = []
    for index in range(count):
        (name_len,) = struct.unpack("<H", reader.take(2))
        try:
            name = reader.take(name_len).decode("utf-8")
        except UnicodeDecodeError as exc:
            raise EmbeddingIOError(f"corrupt record: bad name in record {index}") from exc
        kind_code, rows, cols = struct.unpack("<BII", reader.take(9))
        if kind_code not in KIND_NAMES:
            raise EmbeddingIOError(f"corrupt record: unknown kind in record {name!r}")
        if rows < 1 or cols < 1:
            raise EmbeddingIOError(f"corrupt record: empty shape in record {name!r}")
        payload = reader.take(rows * cols * 8)
        values = np.frombuffer(payload, dtype="<f8").astype(np.float64).reshape(rows, cols)
        if not np.isfinite(values).all():
            raise EmbeddingIOError(f"invalid value in record {name!r}")
        records.append((name, TokenSequence(values, KIND_NAMES[kind_code])))
    if reader.pos != len(data):
        raise EmbeddingIOError("corrupt record: trailing bytes after declared records")
    return records
