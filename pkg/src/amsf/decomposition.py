"""Fused-context assembly: stacks component token blocks in a fixed order.

Components are ordered with all style text blocks first (reference order),
then the subject block, then all style image blocks. The naive-concatenation
variant drops the dedicated subject block and instead repeats the subject
tokens inside every style's text block — the duplication failure mode the
decomposed layout exists to avoid.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .embedding import StyleReference, SubjectPrompt

SUBJECT_ID = "subject"


def text_component_id(style_name: str) -> str:
    return f"text:{style_name}"


def image_component_id(style_name: str) -> str:
    return f"image:{style_name}"


@dataclass(frozen=True)
class Segment:
    component_id: str
    start: int
    length: int

    @property
    def stop(self) -> int:
        return self.start + self.length


@dataclass(frozen=True)
class FusedContext:
    z: np.ndarray
    segments: tuple[Segment, ...]
    subject_rows: tuple[int, ...]

    @property
    def total_rows(self) -> int:
        return self.z.shape[0]

    @property
    def dim(self) -> int:
        return self.z.shape[1]

    @property
    def component_ids(self) -> tuple[str, ...]:
        return tuple(seg.component_id for seg in self.segments)

    @property
    def has_subject(self) -> bool:
        return SUBJECT_ID in self.component_ids

    @property
    def style_names(self) -> tuple[str, ...]:
        return tuple(seg.component_id.split(":", 1)[1]
                     for seg in self.segments
                     if seg.component_id.startswith("text:"))

    def segment(self, component_id: str) -> Segment:
        for seg in self.segments:
            if seg.component_id == component_id:
                return seg
        raise KeyError(component_id)

    def block(self, segment: Segment) -> np.ndarray:
        return self.z[segment.start:segment.stop]


def _check_inputs(styles, subject: SubjectPrompt) -> int:
    if not styles:
        raise ValueError("style list is empty")
    names = [st.name for st in styles]
    if len(set(names)) != len(names):
        raise ValueError(f"duplicate style names: {names}")
    dim = subject.tokens.dim
    for st in styles:
        if st.text_tokens.dim != dim or st.image_tokens.dim != dim:
            raise ValueError(f"dimension mismatch in style {st.name!r}")
    return dim


def _build(blocks) -> FusedContext:
    segments = []
    subject_rows = []
    offset = 0
    stacked = []
    for component_id, tokens, subject_span in blocks:
        length = tokens.shape[0]
        segments.append(Segment(component_id, offset, length))
        if subject_span is not None:
            subject_rows.extend(range(offset + subject_span[0], offset + subject_span[1]))
        stacked.append(tokens)
        offset += length
    return FusedContext(z=np.vstack(stacked), segments=tuple(segments),
                        subject_rows=tuple(subject_rows))


def assemble(styles, subject: SubjectPrompt) -> FusedContext:
    """Decomposed layout: [text_1 .. text_n, subject, image_1 .. image_n].

    Every input token row appears exactly once; the subject block appears
    once regardless of the number of styles.
    """
    _check_inputs(styles, subject)
    blocks = [(text_component_id(st.name), st.text_tokens.tokens, None) for st in styles]
    blocks.append((SUBJECT_ID, subject.tokens.tokens, (0, subject.tokens.count)))
    blocks.extend((image_component_id(st.name), st.image_tokens.tokens, None)
                  for st in styles)
    return _build(blocks)


def assemble_naive_concat(styles, subject: SubjectPrompt) -> FusedContext:
    """Concatenated-prompt baseline: each style's text block carries its own
    copy of the subject tokens, so the subject rows appear n times and there
    is no standalone subject component.
    """
    _check_inputs(styles, subject)
    subj = subject.tokens.tokens
    blocks = []
    for st in styles:
        combined = np.vstack([st.text_tokens.tokens, subj])
        subject_span = (st.text_tokens.count, st.text_tokens.count + subject.tokens.count)
        blocks.append((text_component_id(st.name), combined, subject_span))
    blocks.extend((image_component_id(st.name), st.image_tokens.tokens, None)
                  for st in styles)
    return _build(blocks)


def subject_row_count(ctx: FusedContext) -> int:
    return len(ctx.subject_rows)


def subject_attention_mass(ctx: FusedContext) -> float:
    """Attention mass on subject rows relative to the mean per-style text
    mass, under uniform per-token attention.

    The uniform per-token normalizer cancels in the ratio, so this measures
    how much attention the subject draws per style phrase: duplicating the
    subject across n style blocks multiplies it by exactly n.
    """
    subject_count = len(ctx.subject_rows)
    subject_set = set(ctx.subject_rows)
    style_text_rows = 0
    n_styles = 0
    for seg in ctx.segments:
        if seg.component_id.startswith("text:"):
            n_styles += 1
            style_text_rows += sum(1 for r in range(seg.start, seg.stop)
                                   if r not in subject_set)
    if style_text_rows == 0:
        raise ValueError("context has no style text rows")
    return subject_count / (style_text_rows / n_styles)
