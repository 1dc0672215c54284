"""Adaptive multi-style fusion sandbox.

Token decomposition of multiple style references, similarity-aware attention
re-weighting inside a toy denoising loop, and an experiment harness exposed
as a FastAPI service with a thin CLI client.
"""

from .attention import AttentionParams, ComponentWeights, cross_attend, init_attention_params
from .decomposition import FusedContext, Segment, assemble, assemble_naive_concat
from .denoiser import DenoiseConfig, TrajectoryLog, final_alignment, run
from .embedding import (
    StyleReference,
    SubjectPrompt,
    TokenSequence,
    load_embeddings,
    pool_reference,
    toy_encode_image,
    toy_encode_text,
    write_embeddings,
)
from .errors import AmsfError, ConfigError, EmbeddingIOError, InputIOError, NumericError
from .harness import ExperimentConfig, StyleSpec, load_config, run_ablation_suite, run_experiment
from .metrics import BalanceReport, balance_report, harmonic_mean
from .sar import SarConfig, SarState, sar_step

__version__ = "0.1.0"
