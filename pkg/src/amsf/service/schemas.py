"""Request/response models for the fusion service."""

from __future__ import annotations

from typing import Literal, Optional

from pydantic import BaseModel


class RunRequest(BaseModel):
    config_path: str
    out_dir: Optional[str] = None
    seed: Optional[int] = None


class RunSummary(BaseModel):
    subject: str
    styles: list[str]
    per_style_alignment: list[float]
    harmonic_mean: float
    dominant_style: Optional[int]
    mean_weights: Optional[list[float]]
    mean_subject_weight: Optional[float]
    mean_gamma_auto: Optional[float]
    steps: int
    repeats: int
    n_styles: int
    weight_mode: str
    seed: int
    output_dir: str
    trajectory_csv: str


class AblateRequest(BaseModel):
    config_path: str
    out_dir: Optional[str] = None
    seed: Optional[int] = None


class ArmSummary(BaseModel):
    assembly: str
    weight_mode: str
    styles: list[str]
    per_style_alignment: list[float]
    harmonic_mean: float
    dominant_style: Optional[int]
    mean_weights: Optional[list[float]]
    mean_subject_weight: Optional[float]
    mean_gamma_auto: Optional[float]
    steps: int
    repeats: int
    n_styles: int
    subject_rows: int
    subject_attention_mass: float
    trajectory_csv: str


class AblateResponse(BaseModel):
    subject: str
    styles: list[str]
    repeats: int
    seed: int
    output_dir: str
    arms: dict[str, ArmSummary]


class EncodeRequest(BaseModel):
    prompt: str
    out_path: str
    name: Optional[str] = None
    dim: int = 32
    tokens: int = 4
    seed: int = 0


class EncodeResponse(BaseModel):
    path: str
    name: str
    kind: str
    rows: int
    cols: int


class InspectRequest(BaseModel):
    path: str


class RecordInfo(BaseModel):
    name: str
    kind: Literal["text", "image"]
    rows: int
    cols: int


class InspectResponse(BaseModel):
    path: str
    records: list[RecordInfo]


class ErrorBody(BaseModel):
    error_kind: Literal["config", "io", "numeric"]
    message: str
