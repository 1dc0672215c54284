"""Experiment orchestration: config files, runs, ablations, CSV/JSON outputs.

Config files are INI documents (UTF-8, parsed with configparser):

    [experiment]
    subject = a dog            ; required
    subject_tokens = 2
    output_dir = runs/demo     ; optional, CLI --out overrides
    repeats = 1
    seed = 7
    dominance_margin = 0.05

    [denoise]
    steps = 30
    latent_rows = 64
    dim = 32
    step_size = 0.3
    weight_mode = sar_adaptive ; fixed_equal | sar_adaptive | manual
    manual_weights = 0.8, 0.2  ; manual mode only

    [sar]
    kappa = 4
    gamma_min = 1
    gamma_max = 5
    delta = 1e-8
    subject_fraction =         ; empty -> 1 / (n_styles + 1)

    [style:mosaic]             ; one section per style, >= 1 required
    source = toy               ; toy | file
    prompt = mosaic art style  ; toy text source (default "<name> style")
    image_id = mosaic          ; toy image source (default style name)
    text_tokens = 4
    image_tokens = 4
    scale = 1.0
    ; file source instead: file = <interchange path>, record = <record name>;
    ; the record supplies its own modality, the other one is toy-encoded.

Trajectory CSV columns, in order: step, gamma_auto, then per style i
sigma_i, tau_i, score_i, w_i, then subject_w, latent_pool_norm. One header
row, UTF-8, LF line endings. Repeats are stacked in one file (the step
column restarts per repeat).
"""

from __future__ import annotations

import configparser
import csv
import json
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .decomposition import (
    FusedContext,
    assemble,
    assemble_naive_concat,
    subject_attention_mass,
    subject_row_count,
)
from .denoiser import DenoiseConfig, TrajectoryLog, final_alignment, run
from .embedding import (
    StyleReference,
    SubjectPrompt,
    load_embeddings,
    toy_encode_image,
    toy_encode_text,
    write_embeddings,
)
from .errors import ConfigError, InputIOError
from .metrics import balance_report
from .sar import SarConfig

DEFAULT_DOMINANCE_MARGIN = 0.05

ABLATION_ARMS = (
    "decomposed_fixed_equal",
    "decomposed_sar_adaptive",
    "naive_fixed_equal",
    "naive_sar_adaptive",
)


@dataclass(frozen=True)
class StyleSpec:
    name: str
    source: str = "toy"
    prompt: str | None = None
    image_id: str | None = None
    text_tokens: int = 4
    image_tokens: int = 4
    scale: float = 1.0
    file: str | None = None
    record: str | None = None

    def __post_init__(self):
        if self.source not in ("toy", "file"):
            raise ConfigError(f"style:{self.name}.source: expected 'toy' or 'file', "
                              f"got {self.source!r}")
        if self.source == "file" and (not self.file or not self.record):
            raise ConfigError(f"style:{self.name}: file source needs both "
                              f"'file' and 'record'")
        if self.text_tokens < 1 or self.image_tokens < 1:
            raise ConfigError(f"style:{self.name}: token counts must be >= 1")


@dataclass(frozen=True)
class ExperimentConfig:
    styles: tuple[StyleSpec, ...]
    subject: str
    subject_tokens: int = 2
    denoise: DenoiseConfig = field(default_factory=DenoiseConfig)
    output_dir: str | None = None
    repeats: int = 1
    dominance_margin: float = DEFAULT_DOMINANCE_MARGIN

    def __post_init__(self):
        if not self.styles:
            raise ConfigError("experiment needs at least one [style:*] section")
        if not self.subject:
            raise ConfigError("experiment.subject: must be nonempty")
        if self.subject_tokens < 1:
            raise ConfigError("experiment.subject_tokens: must be >= 1")
        if self.repeats < 1:
            raise ConfigError("experiment.repeats: must be >= 1")
        if self.dominance_margin < 0:
            raise ConfigError("experiment.dominance_margin: must be >= 0")
        object.__setattr__(self, "styles", tuple(self.styles))


# --- config file parsing -------------------------------------------------

def _parse(section, key: str, cast, default, label: str):
    raw = section.get(key)
    if raw is None or raw.strip() == "":
        return default
    try:
        return cast(raw.strip())
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"{label}.{key}: {exc}") from exc


def _cast_bool_free_int(raw: str) -> int:
    return int(raw)


def _cast_weights(raw: str) -> tuple[float, ...]:
    return tuple(float(part) for part in raw.replace(",", " ").split())


def load_config(path) -> ExperimentConfig:
    """Parse an experiment config file; raises ConfigError with the offending
    section.key on bad values and InputIOError on unreadable paths."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise InputIOError(f"cannot read config {path}: {exc}") from exc
    parser = configparser.ConfigParser()
    try:
        parser.read_string(text, source=str(path))
    except configparser.Error as exc:
        raise ConfigError(f"malformed config {path}: {exc}") from exc

    if "experiment" not in parser:
        raise ConfigError("missing [experiment] section")
    exp = parser["experiment"]
    subject = exp.get("subject", "").strip()
    den = parser["denoise"] if "denoise" in parser else {}
    sar = parser["sar"] if "sar" in parser else {}

    try:
        sar_cfg = SarConfig(
            kappa=_parse(sar, "kappa", float, 4.0, "sar"),
            gamma_min=_parse(sar, "gamma_min", float, 1.0, "sar"),
            gamma_max=_parse(sar, "gamma_max", float, 5.0, "sar"),
            delta=_parse(sar, "delta", float, 1e-8, "sar"),
            subject_fraction=_parse(sar, "subject_fraction", float, None, "sar"),
        )
        denoise = DenoiseConfig(
            steps=_parse(den, "steps", _cast_bool_free_int, 30, "denoise"),
            latent_rows=_parse(den, "latent_rows", _cast_bool_free_int, 64, "denoise"),
            dim=_parse(den, "dim", _cast_bool_free_int, 32, "denoise"),
            step_size=_parse(den, "step_size", float, 0.3, "denoise"),
            seed=_parse(exp, "seed", _cast_bool_free_int, 0, "experiment"),
            sar=sar_cfg,
            weight_mode=_parse(den, "weight_mode", str, "sar_adaptive", "denoise"),
            manual_weights=_parse(den, "manual_weights", _cast_weights, None, "denoise"),
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc

    styles = []
    for section_name in parser.sections():
        if not section_name.startswith("style:"):
            continue
        name = section_name.split(":", 1)[1]
        sec = parser[section_name]
        label = section_name
        styles.append(StyleSpec(
            name=name,
            source=_parse(sec, "source", str, "toy", label),
            prompt=_parse(sec, "prompt", str, None, label),
            image_id=_parse(sec, "image_id", str, None, label),
            text_tokens=_parse(sec, "text_tokens", _cast_bool_free_int, 4, label),
            image_tokens=_parse(sec, "image_tokens", _cast_bool_free_int, 4, label),
            scale=_parse(sec, "scale", float, 1.0, label),
            file=_parse(sec, "file", str, None, label),
            record=_parse(sec, "record", str, None, label),
        ))

    return ExperimentConfig(
        styles=tuple(styles),
        subject=subject,
        subject_tokens=_parse(exp, "subject_tokens", _cast_bool_free_int, 2, "experiment"),
        denoise=denoise,
        output_dir=_parse(exp, "output_dir", str, None, "experiment"),
        repeats=_parse(exp, "repeats", _cast_bool_free_int, 1, "experiment"),
        dominance_margin=_parse(exp, "dominance_margin", float,
                                DEFAULT_DOMINANCE_MARGIN, "experiment"),
    )


def write_config(cfg: ExperimentConfig, path) -> None:
    """Serialize a config back to the INI format load_config accepts."""
    parser = configparser.ConfigParser()
    parser["experiment"] = {
        "subject": cfg.subject,
        "subject_tokens": str(cfg.subject_tokens),
        "repeats": str(cfg.repeats),
        "seed": str(cfg.denoise.seed),
        "dominance_margin": repr(cfg.dominance_margin),
    }
    if cfg.output_dir is not None:
        parser["experiment"]["output_dir"] = cfg.output_dir
    parser["denoise"] = {
        "steps": str(cfg.denoise.steps),
        "latent_rows": str(cfg.denoise.latent_rows),
        "dim": str(cfg.denoise.dim),
        "step_size": repr(cfg.denoise.step_size),
        "weight_mode": cfg.denoise.weight_mode,
    }
    if cfg.denoise.manual_weights is not None:
        parser["denoise"]["manual_weights"] = ", ".join(
            repr(w) for w in cfg.denoise.manual_weights)
    parser["sar"] = {
        "kappa": repr(cfg.denoise.sar.kappa),
        "gamma_min": repr(cfg.denoise.sar.gamma_min),
        "gamma_max": repr(cfg.denoise.sar.gamma_max),
        "delta": repr(cfg.denoise.sar.delta),
    }
    if cfg.denoise.sar.subject_fraction is not None:
        parser["sar"]["subject_fraction"] = repr(cfg.denoise.sar.subject_fraction)
    for spec in cfg.styles:
        section = {
            "source": spec.source,
            "text_tokens": str(spec.text_tokens),
            "image_tokens": str(spec.image_tokens),
            "scale": repr(spec.scale),
        }
        if spec.prompt is not None:
            section["prompt"] = spec.prompt
        if spec.image_id is not None:
            section["image_id"] = spec.image_id
        if spec.file is not None:
            section["file"] = spec.file
        if spec.record is not None:
            section["record"] = spec.record
        parser[f"style:{spec.name}"] = section
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            parser.write(fh)
    except OSError as exc:
        raise InputIOError(f"cannot write config {path}: {exc}") from exc


# --- style/subject construction ------------------------------------------

def build_style(spec: StyleSpec, dim: int, seed: int) -> StyleReference:
    if spec.source == "toy":
        text = toy_encode_text(spec.prompt or f"{spec.name} style", dim,
                               spec.text_tokens, seed)
        image = toy_encode_image(spec.image_id or spec.name, dim,
                                 spec.image_tokens, seed)
    else:
        records = load_embeddings(spec.file)
        matches = [seq for name, seq in records if name == spec.record]
        if not matches:
            raise ConfigError(f"style:{spec.name}.record: {spec.record!r} "
                              f"not found in {spec.file}")
        seq = matches[0]
        if seq.dim != dim:
            raise ConfigError(f"style:{spec.name}: record dim {seq.dim} != "
                              f"run dim {dim}")
        if seq.source_kind == "text":
            text = seq
            image = toy_encode_image(spec.image_id or spec.name, dim,
                                     spec.image_tokens, seed)
        else:
            image = seq
            text = toy_encode_text(spec.prompt or f"{spec.name} style", dim,
                                   spec.text_tokens, seed)
    style = StyleReference.from_tokens(spec.name, text, image)
    if spec.scale != 1.0:
        style = style.scaled(spec.scale)
    return style


def build_inputs(cfg: ExperimentConfig):
    """Styles and subject for a config; embeddings are keyed to the base seed
    so repeats share identical inputs."""
    dim = cfg.denoise.dim
    seed = cfg.denoise.seed
    styles = [build_style(spec, dim, seed) for spec in cfg.styles]
    subject = SubjectPrompt(
        text=cfg.subject,
        tokens=toy_encode_text(cfg.subject, dim, cfg.subject_tokens, seed),
    )
    return styles, subject


# --- trajectory CSV -------------------------------------------------------

def trajectory_columns(n_styles: int) -> list[str]:
    cols = ["step", "gamma_auto"]
    for i in range(1, n_styles + 1):
        cols += [f"sigma_{i}", f"tau_{i}", f"score_{i}", f"w_{i}"]
    cols += ["subject_w", "latent_pool_norm"]
    return cols


def write_trajectory_csv(path, logs, n_styles: int) -> None:
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(trajectory_columns(n_styles))
            for log in logs:
                for record in log.records:
                    row = [str(record.step), repr(record.state.gamma_auto)]
                    for i in range(n_styles):
                        row += [repr(record.state.sigma[i]),
                                repr(record.state.tau[i]),
                                repr(record.state.scores[i]),
                                repr(record.state.weights[i])]
                    row.append(repr(record.state.subject_weight))
                    row.append(repr(float(np.linalg.norm(record.latent_pool))))
                    writer.writerow(row)
    except OSError as exc:
        raise InputIOError(f"cannot write trajectory {path}: {exc}") from exc


def _write_json(path, payload) -> None:
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            json.dump(payload, fh, indent=2, sort_keys=True)
            fh.write("\n")
    except OSError as exc:
        raise InputIOError(f"cannot write {path}: {exc}") from exc


# --- experiment runs ------------------------------------------------------

def _resolve_out_dir(cfg: ExperimentConfig, out_dir) -> Path:
    target = out_dir or cfg.output_dir
    if not target:
        raise ConfigError("experiment.output_dir: missing (or pass --out)")
    path = Path(target)
    try:
        path.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise InputIOError(f"cannot create output dir {path}: {exc}") from exc
    return path


def _run_repeats(ctx: FusedContext, styles, cfg: ExperimentConfig, base_seed: int):
    logs = []
    alignments = []
    for repeat in range(cfg.repeats):
        dcfg = replace(cfg.denoise, seed=base_seed + repeat)
        log = run(ctx, styles, dcfg)
        logs.append(log)
        alignments.append(final_alignment(log, styles))
    return logs, alignments


def _mean_columns(rows):
    return [float(v) for v in np.mean(np.asarray(rows, dtype=np.float64), axis=0)]


def _summarize(logs, alignments, styles, cfg: ExperimentConfig):
    n = len(styles)
    mean_alignment = _mean_columns(alignments)
    report = balance_report(mean_alignment, cfg.dominance_margin)
    weight_rows = [rec.state.weights for log in logs for rec in log.records]
    subject_ws = [rec.state.subject_weight for log in logs for rec in log.records]
    gammas = [rec.state.gamma_auto for log in logs for rec in log.records]
    return {
        "styles": [st.name for st in styles],
        "per_style_alignment": mean_alignment,
        "harmonic_mean": report.harmonic_mean,
        "dominant_style": report.dominant_style,
        "mean_weights": _mean_columns(weight_rows) if weight_rows else None,
        "mean_subject_weight": float(np.mean(subject_ws)) if subject_ws else None,
        "mean_gamma_auto": float(np.mean(gammas)) if gammas else None,
        "steps": cfg.denoise.steps,
        "repeats": cfg.repeats,
        "n_styles": n,
    }


def run_experiment(cfg: ExperimentConfig, out_dir=None, seed=None) -> dict:
    """Run the configured experiment and write trajectory.csv + summary.json.

    Returns the summary payload. Deterministic given the (resolved) seed.
    """
    out = _resolve_out_dir(cfg, out_dir)
    base_seed = cfg.denoise.seed if seed is None else seed
    cfg = replace(cfg, denoise=replace(cfg.denoise, seed=base_seed))
    styles, subject = build_inputs(cfg)
    ctx = assemble(styles, subject)
    logs, alignments = _run_repeats(ctx, styles, cfg, base_seed)

    csv_path = out / "trajectory.csv"
    write_trajectory_csv(csv_path, logs, len(styles))
    summary = _summarize(logs, alignments, styles, cfg)
    summary.update({
        "subject": cfg.subject,
        "weight_mode": cfg.denoise.weight_mode,
        "seed": base_seed,
        "output_dir": str(out),
        "trajectory_csv": str(csv_path),
    })
    _write_json(out / "summary.json", summary)
    return summary


def run_ablation_suite(cfg: ExperimentConfig, out_dir=None, seed=None) -> dict:
    """Run the four-arm ablation {decomposed, naive} x {fixed_equal, sar}.

    All arms consume identical seeds and identical style inputs; per-arm
    trajectory CSVs land next to one ablation.json comparison record.
    """
    if len(cfg.styles) < 2:
        raise ConfigError("ablation needs at least 2 styles")
    out = _resolve_out_dir(cfg, out_dir)
    base_seed = cfg.denoise.seed if seed is None else seed
    cfg = replace(cfg, denoise=replace(cfg.denoise, seed=base_seed))
    styles, subject = build_inputs(cfg)

    contexts = {
        "decomposed": assemble(styles, subject),
        "naive": assemble_naive_concat(styles, subject),
    }
    arms = {}
    for arm in ABLATION_ARMS:
        assembly, _, mode = arm.partition("_")
        ctx = contexts[assembly]
        arm_cfg = replace(cfg, denoise=replace(cfg.denoise, weight_mode=mode,
                                               manual_weights=None))
        logs, alignments = _run_repeats(ctx, styles, arm_cfg, base_seed)
        csv_path = out / f"trajectory_{arm}.csv"
        write_trajectory_csv(csv_path, logs, len(styles))
        record = _summarize(logs, alignments, styles, arm_cfg)
        record.update({
            "assembly": assembly,
            "weight_mode": mode,
            "subject_rows": subject_row_count(ctx),
            "subject_attention_mass": subject_attention_mass(ctx),
            "trajectory_csv": str(csv_path),
        })
        arms[arm] = record

    payload = {
        "subject": cfg.subject,
        "styles": [st.name for st in styles],
        "repeats": cfg.repeats,
        "seed": base_seed,
        "output_dir": str(out),
        "arms": arms,
    }
    _write_json(out / "ablation.json", payload)
    return payload


# --- embedding CLI helpers ------------------------------------------------

def encode_prompt(prompt: str, out_path, dim: int = 32, tokens: int = 4,
                  seed: int = 0, name=None) -> dict:
    """Toy-encode a prompt and write a single-record interchange file."""
    if not prompt:
        raise ConfigError("encode.prompt: must be nonempty")
    try:
        seq = toy_encode_text(prompt, dim, tokens, seed)
    except ValueError as exc:
        raise ConfigError(f"encode: {exc}") from exc
    record_name = name or prompt
    try:
        write_embeddings(out_path, [(record_name, seq)])
    except OSError as exc:
        raise InputIOError(f"cannot write {out_path}: {exc}") from exc
    return {"path": str(out_path), "name": record_name, "kind": "text",
            "rows": seq.count, "cols": seq.dim}


def inspect_embeddings(path) -> list[dict]:
    """Validate an interchange file and describe its records."""
    return [{"name": name, "kind": seq.source_kind,
             "rows": seq.count, "cols": seq.dim}
            for name, seq in load_embeddings(path)]
