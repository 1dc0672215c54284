import csv
import json

import numpy as np
import pytest

from amsf.denoiser import DenoiseConfig
from amsf.errors import ConfigError, InputIOError
from amsf.harness import (
    ExperimentConfig,
    StyleSpec,
    build_style,
    encode_prompt,
    inspect_embeddings,
    load_config,
    run_ablation_suite,
    run_experiment,
    trajectory_columns,
    write_config,
)
from amsf.metrics import harmonic_mean
from amsf.sar import SarConfig

CONFIG_TEXT = """
[experiment]
subject = a dog
subject_tokens = 2
repeats = 2
seed = 7

[denoise]
steps = 6
latent_rows = 12
dim = 16
step_size = 0.3
weight_mode = sar_adaptive

[sar]
kappa = 4
gamma_min = 1
gamma_max = 5

[style:mosaic]
source = toy
prompt = mosaic art style

[style:poster]
source = toy
prompt = vintage travel poster style
scale = 1.5
"""


@pytest.fixture
def config_path(tmp_path):
    path = tmp_path / "demo.ini"
    path.write_text(CONFIG_TEXT, encoding="utf-8")
    return path


def _small_config(**overrides):
    base = dict(
        styles=(StyleSpec(name="a", prompt="warm style"),
                StyleSpec(name="b", prompt="cold style")),
        subject="a dog",
        denoise=DenoiseConfig(steps=5, latent_rows=10, dim=16, seed=2),
    )
    base.update(overrides)
    return ExperimentConfig(**base)


def test_load_config_fields(config_path):
    cfg = load_config(config_path)
    assert cfg.subject == "a dog"
    assert cfg.repeats == 2
    assert cfg.denoise.seed == 7
    assert cfg.denoise.steps == 6
    assert cfg.denoise.dim == 16
    assert cfg.denoise.sar.kappa == 4.0
    assert [s.name for s in cfg.styles] == ["mosaic", "poster"]
    assert cfg.styles[1].scale == 1.5


def test_config_roundtrip(tmp_path, config_path):
    cfg = load_config(config_path)
    out = tmp_path / "rt.ini"
    write_config(cfg, out)
    assert load_config(out) == cfg


def test_load_config_missing_file(tmp_path):
    with pytest.raises(InputIOError, match="cannot read config"):
        load_config(tmp_path / "nope.ini")


def test_load_config_named_field_error(tmp_path):
    path = tmp_path / "bad.ini"
    path.write_text("[experiment]\nsubject = a dog\n\n[denoise]\nsteps = soon\n"
                    "\n[style:a]\nsource = toy\n", encoding="utf-8")
    with pytest.raises(ConfigError, match="denoise.steps"):
        load_config(path)


def test_load_config_requires_subject(tmp_path):
    path = tmp_path / "bad.ini"
    path.write_text("[experiment]\n\n[style:a]\nsource = toy\n", encoding="utf-8")
    with pytest.raises(ConfigError, match="subject"):
        load_config(path)


def test_load_config_requires_styles(tmp_path):
    path = tmp_path / "bad.ini"
    path.write_text("[experiment]\nsubject = a dog\n", encoding="utf-8")
    with pytest.raises(ConfigError, match="style"):
        load_config(path)


def test_style_spec_validation():
    with pytest.raises(ConfigError, match="source"):
        StyleSpec(name="x", source="magic")
    with pytest.raises(ConfigError, match="file"):
        StyleSpec(name="x", source="file")


def test_build_style_from_file_record(tmp_path):
    emb = tmp_path / "styles.emb"
    encode_prompt("mosaic art style", emb, dim=16, tokens=3, name="mosaic/text")
    spec = StyleSpec(name="mosaic", source="file", file=str(emb), record="mosaic/text")
    style = build_style(spec, dim=16, seed=0)
    assert style.text_tokens.count == 3      # from the file record
    assert style.image_tokens.count == 4     # toy default fills the other modality
    with pytest.raises(ConfigError, match="record"):
        build_style(StyleSpec(name="m", source="file", file=str(emb),
                              record="missing"), dim=16, seed=0)
    with pytest.raises(ConfigError, match="dim"):
        build_style(spec, dim=32, seed=0)


def test_run_experiment_outputs(tmp_path, config_path):
    cfg = load_config(config_path)
    summary = run_experiment(cfg, out_dir=tmp_path / "out")
    csv_path = tmp_path / "out" / "trajectory.csv"
    json_path = tmp_path / "out" / "summary.json"
    assert csv_path.exists() and json_path.exists()

    with open(csv_path, newline="") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == trajectory_columns(2)
    assert len(rows) - 1 == cfg.denoise.steps * cfg.repeats  # stacked repeats

    saved = json.loads(json_path.read_text())
    assert saved == summary
    assert summary["harmonic_mean"] == pytest.approx(
        harmonic_mean(summary["per_style_alignment"]), abs=1e-9)
    assert summary["styles"] == ["mosaic", "poster"]
    assert summary["repeats"] == 2


def test_run_experiment_deterministic_bytes(tmp_path, config_path):
    cfg = load_config(config_path)
    out = tmp_path / "out"
    run_experiment(cfg, out_dir=out)
    first_csv = (out / "trajectory.csv").read_bytes()
    first_json = (out / "summary.json").read_bytes()
    run_experiment(cfg, out_dir=out)
    assert (out / "trajectory.csv").read_bytes() == first_csv
    assert (out / "summary.json").read_bytes() == first_json


def test_run_experiment_seed_override_changes_results(tmp_path, config_path):
    cfg = load_config(config_path)
    s1 = run_experiment(cfg, out_dir=tmp_path / "a", seed=1)
    s2 = run_experiment(cfg, out_dir=tmp_path / "b", seed=2)
    assert s1["per_style_alignment"] != s2["per_style_alignment"]
    assert s1["seed"] == 1 and s2["seed"] == 2


def test_run_experiment_requires_output_dir():
    with pytest.raises(ConfigError, match="output_dir"):
        run_experiment(_small_config())


def test_run_experiment_unwritable_output(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    with pytest.raises(InputIOError, match="cannot create output dir"):
        run_experiment(_small_config(), out_dir=blocker / "sub")


def test_trajectory_weight_columns_sum_to_one(tmp_path):
    cfg = _small_config()
    run_experiment(cfg, out_dir=tmp_path)
    with open(tmp_path / "trajectory.csv", newline="") as fh:
        reader = csv.DictReader(fh)
        for row in reader:
            total = float(row["w_1"]) + float(row["w_2"]) + float(row["subject_w"])
            assert total == pytest.approx(1.0, abs=1e-9)


def test_ablation_suite(tmp_path):
    cfg = _small_config()
    result = run_ablation_suite(cfg, out_dir=tmp_path)
    arms = result["arms"]
    assert set(arms) == {"decomposed_fixed_equal", "decomposed_sar_adaptive",
                         "naive_fixed_equal", "naive_sar_adaptive"}
    assert arms["naive_fixed_equal"]["subject_rows"] == \
        2 * arms["decomposed_fixed_equal"]["subject_rows"]
    mass_ratio = (arms["naive_fixed_equal"]["subject_attention_mass"]
                  / arms["decomposed_fixed_equal"]["subject_attention_mass"])
    assert mass_ratio == pytest.approx(2.0, abs=1e-9)
    assert (tmp_path / "ablation.json").exists()

    # the fixed_equal decomposed arm logs constant thirds
    with open(tmp_path / "trajectory_decomposed_fixed_equal.csv", newline="") as fh:
        for row in csv.DictReader(fh):
            assert float(row["w_1"]) == pytest.approx(1 / 3, abs=1e-12)
            assert float(row["w_2"]) == pytest.approx(1 / 3, abs=1e-12)

    # naive arms have no subject share
    with open(tmp_path / "trajectory_naive_sar_adaptive.csv", newline="") as fh:
        for row in csv.DictReader(fh):
            assert float(row["subject_w"]) == 0.0

    # all arms consumed the same seed
    assert len({arm["steps"] for arm in arms.values()}) == 1
    assert result["seed"] == cfg.denoise.seed


def test_ablation_requires_two_styles():
    cfg = _small_config(styles=(StyleSpec(name="only"),))
    with pytest.raises(ConfigError, match="2 styles"):
        run_ablation_suite(cfg, out_dir="unused")


def test_encode_and_inspect_helpers(tmp_path):
    out = tmp_path / "prompt.emb"
    record = encode_prompt("mosaic art style", out, dim=16, tokens=4, seed=1)
    assert record["rows"] == 4 and record["cols"] == 16
    records = inspect_embeddings(out)
    assert records == [{"name": "mosaic art style", "kind": "text",
                        "rows": 4, "cols": 16}]
    with pytest.raises(ConfigError, match="prompt"):
        encode_prompt("", out)


def test_three_style_summary_arity(tmp_path):
    cfg = _small_config(styles=(StyleSpec(name="a"), StyleSpec(name="b"),
                                StyleSpec(name="c")))
    summary = run_experiment(cfg, out_dir=tmp_path)
    assert len(summary["per_style_alignment"]) == 3
    assert len(summary["mean_weights"]) == 3
    header = (tmp_path / "trajectory.csv").read_text().splitlines()[0]
    assert header == ",".join(trajectory_columns(3))


def test_sar_config_subject_fraction_from_file(tmp_path):
    path = tmp_path / "sf.ini"
    path.write_text("[experiment]\nsubject = a dog\n\n[sar]\nsubject_fraction = 0.5\n"
                    "\n[style:a]\nsource = toy\n", encoding="utf-8")
    cfg = load_config(path)
    assert cfg.denoise.sar.subject_fraction == 0.5
    default = SarConfig()
    assert default.resolve_subject_fraction(2) == pytest.approx(1 / 3)
