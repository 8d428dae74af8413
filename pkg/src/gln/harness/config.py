"""Run configuration: one dataclass, one flat key = value file format.

A config plus the code version fully determines a run, including every
random draw.  Config files are plain text: one `key = value` pair per
line, `#` starts a comment, keys are the dataclass field names.  Tuples
are comma-separated (`layer_sizes = 128,128,1`), booleans are
true/false.
"""

from __future__ import annotations

from dataclasses import dataclass, fields, replace

from ..network import BETA_DEFAULT

__all__ = ["ExperimentConfig", "defaults_for", "parse_config_file", "apply_overrides"]


@dataclass
class ExperimentConfig:
    experiment: str = ""
    seed: int = 0
    out_dir: str = "runs/out"

    # dataset paths (IDX files, optionally gzipped)
    train_images: str = ""
    train_labels: str = ""
    test_images: str = ""
    test_labels: str = ""

    # architecture
    layer_sizes: tuple = (128, 128, 1)
    context_dim: int = 4
    epsilon: float = 0.01
    beta: float = BETA_DEFAULT
    clip_radius: float = 200.0

    # learning rate
    lr_schedule: str = "mnist"
    lr_constant: float = 0.01
    lr_c: float = 1.0

    # classification run shape
    deskew: bool = True
    shuffle: bool = False
    train_subset: int = 0  # 0 = use everything
    test_subset: int = 0
    epochs: int = 1
    eval_every: int = 5000  # emit running train accuracy every N steps; 0 = never

    # capacity experiment
    capacity_mode: str = "shuffled_labels"  # or "noise"
    capacity_examples: int = 1000
    capacity_epochs: int = 6
    capacity_context_dims: tuple = (1, 2, 4)
    capacity_runs: int = 3
    image_rows: int = 28
    image_cols: int = 28

    # continual-learning experiment
    tasks: int = 4
    task_train: int = 10000
    task_test: int = 2000

    # density experiment
    density_crop: int = 14
    density_train: int = 1000
    density_test: int = 200
    density_layer_sizes: tuple = (8, 1)
    density_context_dim: int = 2

    # uci experiment
    csv_path: str = ""
    schema_path: str = ""
    splits: int = 100
    train_fraction: float = 0.8

    # saliency / eval
    saliency_per_class: int = 64
    model_path: str = ""


_EXPERIMENT_DEFAULTS = {
    # single-pass classification with the published configuration
    "train-mnist": dict(layer_sizes=(128, 128, 1), context_dim=4, lr_schedule="mnist", deskew=True),
    # random-label capacity probe
    "capacity": dict(
        layer_sizes=(128, 1),
        lr_schedule="constant",
        lr_constant=1e-4,
        deskew=False,
    ),
    # permuted-pixel continual learning
    "forgetting": dict(
        layer_sizes=(100, 25, 1),
        context_dim=6,
        lr_schedule="constant",
        lr_constant=1e-2,
        deskew=False,
    ),
    # autoregressive density modeling
    "density": dict(lr_schedule="inverse_t", lr_c=1.0, deskew=False),
    # per-class collapsed-weight maps
    "saliency": dict(
        layer_sizes=(50, 25, 1),
        context_dim=4,
        lr_schedule="constant",
        lr_constant=1e-2,
        deskew=False,
    ),
    # csv benchmark: single pass on 80%, frozen eval on 20%, many splits
    "uci": dict(layer_sizes=(1000, 500, 1), context_dim=8, lr_schedule="mnist"),
    "eval": dict(deskew=True),
}


def defaults_for(experiment: str) -> ExperimentConfig:
    """Per-experiment default configuration."""
    if experiment not in _EXPERIMENT_DEFAULTS:
        raise ValueError(f"unknown experiment {experiment!r}")
    return replace(ExperimentConfig(experiment=experiment), **_EXPERIMENT_DEFAULTS[experiment])


def parse_config_file(path: str) -> dict:
    """Read a flat key = value file into a raw string dict."""
    raw = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected 'key = value'")
            key, value = (part.strip() for part in line.split("=", 1))
            raw[key] = value
    return raw


def _convert(value: str, target_type, field_name: str):
    if target_type is str:
        return value
    if target_type is int:
        return int(value)
    if target_type is float:
        return float(value)
    if target_type is bool:
        lowered = value.lower()
        if lowered in ("true", "1", "yes"):
            return True
        if lowered in ("false", "0", "no"):
            return False
        raise ValueError(f"{field_name}: expected true/false, got {value!r}")
    if target_type is tuple:
        parts = [p.strip() for p in value.split(",") if p.strip()]
        return tuple(int(p) for p in parts)
    raise ValueError(f"{field_name}: unsupported config type {target_type}")


def apply_overrides(cfg: ExperimentConfig, raw: dict) -> ExperimentConfig:
    """Apply string overrides (from file or CLI) onto a config."""
    by_name = {f.name: f for f in fields(ExperimentConfig)}
    updates = {}
    for key, value in raw.items():
        if key not in by_name:
            raise ValueError(f"unknown config key {key!r}")
        current = getattr(cfg, key)
        target_type = type(current) if current is not None else str
        updates[key] = _convert(value, target_type, key)
    return replace(cfg, **updates)
