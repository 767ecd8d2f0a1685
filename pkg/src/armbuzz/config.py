"""Configuration loading: packaged defaults, optional YAML file, overrides.

Precedence (lowest to highest): packaged ``defaults.yaml``, a user config
file, ``--set key=value`` overrides with dotted paths (values parsed as YAML
scalars). The merged document is turned into a :class:`TrialConfig`.
"""

from __future__ import annotations

import copy
from importlib import resources
from pathlib import Path

import yaml

from .errors import ConfigError
from .features import CodecConfig
from .feedback import FeedbackMode, FeedbackThresholds
from .harness import TrialConfig
from .operators import UserModelConfig
from .sim import SimConfig


def builtin_defaults() -> dict:
    text = resources.files("armbuzz").joinpath("defaults.yaml").read_text(encoding="utf-8")
    return yaml.safe_load(text)


def load_config_file(path: str | Path) -> dict:
    p = Path(path)
    if not p.exists():
        raise ConfigError(f"config file not found: {p}")
    doc = yaml.safe_load(p.read_text(encoding="utf-8"))
    if doc is None:
        return {}
    if not isinstance(doc, dict):
        raise ConfigError(f"config file must hold a mapping, got {type(doc).__name__}")
    return doc


def _deep_merge(base: dict, override: dict) -> dict:
    merged = copy.deepcopy(base)
    for key, value in override.items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = _deep_merge(merged[key], value)
        else:
            merged[key] = copy.deepcopy(value)
    return merged


def apply_override(doc: dict, assignment: str) -> None:
    """Apply one ``dotted.path=value`` override in place."""
    if "=" not in assignment:
        raise ConfigError(f"override must look like key=value, got {assignment!r}")
    path, raw = assignment.split("=", 1)
    keys = [k for k in path.strip().split(".") if k]
    if not keys:
        raise ConfigError(f"override has an empty key path: {assignment!r}")
    try:
        value = yaml.safe_load(raw)
    except yaml.YAMLError as exc:
        raise ConfigError(f"cannot parse override value {raw!r}: {exc}") from exc
    node = doc
    for key in keys[:-1]:
        nxt = node.get(key)
        if not isinstance(nxt, dict):
            nxt = {}
            node[key] = nxt
        node = nxt
    node[keys[-1]] = value


def merge_config(config_path: str | Path | None = None,
                 overrides: list[str] | None = None) -> dict:
    doc = builtin_defaults()
    if config_path is not None:
        doc = _deep_merge(doc, load_config_file(config_path))
    for assignment in overrides or []:
        apply_override(doc, assignment)
    return doc


def _section(doc: dict, name: str, cls, field_names: set[str]):
    raw = doc.get(name) or {}
    if not isinstance(raw, dict):
        raise ConfigError(f"section {name!r} must be a mapping")
    unknown = set(raw) - field_names
    if unknown:
        raise ConfigError(f"unknown keys in section {name!r}: {sorted(unknown)}")
    return cls(**raw)


def trial_config_from_doc(doc: dict, task: FeedbackMode, *,
                          seed: int = 0,
                          duration_ticks: int | None = None,
                          snapshot_path: str | None = None) -> TrialConfig:
    sim = _section(doc, "sim", SimConfig,
                   {f for f in SimConfig.__dataclass_fields__} - {"rng_seed"})
    codec = _section(doc, "codec", CodecConfig,
                     set(CodecConfig.__dataclass_fields__))
    thresholds = _section(doc, "thresholds", FeedbackThresholds,
                          set(FeedbackThresholds.__dataclass_fields__))
    user = _section(doc, "user", UserModelConfig,
                    {f for f in UserModelConfig.__dataclass_fields__} - {"rng_seed"})
    learner = doc.get("learner") or {}
    trial = doc.get("trial") or {}
    cfg = TrialConfig(
        task=task,
        duration_ticks=int(duration_ticks if duration_ticks is not None
                           else trial.get("duration_ticks", 6000)),
        sim=sim,
        codec=codec,
        thresholds=thresholds,
        user=user,
        learner_alpha=float(learner.get("alpha", 0.1)),
        learner_gamma=float(learner.get("gamma", 0.92)),
        snapshot_path=snapshot_path,
        continue_learning=bool(trial.get("continue_learning", False)),
        seed=seed,
    )
    cfg.validate()
    return cfg


def parse_task(name: str) -> FeedbackMode:
    try:
        return FeedbackMode(name.strip().lower())
    except ValueError:
        valid = ", ".join(m.value for m in FeedbackMode)
        raise ConfigError(f"unknown task {name!r}; expected one of: {valid}") from None
