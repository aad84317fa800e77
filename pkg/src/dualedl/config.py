"""Experiment configuration: strict JSON with defaults for every field.

A minimal (even empty) config file runs the reference benchmark.  Unknown
fields are rejected with the offending name, and the fully-defaulted
effective config is echoed into the output directory so a run can be
reproduced from its artifacts alone.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, fields, replace
from pathlib import Path

from .data import LongTailSpec
from .losses import AnnealSchedule
from .policy import PolicyConfig
from .trainer import NetworkSpec, TrainConfig


@dataclass(frozen=True)
class NetConfig:
    """Architecture knobs; input width and class count come from the data spec."""

    hidden_dims: tuple = (64, 64)
    evidence_activation: str = "softplus"

    def __post_init__(self):
        object.__setattr__(self, "hidden_dims", tuple(int(h) for h in self.hidden_dims))


@dataclass(frozen=True)
class ExperimentConfig:
    data: LongTailSpec
    net: NetConfig
    train: TrainConfig
    policy: PolicyConfig
    schedule: AnnealSchedule
    output_dir: str = "runs/default"

    @classmethod
    def default(cls) -> "ExperimentConfig":
        return cls(
            data=LongTailSpec(),
            net=NetConfig(),
            train=TrainConfig(),
            policy=PolicyConfig(),
            schedule=AnnealSchedule(),
        )

    def network_spec(self) -> NetworkSpec:
        return NetworkSpec(
            input_dim=self.data.feature_dim,
            k=self.data.k,
            hidden_dims=self.net.hidden_dims,
            evidence_activation=self.net.evidence_activation,
        )

    def with_seed(self, seed: int) -> "ExperimentConfig":
        """Override both the data seed and the training seed."""
        return replace(
            self,
            data=replace(self.data, seed=int(seed)),
            train=replace(self.train, seed=int(seed)),
        )

    def to_dict(self) -> dict:
        out = {}
        for section in ("data", "net", "train", "policy", "schedule"):
            obj = getattr(self, section)
            out[section] = {
                f.name: _plain(getattr(obj, f.name)) for f in fields(obj)
            }
        out["output_dir"] = self.output_dir
        return out


def _plain(value):
    if isinstance(value, tuple):
        return [_plain(v) for v in value]
    return value


_SECTIONS = {
    "data": LongTailSpec,
    "net": NetConfig,
    "train": TrainConfig,
    "policy": PolicyConfig,
    "schedule": AnnealSchedule,
}

_TUPLE_FIELDS = {"ambiguous_class_pairs", "hidden_dims"}


def _build_section(cls, mapping, section: str):
    if not isinstance(mapping, dict):
        raise ValueError(f"config section '{section}' must be an object")
    known = {f.name for f in fields(cls)}
    unknown = set(mapping) - known
    if unknown:
        raise ValueError(f"unknown field '{section}.{sorted(unknown)[0]}' in config")
    kwargs = {}
    for key, value in mapping.items():
        if key in _TUPLE_FIELDS and isinstance(value, list):
            value = tuple(tuple(v) if isinstance(v, list) else v for v in value)
        kwargs[key] = value
    try:
        return cls(**kwargs)
    except (TypeError, ValueError) as exc:
        raise ValueError(f"invalid config section '{section}': {exc}") from exc


def config_from_dict(raw: dict) -> ExperimentConfig:
    if not isinstance(raw, dict):
        raise ValueError("config root must be a JSON object")
    unknown = set(raw) - set(_SECTIONS) - {"output_dir"}
    if unknown:
        raise ValueError(f"unknown field '{sorted(unknown)[0]}' in config")
    parts = {
        name: _build_section(cls, raw.get(name, {}), name)
        for name, cls in _SECTIONS.items()
    }
    output_dir = raw.get("output_dir", "runs/default")
    if not isinstance(output_dir, str):
        raise ValueError("output_dir must be a string")
    return ExperimentConfig(output_dir=output_dir, **parts)


def load_config(path) -> ExperimentConfig:
    try:
        raw = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ValueError(f"config file {path} is not valid JSON: {exc}") from exc
    return config_from_dict(raw)


def dump_config(config: ExperimentConfig, path) -> None:
    Path(path).write_text(json.dumps(config.to_dict(), indent=2, sort_keys=True) + "\n")
