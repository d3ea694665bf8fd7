"""YAML run configuration.

All keys are optional; omitted ones keep their defaults. The ``synth``
section maps directly onto :class:`SynthSpec` fields.
"""
from __future__ import annotations

from dataclasses import dataclass, field, fields
from pathlib import Path

import yaml

from ..errors import ValidationError
from ..model import N_METRICS, ThresholdVector
from .synth import SynthSpec


@dataclass(frozen=True)
class RunConfig:
    thresholds: tuple[float, ...] = (0.0,) * N_METRICS
    grid_step: float = 0.05
    folds: int = 10
    seed: int = 0
    max_rows: int = 10_000_000
    mbd_passes: int = 3
    reserve_price: float = 0.0
    neutral_saliency: float = 0.5
    test_fraction: float = 0.1
    synth: SynthSpec = field(default_factory=SynthSpec)

    def threshold_vector(self) -> ThresholdVector:
        return ThresholdVector(theta=self.thresholds)


def load_config(path) -> RunConfig:
    with open(Path(path), "r", encoding="utf-8") as f:
        raw = yaml.safe_load(f)
    if raw is None:
        raw = {}
    if not isinstance(raw, dict):
        raise ValidationError(f"{path}: config must be a mapping")
    known = {f.name for f in fields(RunConfig)}
    unknown = set(raw) - known
    if unknown:
        raise ValidationError(f"{path}: unknown config keys {sorted(unknown)}")
    kwargs = dict(raw)
    if "thresholds" in kwargs:
        thresholds = tuple(float(v) for v in kwargs["thresholds"])
        if len(thresholds) != N_METRICS:
            raise ValidationError(f"{path}: thresholds needs {N_METRICS} values")
        kwargs["thresholds"] = thresholds
    if "synth" in kwargs:
        synth_raw = kwargs["synth"] or {}
        synth_known = {f.name for f in fields(SynthSpec)}
        synth_unknown = set(synth_raw) - synth_known
        if synth_unknown:
            raise ValidationError(f"{path}: unknown synth keys {sorted(synth_unknown)}")
        kwargs["synth"] = SynthSpec(**synth_raw)
    try:
        config = RunConfig(**kwargs)
        config.threshold_vector()  # validate sign constraints eagerly
    except (TypeError, ValidationError) as exc:
        raise ValidationError(f"{path}: {exc}") from exc
    return config
