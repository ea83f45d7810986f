from typing import Any, Optional

import numpy as np
from pydantic import BaseModel, Field, model_validator

from src.schemas.training import Method


class TrialFingerprint(BaseModel):
    """Everything that determines a TrialReport."""

    dataset_fingerprint: str
    method: Method
    base_seed: int
    seeds: list[int]
    train_fraction: float
    p: Optional[float] = None
    learning_rate: float
    epochs: int
    init_range: float
    layer_sizes: list[int]
    keep_fraction: Optional[float] = None
    importance_source: Optional[str] = Field(None, description="file, full or train")
    matched_data_step: bool = Field(False, description="cann trained at alpha / p")


class TrialReport(BaseModel):
    method: Method
    accuracies: list[float] = Field(description="Per-trial test accuracy in percent")
    mean: float
    std: float
    n_trials: int
    fingerprint: TrialFingerprint

    @classmethod
    def from_accuracies(cls, accuracies: list[float], fingerprint: TrialFingerprint):
        values = np.asarray(accuracies, dtype=np.float64)
        return cls(
            method=fingerprint.method,
            accuracies=[float(a) for a in accuracies],
            mean=float(values.mean()),
            std=float(values.std()),
            n_trials=len(accuracies),
            fingerprint=fingerprint,
        )


class CurvePoint(BaseModel):
    method: Method
    train_fraction: float
    mean: float
    std: float
    n_trials: int


class LearningCurve(BaseModel):
    fractions: list[float]
    points: list[CurvePoint]

    @model_validator(mode="after")
    def check_fractions(self):
        if any(b <= a for a, b in zip(self.fractions, self.fractions[1:])):
            raise ValueError("fractions must be strictly increasing")
        if any(not 0 < f < 1 for f in self.fractions):
            raise ValueError("fractions must lie in (0, 1)")
        return self

    def series(self, method: Method) -> list[CurvePoint]:
        return [point for point in self.points if point.method == method]


class RunManifest(BaseModel):
    command: str
    flags: dict[str, Any]
    dataset_fingerprint: str
    tool_version: str
    duration_seconds: float
    outputs: list[str]
