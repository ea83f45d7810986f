from enum import Enum
from typing import Optional

from pydantic import BaseModel, Field, model_validator


class ImportanceScope(str, Enum):
    """Which instances the target correlations are computed over."""

    FULL = "full"  # whole dataset, the published protocol
    TRAIN = "train"  # train portion of a seeded split


class ImportanceEntry(BaseModel):
    feature: str
    output: str
    value: float = Field(ge=-1.0, le=1.0, description="Target correlation I")
    defined: bool = Field(True, description="False when a zero-variance pair was reported as 0")


class ImportanceFile(BaseModel):
    dataset_fingerprint: str
    scope: ImportanceScope
    seed: Optional[int] = None
    train_fraction: Optional[float] = None
    feature_names: list[str]
    output_labels: list[str]
    entries: list[ImportanceEntry]

    @model_validator(mode="after")
    def check_entries(self):
        expected = len(self.feature_names) * len(self.output_labels)
        if len(self.entries) != expected:
            raise ValueError(f"expected {expected} entries, found {len(self.entries)}")
        pairs = {(entry.feature, entry.output) for entry in self.entries}
        if len(pairs) != expected:
            raise ValueError("duplicate (feature, output) entries")
        return self
