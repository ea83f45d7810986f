import math
from enum import Enum
from typing import Optional

from pydantic import BaseModel, ConfigDict, Field, NonNegativeInt, PositiveInt


class Method(str, Enum):
    PLAIN = "plain"
    CANN = "cann"


class TrainConfig(BaseModel):
    """Hyperparameters shared by both trainers."""

    model_config = ConfigDict(frozen=True)

    learning_rate: float = Field(default=0.1, gt=0, description="Step size alpha")
    epochs: PositiveInt = Field(default=50)
    hidden_sizes: Optional[list[PositiveInt]] = Field(
        default=None, description="Hidden layer sizes; one default-sized layer when None"
    )
    seed: NonNegativeInt = Field(default=0, description="Seed for initialization and shuffling")
    init_range: float = Field(default=0.5, gt=0, description="Uniform init bound")

    def layer_sizes(self, n_features: int, n_outputs: int) -> list[int]:
        hidden = self.hidden_sizes or [max(4, math.ceil((n_features + n_outputs) / 2))]
        return [n_features, *hidden, n_outputs]


class EpochLog(BaseModel):
    """One row of the per-epoch training log."""

    epoch: int
    data_error: float
    correlation_error: Optional[float] = None
    blended_error: Optional[float] = None
    train_accuracy: float
