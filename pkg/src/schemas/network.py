from typing import Optional

from pydantic import BaseModel, Field

from src.schemas.training import Method, TrainConfig


class NetworkFile(BaseModel):
    """Serialized network with the provenance of the run that created it."""

    layer_sizes: list[int]
    weights: list[list[list[float]]] = Field(description="Per layer pair, row-major [from][to]")
    biases: list[list[float]]
    config: TrainConfig
    method: Method
    p: Optional[float] = Field(None, ge=0.0, le=1.0, description="Blend weight for cann")
    dataset_fingerprint: str
