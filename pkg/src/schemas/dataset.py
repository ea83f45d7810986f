from enum import Enum
from typing import Optional

from pydantic import BaseModel, ConfigDict, Field, model_validator


class ColumnKind(str, Enum):
    """Raw column type declared by the schema file."""

    CONTINUOUS = "continuous"
    NOMINAL = "nominal"


class ColumnSpec(BaseModel):
    name: str
    kind: ColumnKind


class DatasetSchema(BaseModel):
    """Schema file declaring column types and the class column of a CSV file."""

    columns: list[ColumnSpec] = Field(min_length=2)
    class_column: str = Field(description="Name of the target column")
    header: bool = Field(default=True, description="Whether the first row holds column names")
    missing_markers: list[str] = Field(default=["", "?"], description="Cells read as missing")
    delimiter: str = Field(default=",", min_length=1, max_length=1)

    @model_validator(mode="after")
    def check_class_column(self):
        names = [column.name for column in self.columns]
        if len(set(names)) != len(names):
            raise ValueError("column names must be unique")
        if self.class_column not in names:
            raise ValueError(f"class column {self.class_column!r} is not declared")
        if self.columns[names.index(self.class_column)].kind != ColumnKind.NOMINAL:
            raise ValueError("class column must be nominal")
        return self


class FeatureMeta(BaseModel):
    """Exact transform that produced one encoded feature column."""

    model_config = ConfigDict(frozen=True)

    source_column: str
    kind: ColumnKind
    # nominal columns
    category: Optional[str] = Field(None, description="Category of a one-hot column")
    is_missing_category: bool = False
    # continuous columns
    minimum: Optional[float] = None
    maximum: Optional[float] = None
    impute_value: Optional[float] = Field(None, description="Pre-scaling column mean")
    constant: bool = Field(False, description="max == min, encoded as all zeros")

    @property
    def name(self) -> str:
        if self.kind == ColumnKind.CONTINUOUS:
            return self.source_column
        if self.is_missing_category:
            return f"{self.source_column}=<missing>"
        return f"{self.source_column}={self.category}"


class DatasetExport(BaseModel):
    """JSON export of an encoded dataset's provenance."""

    fingerprint: str
    n_instances: int
    n_features: int
    n_outputs: int
    class_column: str
    class_labels: list[str]
    feature_meta: list[FeatureMeta]
