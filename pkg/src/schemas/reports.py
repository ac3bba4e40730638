from typing import Dict, List, Optional

from pydantic import BaseModel, Field

from schemas.dictionary import DictionaryMetadataSchema


class TimingStatsSchema(BaseModel):
    median_ms: float = Field(..., ge=0)
    min_ms: float = Field(..., ge=0)
    max_ms: float = Field(..., ge=0)
    timings_ms: List[float]


class BenchReportSchema(BaseModel):
    shape: List[int]
    reps: int
    seed: int
    dictionary: DictionaryMetadataSchema
    exact: TimingStatsSchema
    approx: TimingStatsSchema
    speedup: float
    min_speedup: float
    passed: bool
    input_checksum: str
    relative_error: float


class GradReportSchema(BaseModel):
    checked: int
    excluded: int
    max_relative_error: float
    mean_relative_error: float
    tolerance: float
    step: float
    passed: bool
    worst_parameter: Optional[str] = None
    per_parameter: Dict[str, float] = Field(default_factory=dict)


class EvalReportSchema(BaseModel):
    mae: float = Field(..., ge=0)
    mse: float = Field(..., ge=0)
    count: int = Field(..., ge=1)
    predicted_counts: List[float]
    gt_counts: List[float]


class CheckpointManifestSchema(BaseModel):
    kind: str
    config: dict
    seed: int
    epoch: int
    loss: Optional[float] = None
    parameters: List[str]
    shapes: Dict[str, List[int]]


class ExperimentReportSchema(BaseModel):
    name: str
    seeds: List[int]
    metrics: Dict[str, List[float]]
    medians: Dict[str, float]
    passed: Optional[bool] = None
    notes: Optional[str] = None


class TrainReportSchema(BaseModel):
    epochs: int = Field(..., ge=0)
    parameter_count: int = Field(..., ge=0)
    loss_curve: List[float]
    final_loss: float = Field(..., ge=0)
    train_mae: float = Field(..., ge=0)
    train_mse: float = Field(..., ge=0)
