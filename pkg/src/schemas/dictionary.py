import enum
import math
from typing import List, Optional

from pydantic import (
    BaseModel,
    ConfigDict,
    Field,
    field_validator,
    model_validator,
)


class NormalizationModeEnum(str, enum.Enum):
    UNIT_SUM = "unit_sum"
    PREFACTOR = "prefactor"


class DictionaryConfigSchema(BaseModel):
    kernel_size: int = Field(7, ge=1)
    sigma_min: float = Field(0.25, gt=0)
    sigma_max: float = Field(1.75, gt=0)
    sigma_step: float = Field(0.05, gt=0)
    normalization_mode: NormalizationModeEnum = NormalizationModeEnum.UNIT_SUM
    energy_threshold: float = Field(0.999, gt=0, le=1)
    retained_count: Optional[int] = Field(None, ge=1)

    model_config = ConfigDict(frozen=True)

    @field_validator("kernel_size")
    @classmethod
    def validate_kernel_size(cls, value: int) -> int:
        if value % 2 == 0:
            raise ValueError(f"kernel_size must be odd, got {value}.")
        return value

    @model_validator(mode="after")
    def validate_sigma_range(self) -> "DictionaryConfigSchema":
        if self.sigma_min > self.sigma_max:
            raise ValueError(
                f"sigma_min ({self.sigma_min}) must not exceed "
                f"sigma_max ({self.sigma_max})."
            )
        return self

    @property
    def grid_size(self) -> int:
        # 1e-9 absorbs binary rounding, e.g. 1.5 / 0.05 = 29.999999999999996
        span = (self.sigma_max - self.sigma_min) / self.sigma_step
        return math.floor(span + 1e-9) + 1


class DictionaryMetadataSchema(BaseModel):
    kernel_size: int
    sigma_min: float
    sigma_max: float
    sigma_step: float
    normalization_mode: NormalizationModeEnum
    energy_threshold: float
    retained_count: int
    requested_count: Optional[int] = None
    grid_size: int
    energy_ratio: float
    singular_values: List[float]
