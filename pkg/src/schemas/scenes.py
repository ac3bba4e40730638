from typing import Optional

from pydantic import BaseModel, ConfigDict, Field, model_validator


class SceneConfigSchema(BaseModel):
    height: int = Field(32, ge=32)
    width: int = Field(32, ge=32)
    count: int = Field(20, ge=0)
    perspective_base: float = Field(1.0, gt=0)
    perspective_slope: Optional[float] = None
    head_scale: float = Field(1.0, gt=0)
    max_attempts: int = Field(200, ge=1)

    model_config = ConfigDict(frozen=True)

    @model_validator(mode="after")
    def validate_perspective(self) -> "SceneConfigSchema":
        bottom = self.perspective_base + self.slope * (self.height - 1)
        if bottom <= 0:
            raise ValueError(
                "Perspective ramp must stay positive over all rows."
            )
        return self

    @property
    def slope(self) -> float:
        # default ramp: heads 5x larger at the bottom row than at the top
        if self.perspective_slope is not None:
            return self.perspective_slope
        return 4.0 * self.perspective_base / (self.height - 1)


class SceneMetadataSchema(BaseModel):
    height: int
    width: int
    seed: int
    requested_count: int
    placed_count: int
    head_scale: float
    perspective_base: float
    perspective_slope: float
    radii: list[float]
    has_roi: bool = False
