import enum
from typing import List, Optional

from pydantic import BaseModel, ConfigDict, Field

from schemas.network import TrainerConfigSchema

FULL_WIDTH_CHANNELS = (64, 128, 256, 512)


class EncoderPathEnum(str, enum.Enum):
    PERSPECTIVE = "p"
    IMAGE = "i"


class Phase3ModeEnum(str, enum.Enum):
    OURS_A = "ours_a"
    OURS_B = "ours_b"


class PENetConfigSchema(BaseModel):
    width_scale: float = Field(0.25, gt=0, le=1)
    image_channels: int = Field(3, ge=1)
    kernel_size: int = Field(4, ge=2)
    leaky_slope: float = Field(0.2, ge=0, lt=1)

    model_config = ConfigDict(frozen=True)

    @property
    def encoder_channels(self) -> List[int]:
        return [
            max(1, round(channels * self.width_scale))
            for channels in FULL_WIDTH_CHANNELS
        ]

    @property
    def decoder_channels(self) -> List[int]:
        return list(reversed(self.encoder_channels[:-1])) + [1]


class Phase3ConfigSchema(BaseModel):
    mode: Phase3ModeEnum = Phase3ModeEnum.OURS_B
    trainer: TrainerConfigSchema = Field(default_factory=TrainerConfigSchema)
    supervise_perspective: bool = False
    perspective_loss_weight: float = Field(1.0, ge=0)

    model_config = ConfigDict(frozen=True)


class PhaseReportSchema(BaseModel):
    phase: int = Field(..., ge=1, le=3)
    epochs: int = Field(..., ge=0)
    mae: float = Field(..., ge=0)
    mse: float = Field(..., ge=0)
    loss_curve: List[float]
    mode: Optional[Phase3ModeEnum] = None
    final_loss: Optional[float] = None
