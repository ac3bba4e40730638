import enum
from typing import List, Literal

from pydantic import BaseModel, ConfigDict, Field, field_validator

from schemas.dictionary import DictionaryConfigSchema


class PaddingModeEnum(str, enum.Enum):
    REPLICATE = "replicate"
    ZERO = "zero"


class NetworkConfigSchema(BaseModel):
    input_channels: int = Field(3, ge=1)
    backbone_channels: List[int] = Field(default_factory=lambda: [8, 8, 8])
    num_pgc_blocks: int = Field(5, ge=0)
    block_out_channels: int = Field(4, ge=1)
    dilation: Literal[2] = 2
    smoothing: bool = True
    smoothing_padding: PaddingModeEnum = PaddingModeEnum.REPLICATE
    pgc_weight_std: float = Field(0.01, gt=0)
    dictionary: DictionaryConfigSchema = Field(
        default_factory=DictionaryConfigSchema
    )

    model_config = ConfigDict(frozen=True)

    @field_validator("backbone_channels")
    @classmethod
    def validate_backbone_channels(cls, value: List[int]) -> List[int]:
        if not value:
            raise ValueError("backbone_channels must list at least one layer.")
        if any(channels < 1 for channels in value):
            raise ValueError("backbone_channels must all be positive.")
        return value

    @property
    def feature_stride(self) -> int:
        return 2

    def block_input_channels(self, index: int) -> int:
        return self.backbone_channels[-1] + index * self.block_out_channels

    @property
    def head_input_channels(self) -> int:
        return self.block_input_channels(self.num_pgc_blocks)


class TrainerConfigSchema(BaseModel):
    learning_rate: float = Field(1e-4, ge=0)
    momentum: float = Field(0.95, ge=0, lt=1)
    weight_decay: float = Field(5e-4, ge=0)
    epochs: int = Field(10, ge=0)
    seed: int = 0
    hflip: bool = False

    model_config = ConfigDict(frozen=True)
