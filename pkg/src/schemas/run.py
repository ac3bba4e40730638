from typing import List, Optional

from pydantic import BaseModel, ConfigDict, Field

from schemas.dictionary import DictionaryConfigSchema
from schemas.network import NetworkConfigSchema, TrainerConfigSchema
from schemas.penet import Phase3ConfigSchema, PENetConfigSchema
from schemas.scenes import SceneConfigSchema


class PathsSchema(BaseModel):
    scenes_dir: Optional[str] = None
    out_dir: Optional[str] = None
    checkpoint_dir: Optional[str] = None
    penet_dir: Optional[str] = None

    model_config = ConfigDict(frozen=True)


class RunConfigSchema(BaseModel):
    dictionary: DictionaryConfigSchema = Field(
        default_factory=DictionaryConfigSchema
    )
    network: NetworkConfigSchema = Field(default_factory=NetworkConfigSchema)
    trainer: TrainerConfigSchema = Field(default_factory=TrainerConfigSchema)
    penet: PENetConfigSchema = Field(default_factory=PENetConfigSchema)
    penet_trainer: TrainerConfigSchema = Field(
        default_factory=lambda: TrainerConfigSchema(
            learning_rate=1e-4, momentum=0.9, weight_decay=0.0, epochs=50
        )
    )
    phase3: Phase3ConfigSchema = Field(default_factory=Phase3ConfigSchema)
    scenes: SceneConfigSchema = Field(default_factory=SceneConfigSchema)
    num_scenes: int = Field(20, ge=1)
    seeds: List[int] = Field(default_factory=lambda: [0])
    paths: PathsSchema = Field(default_factory=PathsSchema)

    model_config = ConfigDict(frozen=True, extra="forbid")
