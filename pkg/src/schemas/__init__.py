from schemas.dictionary import (
    NormalizationModeEnum,
    DictionaryConfigSchema,
    DictionaryMetadataSchema,
)
from schemas.network import (
    PaddingModeEnum,
    NetworkConfigSchema,
    TrainerConfigSchema,
)
from schemas.penet import (
    EncoderPathEnum,
    Phase3ModeEnum,
    PENetConfigSchema,
    Phase3ConfigSchema,
    PhaseReportSchema,
)
from schemas.reports import (
    TimingStatsSchema,
    BenchReportSchema,
    GradReportSchema,
    EvalReportSchema,
    CheckpointManifestSchema,
    ExperimentReportSchema,
    TrainReportSchema,
)
from schemas.scenes import SceneConfigSchema, SceneMetadataSchema
from schemas.run import PathsSchema, RunConfigSchema
