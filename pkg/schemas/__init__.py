from schemas.config import (
    ArchitectureConfig,
    DataConfig,
    LatentSpec,
    ResolvedRunConfig,
    RunConfig,
    SplitConfig,
    SwdSettings,
    SynthParams,
    TrainConfig,
)
from schemas.metrics import DistanceMatrix, MetricsRecord, PatchSet
from schemas.volume import Sample, SplitPlan, VoxelVolume

__all__ = [
    "ArchitectureConfig",
    "DataConfig",
    "DistanceMatrix",
    "LatentSpec",
    "MetricsRecord",
    "PatchSet",
    "ResolvedRunConfig",
    "RunConfig",
    "Sample",
    "SplitConfig",
    "SplitPlan",
    "SwdSettings",
    "SynthParams",
    "TrainConfig",
    "VoxelVolume",
]
