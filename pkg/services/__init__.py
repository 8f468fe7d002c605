from services.ablation_service import AblationService
from services.dataset_service import DatasetService, SampleSource
from services.report_service import ReportService
from services.sampling_service import SamplingService
from services.synth_service import SynthService
from services.training_service import TrainingService
from services.validation_service import ValidationService

__all__ = [
    "AblationService",
    "DatasetService",
    "ReportService",
    "SampleSource",
    "SamplingService",
    "SynthService",
    "TrainingService",
    "ValidationService",
]
