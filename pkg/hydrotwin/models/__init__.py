"""Models package initialization."""
from .geometry import (
    CylinderGeometry,
    CylinderLinkage,
    WeightComponent,
    CraneGeometry,
    JointState,
    JointVelocity,
    CranePoints,
    GeneralizedForce,
    JointTorques,
    ActuatorForces
)

from .signals import (
    Direction,
    FlowSample,
    FilterSpec,
    SignalLog,
    FeatureTable
)

from .pressure import (
    GPHyperparameters,
    ScalerParams,
    GPFitOptions,
    PumpModel,
    PumpFitResult,
    DirectionPartition,
    DirectionedDataset
)

from .plant import (
    ActuatorLaw,
    NoiseSpec,
    SyntheticPlantParams,
    ScheduleSegment,
    CommandSchedule,
    PlantConfig
)

from .bundle import BUNDLE_FORMAT_VERSION, GPRecord, WorkingPressureRecord, BundleMetadata, ModelBundle
from .reports import PipelineStage, TrainingReport, EvaluationReport, LogEvaluation, ActuatorMetrics
from .run_config import Subcommand, RunConfig

__all__ = [
    # Crane model
    'CylinderGeometry',
    'CylinderLinkage',
    'WeightComponent',
    'CraneGeometry',
    'JointState',
    'JointVelocity',
    'CranePoints',
    'GeneralizedForce',
    'JointTorques',
    'ActuatorForces',
    # Signals
    'Direction',
    'FlowSample',
    'FilterSpec',
    'SignalLog',
    'FeatureTable',
    # Pressure models
    'GPHyperparameters',
    'ScalerParams',
    'GPFitOptions',
    'PumpModel',
    'PumpFitResult',
    'DirectionPartition',
    'DirectionedDataset',
    # Synthetic plant
    'ActuatorLaw',
    'NoiseSpec',
    'SyntheticPlantParams',
    'ScheduleSegment',
    'CommandSchedule',
    'PlantConfig',
    # Persistence and reports
    'BUNDLE_FORMAT_VERSION',
    'GPRecord',
    'WorkingPressureRecord',
    'BundleMetadata',
    'ModelBundle',
    'PipelineStage',
    'TrainingReport',
    'EvaluationReport',
    'LogEvaluation',
    'ActuatorMetrics',
    'Subcommand',
    'RunConfig'
]
