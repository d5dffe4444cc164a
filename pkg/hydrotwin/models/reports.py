"""
Pipeline stages and the training / evaluation reports written by the CLI.
"""
from enum import Enum
from typing import Dict, List, Optional

from pydantic import BaseModel, Field

from hydrotwin.models.pressure import GPHyperparameters, PumpModel


class PipelineStage(str, Enum):
    """Pipeline run status."""
    PENDING = "pending"
    LOADING = "loading"
    FEATURIZING = "featurizing"
    TRAINING = "training"
    FITTING_PUMP = "fitting_pump"
    PREDICTING = "predicting"
    EVALUATING = "evaluating"
    WRITING = "writing"
    COMPLETED = "completed"
    FAILED = "failed"


class PartitionReport(BaseModel):
    """One direction GP of one actuator."""

    rows: int = Field(..., description="Rows before decimation")
    used_rows: int = Field(..., description="Rows the GP was fitted on")
    hyper: GPHyperparameters
    log_marginal_likelihood: float


class ActuatorTrainingReport(BaseModel):
    actuator_id: int
    extend: PartitionReport
    retract: PartitionReport


class TrainingReport(BaseModel):
    """Summary of a training run; free of timestamps so reruns compare equal."""

    training_logs: List[str]
    geometry_hash: str
    training_fingerprint: str
    seed: int
    epsilon: float
    filter_window: int
    filter_order: int
    actuators: List[ActuatorTrainingReport]
    pump: PumpModel
    standby_fitted: bool
    identifiable: List[bool]
    dominant_samples: List[int]
    pump_rmse: float = Field(..., description="Pa, on the training samples")


class ActuatorMetrics(BaseModel):
    """Working-pressure accuracy of one actuator on one log."""

    actuator_id: int
    moving_samples: int
    working_nrmse: Optional[float] = Field(None, description="Against the measured working pressure")
    working_rmse_truth: Optional[float] = Field(None, description="Pa, against pre-noise truth when logged")
    force_correlation: Optional[float] = Field(
        None, description="Pearson correlation of measured total force and static force over moving samples"
    )


class LogEvaluation(BaseModel):
    """Metrics of one evaluated log."""

    log: str
    samples: int
    actuators: List[ActuatorMetrics]
    pump_nrmse: Optional[float] = None
    pump_rmse_truth: Optional[float] = Field(None, description="Pa, against pre-noise pump pressure")
    argmax_accuracy: Optional[float] = Field(
        None, description="Fraction of samples with a clear demand gap where the dominating actuator matches"
    )
    argmax_samples: int = 0
    pump_energy_measured_j: float
    pump_energy_predicted_j: float
    throttling_energy_measured_j: float
    throttling_energy_predicted_j: float


class EvaluationReport(BaseModel):
    """Metrics of all evaluated logs."""

    geometry_hash: str
    argmax_min_gap: float = Field(..., description="Pa")
    logs: List[LogEvaluation]
    plots: Dict[str, List[str]] = Field(default_factory=dict)

    def by_log(self, name: str) -> LogEvaluation:
        for entry in self.logs:
            if entry.log == name:
                return entry
        raise KeyError(name)
