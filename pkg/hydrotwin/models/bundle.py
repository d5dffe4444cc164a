"""
Serialized model bundle (format version 1).
"""
from typing import Dict, List

from pydantic import BaseModel, Field

from hydrotwin.models.pressure import GPHyperparameters, PumpModel, ScalerParams
from hydrotwin.models.signals import FilterSpec


BUNDLE_FORMAT_VERSION = 1


class GPRecord(BaseModel):
    """Everything needed to rebuild a GPModel exactly."""

    hyper: GPHyperparameters
    input_scaler: ScalerParams
    output_scaler: ScalerParams
    train_inputs: List[List[float]] = Field(..., description="Standardized training inputs")
    train_targets: List[float] = Field(..., description="Standardized training targets")


class WorkingPressureRecord(BaseModel):
    """Both direction GPs of one actuator."""

    actuator_id: int = Field(..., ge=1, le=3)
    epsilon: float = Field(..., gt=0)
    extend: GPRecord
    retract: GPRecord


class BundleMetadata(BaseModel):
    """Creation metadata. Carries no wall-clock timestamps."""

    package_version: str
    seed: int
    training_logs: List[str] = Field(default_factory=list)
    row_counts: Dict[str, Dict[str, int]] = Field(
        default_factory=dict,
        description="Training rows per actuator and partition before decimation"
    )
    identifiable: List[bool] = Field(default_factory=list)


class ModelBundle(BaseModel):
    """Working-pressure models, pump model and the geometry they were trained with."""

    format_version: int = BUNDLE_FORMAT_VERSION
    geometry_hash: str
    training_fingerprint: str
    epsilon: float = Field(..., gt=0)
    filter_window: int
    filter_order: int
    actuators: List[WorkingPressureRecord]
    pump: PumpModel
    metadata: BundleMetadata

    def filter_spec(self, dt: float) -> FilterSpec:
        """The training filter at a log's sample period."""
        return FilterSpec(window=self.filter_window, poly_order=self.filter_order, dt=dt)
