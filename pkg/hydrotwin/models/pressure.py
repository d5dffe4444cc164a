"""
Models for the Gaussian-process core and the pressure models.
"""
from dataclasses import dataclass
from typing import List

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator

from hydrotwin.errors import DimensionError, InsufficientDataError


class GPHyperparameters(BaseModel):
    """Squared-exponential ARD hyperparameters (standardized units)."""

    model_config = ConfigDict(frozen=True)

    lengthscales: List[float] = Field(..., min_length=1)
    signal_variance: float = Field(..., gt=0)
    noise_variance: float = Field(..., gt=0)

    @field_validator("lengthscales")
    @classmethod
    def check_lengthscales(cls, v: List[float]) -> List[float]:
        if any(not value > 0 for value in v):
            raise ValueError("lengthscales must be positive")
        return v

    def to_log_vector(self) -> np.ndarray:
        """[log l_1..l_d, log sigma_f², log sigma_n²]"""
        return np.log(np.array([*self.lengthscales, self.signal_variance, self.noise_variance]))

    @classmethod
    def from_log_vector(cls, theta: np.ndarray) -> "GPHyperparameters":
        values = np.exp(np.asarray(theta, dtype=float))
        return cls(
            lengthscales=[float(v) for v in values[:-2]],
            signal_variance=float(values[-2]),
            noise_variance=float(values[-1]),
        )


class ScalerParams(BaseModel):
    """Per-dimension mean and scale used for z-scoring."""

    model_config = ConfigDict(frozen=True)

    mean: List[float]
    scale: List[float]

    def transform(self, values: np.ndarray) -> np.ndarray:
        return (values - np.asarray(self.mean)) / np.asarray(self.scale)

    def inverse_transform(self, values: np.ndarray) -> np.ndarray:
        return values * np.asarray(self.scale) + np.asarray(self.mean)


class GPFitOptions(BaseModel):
    """Hyperparameter optimization settings."""

    restarts: int = Field(default=5, ge=1)
    max_iter: int = Field(default=200, ge=1)
    gtol: float = Field(default=1e-6, gt=0)
    seed: int = 0
    max_rows: int = Field(default=4000, ge=2)


class PumpModel(BaseModel):
    """Margin pressures per actuator and standby pressure (Pa)."""

    model_config = ConfigDict(frozen=True)

    margins: List[float] = Field(..., min_length=1)
    standby: float = Field(..., ge=0)

    @field_validator("margins")
    @classmethod
    def check_margins(cls, v: List[float]) -> List[float]:
        if any(not value >= 0 for value in v):
            raise ValueError("margins must be non-negative")
        return v


class PumpFitResult(BaseModel):
    """Fitted pump model with identifiability diagnostics."""

    pump: PumpModel
    identifiable: List[bool]
    dominant_samples: List[int] = Field(..., description="Samples where each actuator is the unique maximizer")
    rmse: float = Field(..., description="Pa")
    standby_fitted: bool


@dataclass(frozen=True)
class DirectionPartition:
    """Training rows of one motion direction: |q| (m³/s), F_static (N), pressure (Pa)."""

    q_flow: np.ndarray
    f_static: np.ndarray
    pressure: np.ndarray

    def __post_init__(self) -> None:
        if not (len(self.q_flow) == len(self.f_static) == len(self.pressure)):
            raise DimensionError("partition columns differ in length")

    @property
    def n_rows(self) -> int:
        return len(self.pressure)

    @property
    def inputs(self) -> np.ndarray:
        """(n, 2) model inputs."""
        return np.column_stack([self.q_flow, self.f_static])

    @classmethod
    def empty(cls) -> "DirectionPartition":
        return cls(np.zeros(0), np.zeros(0), np.zeros(0))

    @classmethod
    def concatenate(cls, parts: List["DirectionPartition"]) -> "DirectionPartition":
        if not parts:
            return cls.empty()
        return cls(
            np.concatenate([p.q_flow for p in parts]),
            np.concatenate([p.f_static for p in parts]),
            np.concatenate([p.pressure for p in parts]),
        )


@dataclass(frozen=True)
class DirectionedDataset:
    """Direction-partitioned training data of one actuator."""

    actuator_id: int
    extend: DirectionPartition
    retract: DirectionPartition

    def require(self, min_rows: int = 10) -> "DirectionedDataset":
        """Raise InsufficientDataError if either partition is too small."""
        for name, part in (("extend", self.extend), ("retract", self.retract)):
            if part.n_rows < min_rows:
                raise InsufficientDataError(self.actuator_id, name, part.n_rows, min_rows)
        return self
