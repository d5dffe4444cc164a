"""
Synthetic plant parameters, command schedules and configuration files.
"""
from typing import List, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, model_validator

from hydrotwin.models.geometry import CraneGeometry, JointState, WeightComponent


class ActuatorLaw(BaseModel):
    """
    Planted quasi-static pressure law of one actuator.

    Working-side pressure while moving:
        max(0, k_F·(s·F + F_c + c_v·|xdot|) + k_Q·Q + k_Q2·Q² + bias)
    with s = +1 extending (k_F_extend) and s = -1 retracting (k_F_retract),
    Q the meter-in flow magnitude plus leakage.
    """

    model_config = ConfigDict(frozen=True)

    k_F_extend: float = Field(..., ge=0, description="Pa/N")
    k_F_retract: float = Field(..., ge=0, description="Pa/N")
    k_Q: float = Field(..., ge=0, description="Pa/(m³/s)")
    k_Q2: float = Field(..., ge=0, description="Pa/(m³/s)²")
    bias: float = Field(..., ge=0, description="Pa")
    viscous_friction: float = Field(default=0.0, ge=0, description="N·s/m")
    coulomb_friction: float = Field(default=0.0, ge=0, description="N")
    margin: float = Field(..., ge=0, description="Planted pump margin (Pa)")


class NoiseSpec(BaseModel):
    """Gaussian sensor noise standard deviations."""

    model_config = ConfigDict(frozen=True)

    pressure_std: float = Field(default=125e3, ge=0, description="Pa")
    angle_std: float = Field(default=1e-4, ge=0, description="rad")
    position_std: float = Field(default=2e-5, ge=0, description="m")


class SyntheticPlantParams(BaseModel):
    """Everything the synthetic testbed needs to generate signal logs."""

    model_config = ConfigDict(frozen=True)

    geometry: CraneGeometry
    actuators: Tuple[ActuatorLaw, ActuatorLaw, ActuatorLaw]
    leakage: float = Field(default=0.0, ge=0, description="m³/(s·Pa)")
    standby: float = Field(default=2.0e6, ge=0, description="Pa")
    back_pressure: float = Field(default=0.8e6, ge=0, description="Return-side pressure (Pa)")
    bulk_modulus: float = Field(default=1.4e9, ge=0, description="Oil bulk modulus (Pa); not used by the quasi-static law")
    velocity_time_constant: float = Field(default=0.15, ge=0, description="First-order velocity lag (s)")
    epsilon: float = Field(default=1e-3, gt=0, description="Deadband of the planted activation (m/s)")
    noise: NoiseSpec = Field(default_factory=NoiseSpec)
    hidden_weights: List[WeightComponent] = Field(
        default_factory=list,
        description="Weights acting on the plant but missing from the featurization geometry"
    )

    @property
    def margins(self) -> List[float]:
        return [law.margin for law in self.actuators]

    @property
    def true_geometry(self) -> CraneGeometry:
        """Geometry including the hidden weights."""
        if not self.hidden_weights:
            return self.geometry
        return self.geometry.with_extra_weights(self.hidden_weights)


class ScheduleSegment(BaseModel):
    """Constant target joint velocities over a time window."""

    model_config = ConfigDict(frozen=True)

    duration: float = Field(..., gt=0, description="s")
    velocity: Tuple[float, float, float] = Field(..., description="rad/s, rad/s, m/s")
    label: str = ""


class CommandSchedule(BaseModel):
    """Piecewise-constant joint-velocity commands from an initial pose."""

    model_config = ConfigDict(frozen=True)

    initial: JointState
    segments: List[ScheduleSegment] = Field(..., min_length=1)

    @model_validator(mode="before")
    @classmethod
    def accept_initial_list(cls, data):
        if isinstance(data, dict) and isinstance(data.get("initial"), (list, tuple)):
            theta1, theta2, x_prism = data["initial"]
            data = {**data, "initial": {"theta1": theta1, "theta2": theta2, "x_prism": x_prism}}
        return data

    @property
    def duration(self) -> float:
        return sum(segment.duration for segment in self.segments)


class PlantConfig(BaseModel):
    """Contents of a configuration file: geometry plus optional plant section."""

    geometry: CraneGeometry
    plant: Optional[SyntheticPlantParams] = None
