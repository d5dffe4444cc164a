"""
Crane geometry and pose models.

Coordinates follow the boom plane of the crane: x horizontal (outward), y
vertical (up). Joint 1 rotates the boom about the base pivot, joint 2 rotates
the jib about the boom tip, joint 3 extends the telescopic section along the
jib axis.
"""
import math
from typing import List, Optional, Tuple

from pydantic import AliasChoices, BaseModel, ConfigDict, Field, field_validator, model_validator


JOINT_NAMES = ("theta1", "theta2", "x_prism")
REVOLUTE_JOINTS = (0, 1)
PRISMATIC_JOINT = 2


class CylinderGeometry(BaseModel):
    """Hydraulic cylinder dimensions (one equivalent actuator)."""

    model_config = ConfigDict(frozen=True)

    piston_diameter: float = Field(..., gt=0, description="Piston diameter (m)")
    rod_diameter: float = Field(..., gt=0, description="Rod diameter (m)")
    stroke: float = Field(..., gt=0, description="Stroke of one cylinder (m)")
    count: int = Field(default=1, ge=1, description="Identical serially connected cylinders")

    @model_validator(mode="after")
    def check_rod(self) -> "CylinderGeometry":
        if self.rod_diameter >= self.piston_diameter:
            raise ValueError("rod_diameter must be smaller than piston_diameter")
        return self

    @property
    def area_A(self) -> float:
        """Piston-side area (m²)."""
        return math.pi / 4.0 * self.piston_diameter ** 2

    @property
    def area_B(self) -> float:
        """Rod-side annulus area (m²)."""
        return math.pi / 4.0 * (self.piston_diameter ** 2 - self.rod_diameter ** 2)


class CylinderLinkage(BaseModel):
    """Two-pin triangle linkage driving a revolute joint."""

    model_config = ConfigDict(frozen=True)

    a: float = Field(..., gt=0, description="Pivot to cylinder base (m)")
    b: float = Field(..., gt=0, description="Pivot to rod attachment (m)")
    theta0: float = Field(..., description="Mount phase offset (rad)")
    geometry: CylinderGeometry

    def length(self, theta: float) -> float:
        """Cylinder length C(theta) = sqrt(a² + b² - 2ab·cos(theta + theta0))."""
        phi = theta + self.theta0
        squared = self.a ** 2 + self.b ** 2 - 2.0 * self.a * self.b * math.cos(phi)
        return math.sqrt(max(squared, 0.0))


class WeightComponent(BaseModel):
    """A point mass rigidly attached to one link."""

    model_config = ConfigDict(frozen=True)

    name: str = Field(default="")
    mass: float = Field(..., ge=0, description="kg")
    link: int = Field(..., ge=1, le=3, description="Owning link (1, 2 or 3)")
    offset: Tuple[float, float] = Field(..., description="CG offset in the owning link frame (m)")


class CraneGeometry(BaseModel):
    """Planar loader crane: revolute boom, revolute jib, prismatic extension."""

    model_config = ConfigDict(frozen=True, populate_by_name=True)

    link_lengths: Tuple[float, float, float] = Field(
        ...,
        description="Boom length, jib length and retracted extension length (m)"
    )
    weight_components: List[WeightComponent] = Field(
        default_factory=list,
        validation_alias=AliasChoices("weight_components", "weights")
    )
    load_mass: Optional[float] = Field(default=None, ge=0, description="End-effector load (kg)")
    linkages: Tuple[CylinderLinkage, CylinderLinkage]
    prism_cylinder: CylinderGeometry
    joint_limits: Tuple[Tuple[float, float], Tuple[float, float], Tuple[float, float]]

    @field_validator("link_lengths")
    @classmethod
    def check_lengths(cls, v: Tuple[float, float, float]) -> Tuple[float, float, float]:
        if any(length <= 0 for length in v):
            raise ValueError("all link lengths must be positive")
        return v

    @model_validator(mode="after")
    def check_limits_and_gains(self) -> "CraneGeometry":
        for name, (lo, hi) in zip(JOINT_NAMES, self.joint_limits):
            if not lo < hi:
                raise ValueError(f"joint limits of {name} must satisfy lo < hi")

        # Linkage gain a*b*sin(theta+theta0)/C is positive only while 0 < theta+theta0 < pi.
        for joint, linkage in zip(REVOLUTE_JOINTS, self.linkages):
            lo, hi = self.joint_limits[joint]
            if lo + linkage.theta0 <= 0.0 or hi + linkage.theta0 >= math.pi:
                raise ValueError(
                    f"linkage gain of {JOINT_NAMES[joint]} is not strictly positive "
                    f"over [{lo}, {hi}] with theta0={linkage.theta0}"
                )
            travel = linkage.length(hi) - linkage.length(lo)
            available = linkage.geometry.stroke * linkage.geometry.count
            if travel > available + 1e-9:
                raise ValueError(
                    f"cylinder of {JOINT_NAMES[joint]} needs {travel:.4f} m travel, "
                    f"stroke allows {available:.4f} m"
                )

        lo, hi = self.joint_limits[PRISMATIC_JOINT]
        if lo < 0.0:
            raise ValueError("prismatic extension cannot be negative")
        available = self.prism_cylinder.stroke * self.prism_cylinder.count
        if hi - lo > available + 1e-9:
            raise ValueError(f"prismatic travel {hi - lo} m exceeds stroke {available} m")
        return self

    @property
    def prism_base_len(self) -> float:
        """Length of the extension link at zero extension (m)."""
        return self.link_lengths[2]

    def cylinder(self, actuator_id: int) -> CylinderGeometry:
        """Cylinder of actuator 1, 2 (revolute drives) or 3 (prismatic set)."""
        if actuator_id in (1, 2):
            return self.linkages[actuator_id - 1].geometry
        if actuator_id == 3:
            return self.prism_cylinder
        raise ValueError(f"unknown actuator {actuator_id}")

    def with_extra_weights(self, extra: List[WeightComponent]) -> "CraneGeometry":
        """Copy of this geometry with additional weight components."""
        return self.model_copy(update={"weight_components": list(self.weight_components) + list(extra)})


class JointState(BaseModel):
    """Crane pose (theta1 rad, theta2 rad, x_prism m)."""

    model_config = ConfigDict(frozen=True)

    theta1: float
    theta2: float
    x_prism: float

    def as_tuple(self) -> Tuple[float, float, float]:
        return (self.theta1, self.theta2, self.x_prism)


class JointVelocity(BaseModel):
    """Joint rates (rad/s, rad/s, m/s)."""

    model_config = ConfigDict(frozen=True)

    dtheta1: float
    dtheta2: float
    dx_prism: float

    @model_validator(mode="after")
    def check_finite(self) -> "JointVelocity":
        if not all(math.isfinite(v) for v in (self.dtheta1, self.dtheta2, self.dx_prism)):
            raise ValueError("joint velocities must be finite")
        return self

    def as_tuple(self) -> Tuple[float, float, float]:
        return (self.dtheta1, self.dtheta2, self.dx_prism)


class CranePoints(BaseModel):
    """Base-frame positions of the end effector and every center of gravity."""

    model_config = ConfigDict(frozen=True)

    end_effector: Tuple[float, float]
    cg_positions: List[Tuple[float, float]]


class GeneralizedForce(BaseModel):
    """Gravity force applied at a center of gravity."""

    model_config = ConfigDict(frozen=True)

    fx: float = 0.0
    fy: float

    @model_validator(mode="after")
    def check_gravity_only(self) -> "GeneralizedForce":
        if self.fx != 0.0 or self.fy > 0.0:
            raise ValueError("gravity force must point straight down")
        return self


class JointTorques(BaseModel):
    """Gravity generalized forces on the joints (N·m, N·m, N)."""

    model_config = ConfigDict(frozen=True)

    tau1: float
    tau2: float
    f_prism: float

    def as_tuple(self) -> Tuple[float, float, float]:
        return (self.tau1, self.tau2, self.f_prism)


class ActuatorForces(BaseModel):
    """
    Static cylinder reaction forces (N), one per actuator.

    Positive values oppose extension: the pump has to push against them on the
    piston side to extend the cylinder.
    """

    model_config = ConfigDict(frozen=True)

    forces: Tuple[float, float, float]

    def __getitem__(self, actuator_id: int) -> float:
        return self.forces[actuator_id - 1]
