"""
Planar forward kinematics, point Jacobians and cylinder linkage mappings.
"""
import math
from typing import List, Optional, Tuple, Union

import numpy as np

from hydrotwin.errors import ConfigError, DomainError, RangeError
from hydrotwin.models.geometry import (
    JOINT_NAMES,
    CraneGeometry,
    CranePoints,
    CylinderLinkage,
    JointState,
)


END_EFFECTOR = "end_effector"
LIMIT_TOLERANCE = 1e-9
RANGE_TOLERANCE = 1e-9

PointSelector = Union[str, int]


def check_limits(geom: CraneGeometry, q: JointState) -> None:
    """
    Raise DomainError if any coordinate of q is non-finite or outside its limits.

    Args:
        geom: Crane geometry
        q: Joint state
    """
    for name, value, (lo, hi) in zip(JOINT_NAMES, q.as_tuple(), geom.joint_limits):
        if not math.isfinite(value):
            raise DomainError(f"joint {name} is not finite: {value}")
        if value < lo - LIMIT_TOLERANCE or value > hi + LIMIT_TOLERANCE:
            raise DomainError(f"joint {name}={value:.6g} outside limits [{lo}, {hi}]")


def _frames(geom: CraneGeometry, q: JointState) -> Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Frame origins o1, o2, o3 and the unit axes u1, u12."""
    l1, l2, _ = geom.link_lengths
    theta12 = q.theta1 + q.theta2
    u1 = np.array([math.cos(q.theta1), math.sin(q.theta1)])
    u12 = np.array([math.cos(theta12), math.sin(theta12)])
    o1 = np.zeros(2)
    o2 = l1 * u1
    o3 = o2 + (l2 + q.x_prism) * u12
    return o1, o2, o3, u1, u12


def _local_to_base(origin: np.ndarray, axis: np.ndarray, offset: Tuple[float, float]) -> np.ndarray:
    dx, dy = offset
    normal = np.array([-axis[1], axis[0]])
    return origin + dx * axis + dy * normal


def _point_and_link(
    geom: CraneGeometry,
    q: JointState,
    point: PointSelector
) -> Tuple[np.ndarray, int]:
    o1, o2, o3, u1, u12 = _frames(geom, q)

    if isinstance(point, str):
        if point != END_EFFECTOR:
            raise ConfigError(f"unknown point selector '{point}'")
        return o3 + geom.prism_base_len * u12, 3

    if isinstance(point, (int, np.integer)) and not isinstance(point, bool):
        index = int(point)
        if 0 <= index < len(geom.weight_components):
            component = geom.weight_components[index]
            origin, axis = {1: (o1, u1), 2: (o2, u12), 3: (o3, u12)}[component.link]
            return _local_to_base(origin, axis, component.offset), component.link
        if index == len(geom.weight_components) and geom.load_mass is not None:
            # The load hangs at the end effector.
            return o3 + geom.prism_base_len * u12, 3

    raise ConfigError(f"unknown point selector {point!r}")


def forward_kinematics(geom: CraneGeometry, q: JointState) -> CranePoints:
    """
    Compute end-effector and CG positions in the base frame.

    Args:
        geom: Crane geometry
        q: Joint state within limits

    Returns:
        CranePoints with one CG per weight component, plus the load if present
    """
    check_limits(geom, q)

    end_effector, _ = _point_and_link(geom, q, END_EFFECTOR)
    cg_positions: List[Tuple[float, float]] = []
    for index in range(len(geom.weight_components) + (geom.load_mass is not None)):
        position, _ = _point_and_link(geom, q, index)
        cg_positions.append((float(position[0]), float(position[1])))

    return CranePoints(
        end_effector=(float(end_effector[0]), float(end_effector[1])),
        cg_positions=cg_positions
    )


def jacobian_point(geom: CraneGeometry, q: JointState, point: PointSelector) -> np.ndarray:
    """
    Point Jacobian (2×3) mapping joint rates to the point's planar velocity.

    Args:
        geom: Crane geometry
        q: Joint state within limits
        point: "end_effector", or an index into the CG list of forward_kinematics

    Returns:
        Matrix with columns for theta1 (m/rad), theta2 (m/rad) and x_prism (m/m)
    """
    check_limits(geom, q)

    position, link = _point_and_link(geom, q, point)
    _, o2, _, _, u12 = _frames(geom, q)

    jacobian = np.zeros((2, 3))
    jacobian[:, 0] = (-position[1], position[0])
    if link >= 2:
        jacobian[:, 1] = (-(position[1] - o2[1]), position[0] - o2[0])
    if link == 3:
        jacobian[:, 2] = u12
    return jacobian


def cylinder_length(linkage: CylinderLinkage, theta: float) -> float:
    """Cylinder length of a revolute drive at joint angle theta (m)."""
    return linkage.length(theta)


def joint_angle_from_length(
    linkage: CylinderLinkage,
    x_p: float,
    limits: Optional[Tuple[float, float]] = None
) -> float:
    """
    Invert the linkage mapping.

    Args:
        linkage: Cylinder linkage
        x_p: Cylinder length (m)
        limits: Joint limits; when given, x_p must lie in [C(lo), C(hi)]

    Returns:
        Joint angle (rad)
    """
    a, b = linkage.a, linkage.b
    if not math.isfinite(x_p) or not abs(a - b) < x_p < a + b:
        raise RangeError(f"cylinder length {x_p} outside ({abs(a - b)}, {a + b})")

    if limits is not None:
        shortest = cylinder_length(linkage, limits[0])
        longest = cylinder_length(linkage, limits[1])
        if x_p < shortest - RANGE_TOLERANCE or x_p > longest + RANGE_TOLERANCE:
            raise RangeError(
                f"cylinder length {x_p} outside stroke-feasible interval [{shortest}, {longest}]"
            )

    cosine = (a ** 2 + b ** 2 - x_p ** 2) / (2.0 * a * b)
    return math.acos(min(1.0, max(-1.0, cosine))) - linkage.theta0


def linkage_gain(linkage: CylinderLinkage, theta: float) -> float:
    """dC/dtheta = a·b·sin(theta + theta0) / C(theta), in m/rad."""
    length = cylinder_length(linkage, theta)
    if length == 0.0:
        return 0.0
    return linkage.a * linkage.b * math.sin(theta + linkage.theta0) / length


def cylinder_speed(linkage: CylinderLinkage, theta: float, dtheta: float) -> float:
    """Piston speed (m/s) produced by the joint rate dtheta (rad/s)."""
    return linkage_gain(linkage, theta) * dtheta


def actuator_gain(geom: CraneGeometry, actuator_id: int, q: JointState) -> float:
    """Linkage gain of actuator 1 or 2; the prismatic set is direct drive (gain 1)."""
    if actuator_id == 3:
        return 1.0
    return linkage_gain(geom.linkages[actuator_id - 1], q.as_tuple()[actuator_id - 1])


def actuator_position(geom: CraneGeometry, actuator_id: int, q: JointState) -> float:
    """Cylinder length of actuator 1 or 2, or the extension of the prismatic set (m)."""
    if actuator_id == 3:
        return q.x_prism
    return cylinder_length(geom.linkages[actuator_id - 1], q.as_tuple()[actuator_id - 1])
