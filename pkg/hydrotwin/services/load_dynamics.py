"""
Gravity joint torques by virtual work and static cylinder reaction forces.
"""
from typing import List

import numpy as np

from hydrotwin.errors import DomainError, SingularityError
from hydrotwin.models.geometry import (
    ActuatorForces,
    CraneGeometry,
    CylinderGeometry,
    CylinderLinkage,
    GeneralizedForce,
    JointState,
    JointTorques,
)
from hydrotwin.services.crane_kinematics import check_limits, jacobian_point, linkage_gain


GRAVITY = 9.81
MIN_GAIN = 1e-9


def gravity_forces(geom: CraneGeometry, gravity: float = GRAVITY) -> List[GeneralizedForce]:
    """Gravity force at every CG, in the order of forward_kinematics().cg_positions."""
    masses = [component.mass for component in geom.weight_components]
    if geom.load_mass is not None:
        masses.append(geom.load_mass)
    return [GeneralizedForce(fy=-mass * gravity) for mass in masses]


def joint_torques(geom: CraneGeometry, q: JointState, gravity: float = GRAVITY) -> JointTorques:
    """
    Accumulate the joint torques of all weight forces by virtual work.

    Each force contributes J(q)ᵀ·gamma, where J is the Jacobian of its point of
    application. The result is the generalized gravity force, so a boom held
    horizontally has a negative tau1.

    Args:
        geom: Crane geometry
        q: Joint state within limits
        gravity: Gravitational acceleration (m/s²)

    Returns:
        JointTorques (tau1 N·m, tau2 N·m, f_prism N)
    """
    check_limits(geom, q)

    total = np.zeros(3)
    for index, force in enumerate(gravity_forces(geom, gravity)):
        jacobian = jacobian_point(geom, q, index)
        total += jacobian.T @ np.array([force.fx, force.fy])

    return JointTorques(tau1=float(total[0]), tau2=float(total[1]), f_prism=float(total[2]))


def static_reaction_force(linkage: CylinderLinkage, theta: float, tau: float) -> float:
    """
    Map a joint torque onto the cylinder axis: F = tau / (dC/dtheta).

    Args:
        linkage: Cylinder linkage
        theta: Joint angle (rad)
        tau: Joint torque (N·m)

    Returns:
        Cylinder force (N)
    """
    gain = linkage_gain(linkage, theta)
    if gain < MIN_GAIN:
        raise SingularityError(f"linkage gain {gain:.3e} m/rad at theta={theta:.6g} is singular")
    return tau / gain


def cylinder_reaction_forces(
    geom: CraneGeometry,
    q: JointState,
    gravity: float = GRAVITY
) -> ActuatorForces:
    """
    Static reaction forces of all three actuators.

    The cylinders have to supply the holding torque -tau, so the forces are
    positive when the load compresses the cylinder.

    Args:
        geom: Crane geometry
        q: Joint state within limits
        gravity: Gravitational acceleration (m/s²)

    Returns:
        ActuatorForces with the prismatic set as actuator 3 (direct drive)
    """
    torques = joint_torques(geom, q, gravity)
    f1 = static_reaction_force(geom.linkages[0], q.theta1, -torques.tau1)
    f2 = static_reaction_force(geom.linkages[1], q.theta2, -torques.tau2)
    f3 = -torques.f_prism
    return ActuatorForces(forces=(f1, f2, f3))


def total_force(cyl: CylinderGeometry, p_A: float, p_B: float) -> float:
    """
    Net piston force from the two chamber pressures: p_A·A_A - p_B·A_B.

    Args:
        cyl: Cylinder geometry
        p_A: Piston-side pressure (Pa)
        p_B: Rod-side pressure (Pa)

    Returns:
        Force (N), positive in the extension direction
    """
    if p_A < 0 or p_B < 0:
        raise DomainError(f"pressures must be non-negative, got p_A={p_A}, p_B={p_B}")
    return p_A * cyl.area_A - p_B * cyl.area_B
