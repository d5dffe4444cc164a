"""
Quasi-static LSPC crane simulator with a planted pressure law, and the five
standard experiments used for training and validation.
"""
import math
from typing import Dict, List, Tuple

import numpy as np
import pandas as pd
from scipy.optimize import brentq

from hydrotwin.errors import DomainError
from hydrotwin.models.geometry import (
    JOINT_NAMES,
    CraneGeometry,
    CylinderGeometry,
    CylinderLinkage,
    JointState,
    WeightComponent,
)
from hydrotwin.models.plant import (
    ActuatorLaw,
    CommandSchedule,
    NoiseSpec,
    ScheduleSegment,
    SyntheticPlantParams,
)
from hydrotwin.models.pressure import PumpModel
from hydrotwin.models.signals import (
    ACTUATOR_IDS,
    JOINT_COLUMNS,
    PUMP_COLUMN,
    TIME_COLUMN,
    SignalLog,
    pressure_columns,
)
from hydrotwin.services.crane_kinematics import actuator_gain
from hydrotwin.services.flow_model import meter_in_flow
from hydrotwin.services.load_dynamics import cylinder_reaction_forces
from hydrotwin.services.pressure_models import pump_demand, pump_pressure
from hydrotwin.utils.logger import logger


EXPERIMENTS = ("I", "II", "III", "IV", "V")


def default_geometry() -> CraneGeometry:
    """Three-actuator loader crane with distinct cylinder sizes (no external load)."""
    return CraneGeometry(
        link_lengths=(3.2, 2.6, 1.8),
        weight_components=[
            WeightComponent(name="boom", mass=1500.0, link=1, offset=(1.6, 0.15)),
            WeightComponent(name="jib", mass=900.0, link=2, offset=(1.3, 0.1)),
            WeightComponent(name="extension", mass=500.0, link=3, offset=(0.9, 0.0)),
        ],
        load_mass=None,
        linkages=(
            CylinderLinkage(
                a=0.6, b=1.6, theta0=0.5,
                geometry=CylinderGeometry(piston_diameter=0.16, rod_diameter=0.09, stroke=0.9),
            ),
            CylinderLinkage(
                a=0.5, b=1.2, theta0=2.3,
                geometry=CylinderGeometry(piston_diameter=0.125, rod_diameter=0.07, stroke=1.0),
            ),
        ),
        prism_cylinder=CylinderGeometry(piston_diameter=0.08, rod_diameter=0.05, stroke=1.0, count=2),
        joint_limits=((-0.2, 1.2), (-2.0, 0.3), (0.0, 2.0)),
    )


def default_plant() -> SyntheticPlantParams:
    """Default synthetic plant; the same numbers are in configs/default_plant.toml."""
    return SyntheticPlantParams(
        geometry=default_geometry(),
        actuators=(
            ActuatorLaw(
                k_F_extend=50.0, k_F_retract=73.0, k_Q=1.5e9, k_Q2=5e11, bias=1.0e6,
                viscous_friction=2e4, coulomb_friction=1500.0, margin=1.6e6,
            ),
            ActuatorLaw(
                k_F_extend=81.5, k_F_retract=119.0, k_Q=2e9, k_Q2=5e11, bias=0.5e6,
                viscous_friction=1.5e4, coulomb_friction=1000.0, margin=2.4e6,
            ),
            ActuatorLaw(
                k_F_extend=199.0, k_F_retract=326.0, k_Q=3e9, k_Q2=1e12, bias=2.5e6,
                viscous_friction=3e4, coulomb_friction=800.0, margin=2.0e6,
            ),
        ),
        leakage=2e-12,
        standby=2.0e6,
        back_pressure=0.8e6,
        bulk_modulus=1.4e9,
        velocity_time_constant=0.15,
        epsilon=1e-3,
        noise=NoiseSpec(pressure_std=125e3, angle_std=1e-4, position_std=2e-5),
        hidden_weights=[
            WeightComponent(name="boom hoses", mass=30.0, link=1, offset=(1.6, 0.15)),
            WeightComponent(name="jib hoses and oil", mass=20.0, link=2, offset=(1.3, 0.1)),
        ],
    )


# ---------------------------------------------------------------------------
# Planted pressure law
# ---------------------------------------------------------------------------

def planted_working_pressure(
    plant: SyntheticPlantParams,
    actuator_id: int,
    force: float,
    xdot: float,
    q_flow: float
) -> float:
    """
    Working-side pressure (Pa) of the planted law; 0 in hold.

    Args:
        plant: Plant parameters
        actuator_id: Actuator 1, 2 or 3
        force: True static reaction force (N, positive opposes extension)
        xdot: Piston speed (m/s)
        q_flow: Deadbanded meter-in flow (m³/s)
    """
    if q_flow == 0:
        return 0.0
    law = plant.actuators[actuator_id - 1]
    sign = 1.0 if q_flow > 0 else -1.0
    k_force = law.k_F_extend if sign > 0 else law.k_F_retract

    static_pressure = max(0.0, k_force * sign * force)
    q_eff = abs(q_flow) + plant.leakage * static_pressure
    value = (
        k_force * (sign * force + law.coulomb_friction + law.viscous_friction * abs(xdot))
        + law.k_Q * q_eff
        + law.k_Q2 * q_eff ** 2
        + law.bias
    )
    return max(0.0, value)


def planted_side_pressures(
    plant: SyntheticPlantParams,
    actuator_id: int,
    force: float,
    xdot: float,
    q_flow: float
) -> Tuple[float, float, float]:
    """
    Chamber pressures (p_A, p_B) and the working pressure.

    The return side sits at the back pressure; in hold the piston side
    balances the static force against it.
    """
    cyl = plant.geometry.cylinder(actuator_id)
    back = plant.back_pressure
    working = planted_working_pressure(plant, actuator_id, force, xdot, q_flow)
    if q_flow > 0:
        return working, back, working
    if q_flow < 0:
        return back, working, working
    return max(0.0, (force + back * cyl.area_B) / cyl.area_A), back, 0.0


def _true_working_pressure(
    plant: SyntheticPlantParams,
    q: JointState,
    actuator_id: int,
    joint_rate: float
) -> float:
    forces = cylinder_reaction_forces(plant.true_geometry, q)
    xdot = actuator_gain(plant.geometry, actuator_id, q) * joint_rate
    flow = meter_in_flow(plant.geometry.cylinder(actuator_id), xdot, plant.epsilon)
    return planted_working_pressure(plant, actuator_id, forces[actuator_id], xdot, flow.q)


# ---------------------------------------------------------------------------
# Simulation
# ---------------------------------------------------------------------------

def _commands(sched: CommandSchedule, dt: float) -> Tuple[np.ndarray, List[str]]:
    velocities: List[Tuple[float, float, float]] = []
    labels: List[str] = []
    for segment in sched.segments:
        count = max(1, int(round(segment.duration / dt)))
        velocities.extend([segment.velocity] * count)
        labels.extend([segment.label] * count)
    return np.array(velocities, dtype=float), labels


def _integrate(
    plant: SyntheticPlantParams,
    sched: CommandSchedule,
    dt: float
) -> Tuple[np.ndarray, np.ndarray, List[str], List[str]]:
    """Joint positions and velocities per sample, clipping at the joint limits."""
    commands, labels = _commands(sched, dt)
    n = len(commands)
    limits = np.array(plant.geometry.joint_limits)
    tau = plant.velocity_time_constant
    gain = 1.0 - math.exp(-dt / tau) if tau > 0 else 1.0

    positions = np.empty((n, 3))
    velocities = np.empty((n, 3))
    clipped_counts = np.zeros(3, dtype=int)
    first_clip = [None, None, None]

    position = np.array(sched.initial.as_tuple(), dtype=float)
    start = np.clip(position, limits[:, 0], limits[:, 1])
    warnings: List[str] = []
    if np.any(start != position):
        warnings.append(f"initial pose {position.tolist()} clipped to joint limits")
        position = start
    velocity_prev = np.zeros(3)

    for k in range(n):
        velocity = velocity_prev + gain * (commands[k] - velocity_prev)
        if k > 0:
            position = position + 0.5 * dt * (velocity_prev + velocity)
            outside = (position < limits[:, 0]) | (position > limits[:, 1])
            if np.any(outside):
                position = np.clip(position, limits[:, 0], limits[:, 1])
                velocity = np.where(outside, 0.0, velocity)
                for j in np.flatnonzero(outside):
                    clipped_counts[j] += 1
                    if first_clip[j] is None:
                        first_clip[j] = k * dt
        positions[k] = position
        velocities[k] = velocity
        velocity_prev = velocity

    for j, name in enumerate(JOINT_NAMES):
        if clipped_counts[j]:
            warnings.append(
                f"joint {name} clipped at its limit on {clipped_counts[j]} samples "
                f"(first at t={first_clip[j]:.3f} s)"
            )
    return positions, velocities, labels, warnings


def simulate_trajectory(
    plant: SyntheticPlantParams,
    sched: CommandSchedule,
    dt: float = 0.02,
    seed: int = 0,
    name: str = ""
) -> SignalLog:
    """
    Simulate a command schedule and record noisy sensor signals.

    Joint velocities follow the commands through a first-order lag and are
    integrated trapezoidally. True forces include the hidden weights; side
    pressures follow the planted law and the pump composes the working
    pressures with the planted margins. Pre-noise values are kept as
    true_* metadata columns.

    Args:
        plant: Plant parameters
        sched: Command schedule
        dt: Sample period (s)
        seed: Noise seed
        name: Log name

    Returns:
        SignalLog with sensor columns, truth columns and segment labels
    """
    if not dt > 0:
        raise DomainError(f"dt must be positive, got {dt}")

    positions, velocities, labels, warnings = _integrate(plant, sched, dt)
    n = len(positions)
    pump_model = PumpModel(margins=plant.margins, standby=plant.standby)
    true_geometry = plant.true_geometry

    side_a = np.zeros((n, 3))
    side_b = np.zeros((n, 3))
    working = np.zeros((n, 3))
    flows = np.zeros((n, 3))
    speeds = np.zeros((n, 3))
    directions = np.empty((n, 3), dtype=object)
    pump = np.zeros(n)
    argmax = np.zeros(n, dtype=int)
    gap = np.zeros(n)

    for k in range(n):
        q = JointState(theta1=positions[k, 0], theta2=positions[k, 1], x_prism=positions[k, 2])
        forces = cylinder_reaction_forces(true_geometry, q)
        for actuator_id in ACTUATOR_IDS:
            j = actuator_id - 1
            xdot = actuator_gain(plant.geometry, actuator_id, q) * velocities[k, j]
            flow = meter_in_flow(plant.geometry.cylinder(actuator_id), xdot, plant.epsilon)
            p_a, p_b, p_work = planted_side_pressures(plant, actuator_id, forces[actuator_id], xdot, flow.q)
            side_a[k, j], side_b[k, j], working[k, j] = p_a, p_b, p_work
            flows[k, j] = flow.q
            speeds[k, j] = xdot
            directions[k, j] = flow.direction.value

        pump[k] = pump_pressure(pump_demand(list(working[k]), list(flows[k]), pump_model), pump_model)
        candidates = np.concatenate([[plant.standby], working[k] + np.array(plant.margins) * (flows[k] != 0)])
        winner = int(np.argmax(candidates[1:])) + 1
        argmax[k] = winner if candidates[winner] > plant.standby else 0
        ordered = np.sort(candidates)
        gap[k] = ordered[-1] - ordered[-2]

    rng = np.random.default_rng(seed)
    noise = plant.noise
    limits = np.array(plant.geometry.joint_limits)
    measured_joints = positions + np.column_stack([
        rng.normal(size=n) * noise.angle_std,
        rng.normal(size=n) * noise.angle_std,
        rng.normal(size=n) * noise.position_std,
    ])
    # Sensors saturate at the mechanical end stops.
    measured_joints = np.clip(measured_joints, limits[:, 0], limits[:, 1])

    frame = {TIME_COLUMN: np.arange(n) * dt}
    for j, column in enumerate(JOINT_COLUMNS):
        frame[column] = measured_joints[:, j]
    for actuator_id in ACTUATOR_IDS:
        j = actuator_id - 1
        column_a, column_b = pressure_columns(actuator_id)
        frame[column_a] = np.maximum(0.0, side_a[:, j] + rng.normal(size=n) * noise.pressure_std)
        frame[column_b] = np.maximum(0.0, side_b[:, j] + rng.normal(size=n) * noise.pressure_std)
    frame[PUMP_COLUMN] = np.maximum(0.0, pump + rng.normal(size=n) * noise.pressure_std)

    for actuator_id in ACTUATOR_IDS:
        j = actuator_id - 1
        frame[f"true_p_work_{actuator_id}_pa"] = working[:, j]
        frame[f"true_q_flow_{actuator_id}_m3s"] = flows[:, j]
        frame[f"true_xdot_{actuator_id}_ms"] = speeds[:, j]
        frame[f"true_direction_{actuator_id}"] = directions[:, j]
    frame["true_p_pump_pa"] = pump
    frame["true_demand_argmax"] = argmax
    frame["true_demand_gap_pa"] = gap
    frame["segment"] = labels

    for message in warnings:
        logger.warning(f"Simulation {name or 'trajectory'}: {message}")

    return SignalLog(dt=dt, frame=pd.DataFrame(frame), name=name, warnings=warnings)


# ---------------------------------------------------------------------------
# Experiment suite
# ---------------------------------------------------------------------------

def _segment(duration: float, velocity: Tuple[float, float, float], label: str) -> ScheduleSegment:
    return ScheduleSegment(duration=duration, velocity=velocity, label=label)


def _pose_after(initial: JointState, segments: List[ScheduleSegment]) -> JointState:
    """Pose reached by the commanded velocities, ignoring the lag."""
    position = np.array(initial.as_tuple())
    for segment in segments:
        position = position + segment.duration * np.array(segment.velocity)
    return JointState(theta1=position[0], theta2=position[1], x_prism=position[2])


def balanced_prism_speed(plant: SyntheticPlantParams, pose: JointState, boom_rate: float) -> float:
    """
    Extension speed (m/s) at which the prismatic working pressure equals the
    boom's working pressure at the given pose and boom rate.
    """
    target = _true_working_pressure(plant, pose, 1, boom_rate)

    def difference(speed: float) -> float:
        return _true_working_pressure(plant, pose, 3, speed) - target

    low = 2.0 * plant.epsilon
    try:
        return float(brentq(difference, low, 0.5, xtol=1e-12))
    except ValueError:
        logger.warning("No prism speed balances the boom pressure; using 0.1 m/s")
        return 0.1


def suite_schedules(plant: SyntheticPlantParams) -> Dict[str, CommandSchedule]:
    """Command schedules of experiments I to V."""
    schedules: Dict[str, CommandSchedule] = {}

    # I: revolute joints only, extension fully retracted; includes jib lowering.
    schedules["I"] = CommandSchedule(
        initial=JointState(theta1=0.1, theta2=-1.0, x_prism=0.0),
        segments=[
            _segment(3.0, (0.04, 0.0, 0.0), "I-boom-up"),
            _segment(3.0, (0.0, 0.05, 0.0), "I-jib-up"),
            _segment(3.0, (0.03, 0.03, 0.0), "I-both-up"),
            _segment(3.0, (0.0, -0.06, 0.0), "I-jib-down"),
            _segment(3.0, (-0.04, 0.0, 0.0), "I-boom-down"),
            _segment(3.0, (0.05, 0.02, 0.0), "I-both-up-fast"),
            _segment(2.0, (0.0, 0.0, 0.0), "I-stop"),
        ],
    )

    # II: all actuators jointly, several speed levels, both extension directions.
    ii_velocities = [
        (0.03, 0.0, 0.0), (0.0, 0.04, 0.0), (0.0, 0.0, 0.05), (0.05, 0.03, 0.1),
        (0.0, 0.0, 0.15), (0.02, 0.0, 0.08), (-0.04, 0.0, 0.0), (0.0, -0.05, 0.0),
        (0.0, 0.0, -0.12), (0.06, 0.05, 0.02), (0.02, 0.0, 0.14), (0.0, 0.02, 0.1),
        (0.04, 0.0, -0.05), (-0.06, -0.03, -0.15), (0.03, 0.06, 0.06), (0.0, 0.0, 0.12),
        (0.05, 0.0, 0.0), (-0.05, -0.04, -0.1),
    ]
    schedules["II"] = CommandSchedule(
        initial=JointState(theta1=0.2, theta2=-1.2, x_prism=0.1),
        segments=[_segment(3.0, v, f"II-{i + 1}") for i, v in enumerate(ii_velocities)]
        + [_segment(2.0, (0.0, 0.0, 0.0), "II-stop")],
    )

    # III: jib alone, boom joins and takes over, boom alone.
    schedules["III"] = CommandSchedule(
        initial=JointState(theta1=0.3, theta2=-0.8, x_prism=0.0),
        segments=[
            _segment(4.0, (0.0, 0.05, 0.0), "III-A"),
            _segment(4.0, (0.05, 0.05, 0.0), "III-B"),
            _segment(4.0, (0.05, 0.0, 0.0), "III-C"),
            _segment(2.0, (0.0, 0.0, 0.0), "III-stop"),
        ],
    )

    # IV: jib alone, fast extension joins and takes over, extension alone.
    schedules["IV"] = CommandSchedule(
        initial=JointState(theta1=0.4, theta2=-1.0, x_prism=0.2),
        segments=[
            _segment(3.0, (0.0, 0.05, 0.0), "IV-A"),
            _segment(3.0, (0.0, 0.05, 0.12), "IV-B"),
            _segment(3.0, (0.0, 0.0, 0.12), "IV-C"),
            _segment(2.0, (0.0, 0.0, 0.0), "IV-stop"),
        ],
    )

    # V: extension, then boom, then extension again with nearly equal working pressures.
    v_initial = JointState(theta1=0.3, theta2=-0.9, x_prism=1.6)
    v_head = [
        _segment(4.0, (0.0, 0.0, -0.1), "V-A"),
        _segment(3.0, (0.06, 0.0, 0.02), "V-B"),
    ]
    slow_boom = 0.02
    prism_speed = balanced_prism_speed(plant, _pose_after(v_initial, v_head), slow_boom)
    logger.debug(f"Experiment V balanced extension speed {prism_speed:.4f} m/s")
    schedules["V"] = CommandSchedule(
        initial=v_initial,
        segments=v_head + [
            _segment(3.0, (slow_boom, 0.0, prism_speed), "V-C"),
            _segment(1.0, (0.0, 0.0, prism_speed), "V-D"),
            _segment(2.0, (0.0, 0.0, 0.0), "V-stop"),
        ],
    )
    return schedules


def experiment_suite(
    plant: SyntheticPlantParams,
    dt: float = 0.02,
    seed: int = 0
) -> Dict[str, SignalLog]:
    """
    Simulate experiments I to V.

    Args:
        plant: Plant parameters
        dt: Sample period (s)
        seed: Base seed; experiment k uses seed + k

    Returns:
        Logs keyed "I" ... "V"
    """
    schedules = suite_schedules(plant)
    logs = {}
    for index, name in enumerate(EXPERIMENTS):
        logger.info(f"Simulating experiment {name}")
        logs[name] = simulate_trajectory(plant, schedules[name], dt, seed + index, name=name)
    return logs


def zero_schedule(initial: JointState, duration: float = 2.0) -> CommandSchedule:
    """A schedule that keeps the crane still."""
    return CommandSchedule(initial=initial, segments=[_segment(duration, (0.0, 0.0, 0.0), "stop")])

