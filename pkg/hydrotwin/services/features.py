"""
Featurization: joint-state logs to per-actuator flow, force and pressure features.
"""
from typing import Optional

import numpy as np
import pandas as pd

from hydrotwin.errors import HydroTwinError, TimingError
from hydrotwin.models.geometry import CraneGeometry, JointState
from hydrotwin.models.signals import (
    ACTUATOR_IDS,
    PUMP_COLUMN,
    TIME_COLUMN,
    Direction,
    FeatureTable,
    FilterSpec,
    SignalLog,
    feature_columns,
)
from hydrotwin.services.crane_kinematics import actuator_gain, actuator_position
from hydrotwin.services.flow_model import DEFAULT_EPSILON, meter_in_flow, sg_derivative
from hydrotwin.services.load_dynamics import cylinder_reaction_forces, total_force
from hydrotwin.utils.file_utils import get_text_hash
from hydrotwin.utils.logger import logger


def geometry_hash(geom: CraneGeometry) -> str:
    """SHA-256 of the canonical JSON form of a crane geometry."""
    return get_text_hash(geom.model_dump_json())


def featurize(
    log: SignalLog,
    geom: CraneGeometry,
    spec: Optional[FilterSpec] = None,
    epsilon: float = DEFAULT_EPSILON
) -> FeatureTable:
    """
    Derive model features for every sample and actuator.

    Joint rates come from Savitzky-Golay differentiation of the logged joint
    states; piston speeds, deadbanded meter-in flows and static reaction
    forces follow per sample. Working-pressure targets select the piston side
    while extending, the rod side while retracting and 0 in hold.

    Args:
        log: Signal log (pressures optional)
        geom: Crane geometry
        spec: Differentiation filter; defaults to window 11, order 3 at the log's dt
        epsilon: Velocity deadband (m/s)

    Returns:
        FeatureTable
    """
    spec = spec or FilterSpec(dt=log.dt)
    if abs(spec.dt - log.dt) > 1e-6 * log.dt:
        raise TimingError(f"filter dt {spec.dt} does not match log dt {log.dt}")

    states = log.joint_states
    rates = np.column_stack([sg_derivative(states[:, j], spec) for j in range(3)])
    n = len(log)
    with_pressures = log.has_pressures

    out = {TIME_COLUMN: log.time}
    buffers = {
        actuator_id: {key: np.full(n, np.nan) for key in ("xdot", "q_flow", "f_static", "p_work", "f_total", "x_p")}
        for actuator_id in ACTUATOR_IDS
    }
    directions = {actuator_id: np.empty(n, dtype=object) for actuator_id in ACTUATOR_IDS}
    sides = {actuator_id: log.side_pressures(actuator_id) for actuator_id in ACTUATOR_IDS} if with_pressures else {}

    for k in range(n):
        q = JointState(theta1=states[k, 0], theta2=states[k, 1], x_prism=states[k, 2])
        try:
            forces = cylinder_reaction_forces(geom, q)
            for actuator_id in ACTUATOR_IDS:
                cyl = geom.cylinder(actuator_id)
                xdot = actuator_gain(geom, actuator_id, q) * rates[k, actuator_id - 1]
                flow = meter_in_flow(cyl, xdot, epsilon)
                row = buffers[actuator_id]
                row["xdot"][k] = xdot
                row["q_flow"][k] = flow.q
                row["f_static"][k] = forces[actuator_id]
                row["x_p"][k] = actuator_position(geom, actuator_id, q)
                directions[actuator_id][k] = flow.direction.value

                if with_pressures:
                    p_a, p_b = sides[actuator_id][0][k], sides[actuator_id][1][k]
                    row["f_total"][k] = total_force(cyl, p_a, p_b)
                    if flow.direction == Direction.EXTEND:
                        row["p_work"][k] = p_a
                    elif flow.direction == Direction.RETRACT:
                        row["p_work"][k] = p_b
                    else:
                        row["p_work"][k] = 0.0
        except HydroTwinError as e:
            logger.error(f"Featurization of {log.name or 'log'} failed at sample {k}: {e}")
            raise type(e)(f"sample {k}: {e}") from e

    for actuator_id in ACTUATOR_IDS:
        names = feature_columns(actuator_id)
        for key, values in buffers[actuator_id].items():
            out[names[key]] = values
        out[names["direction"]] = directions[actuator_id]
    if with_pressures:
        out[PUMP_COLUMN] = log.pump_pressure

    table = FeatureTable(
        frame=pd.DataFrame(out),
        geometry_hash=geometry_hash(geom),
        filter=spec,
        epsilon=epsilon,
        source=log.name,
    )
    moving = {i: int(np.sum(directions[i] != Direction.HOLD.value)) for i in ACTUATOR_IDS}
    logger.info(f"Featurized {log.name or 'log'}: {n} samples, moving samples per actuator {moving}")
    return table
