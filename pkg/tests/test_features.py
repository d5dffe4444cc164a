"""
Tests for featurization of joint-state logs.
"""
import numpy as np
import pytest

from hydrotwin.errors import DomainError, TimingError
from hydrotwin.models.geometry import JointState
from hydrotwin.models.signals import ACTUATOR_IDS, Direction, FilterSpec, SignalLog
from hydrotwin.services.crane_kinematics import actuator_gain
from hydrotwin.services.features import featurize, geometry_hash
from hydrotwin.services.flow_model import meter_in_flow, sg_derivative
from hydrotwin.services.load_dynamics import cylinder_reaction_forces


def test_featurize_is_deterministic(mixed_log, geometry):
    first = featurize(mixed_log, geometry)
    second = featurize(mixed_log, geometry)

    assert first.frame.equals(second.frame)
    assert first.geometry_hash == geometry_hash(geometry)


def test_still_log_has_no_flow(still_log, geometry):
    table = featurize(still_log, geometry)

    for actuator_id in ACTUATOR_IDS:
        assert np.all(table.values(actuator_id, "q_flow") == 0.0)
        assert np.all(table.values(actuator_id, "direction") == Direction.HOLD.value)
        assert np.all(table.values(actuator_id, "p_work") == 0.0)


def test_features_compose_per_sample(mixed_log, geometry):
    spec = FilterSpec(dt=mixed_log.dt)
    table = featurize(mixed_log, geometry, spec, 1e-3)
    states = mixed_log.joint_states
    rates = np.column_stack([sg_derivative(states[:, j], spec) for j in range(3)])

    for k in (0, 37, 120, 260, len(mixed_log) - 1):
        q = JointState(theta1=states[k, 0], theta2=states[k, 1], x_prism=states[k, 2])
        forces = cylinder_reaction_forces(geometry, q)
        for actuator_id in ACTUATOR_IDS:
            xdot = actuator_gain(geometry, actuator_id, q) * rates[k, actuator_id - 1]
            flow = meter_in_flow(geometry.cylinder(actuator_id), xdot, 1e-3)
            assert table.values(actuator_id, "q_flow")[k] == flow.q
            assert table.values(actuator_id, "direction")[k] == flow.direction.value
            assert table.values(actuator_id, "f_static")[k] == forces[actuator_id]


def test_working_target_follows_direction(mixed_log, geometry):
    table = featurize(mixed_log, geometry)
    p_a, p_b = mixed_log.side_pressures(2)
    direction = table.values(2, "direction")
    p_work = table.values(2, "p_work")

    extend = direction == Direction.EXTEND.value
    retract = direction == Direction.RETRACT.value
    assert extend.any() and retract.any()
    np.testing.assert_array_equal(p_work[extend], p_a[extend])
    np.testing.assert_array_equal(p_work[retract], p_b[retract])
    assert np.all(p_work[~extend & ~retract] == 0.0)


def test_deadband_change_is_local(mixed_log, geometry):
    narrow = featurize(mixed_log, geometry, epsilon=1e-3)
    wide = featurize(mixed_log, geometry, epsilon=5e-3)

    for actuator_id in ACTUATOR_IDS:
        xdot = narrow.values(actuator_id, "xdot")
        between = (np.abs(xdot) > 1e-3) & (np.abs(xdot) <= 5e-3)
        changed = narrow.values(actuator_id, "direction") != wide.values(actuator_id, "direction")
        np.testing.assert_array_equal(changed, between)
        np.testing.assert_array_equal(narrow.values(actuator_id, "f_static"), wide.values(actuator_id, "f_static"))


def test_filter_dt_must_match_log(mixed_log, geometry):
    with pytest.raises(TimingError):
        featurize(mixed_log, geometry, FilterSpec(dt=0.01))


def test_out_of_limits_sample_is_named(mixed_log, geometry):
    frame = mixed_log.frame.copy()
    frame.loc[42, "theta2_rad"] = 1.0

    with pytest.raises(DomainError, match="sample 42"):
        featurize(SignalLog(dt=mixed_log.dt, frame=frame, name="bad"), geometry)
