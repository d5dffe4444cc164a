"""
Tests for the synthetic crane plant and the experiment suite.
"""
import numpy as np
import pandas as pd
import pytest

from hydrotwin.errors import DomainError
from hydrotwin.models.geometry import JointState
from hydrotwin.models.signals import ACTUATOR_IDS, Direction, mandatory_columns
from hydrotwin.services.synthetic_plant import (
    EXPERIMENTS,
    _pose_after,
    _true_working_pressure,
    balanced_prism_speed,
    experiment_suite,
    planted_side_pressures,
    planted_working_pressure,
    simulate_trajectory,
    suite_schedules,
    zero_schedule,
)
from tests.conftest import schedule


def _truth(log, key, actuator_id=None):
    name = f"true_{key}_{actuator_id}" if actuator_id else f"true_{key}"
    suffix = {"p_work": "_pa", "q_flow": "_m3s", "xdot": "_ms", "direction": "", "p_pump": "_pa"}[key]
    return log.frame[name + suffix].to_numpy()


@pytest.fixture(scope="module")
def schedules(plant):
    return suite_schedules(plant)


def test_log_has_mandatory_and_truth_columns(mixed_log):
    for column in mandatory_columns(True):
        assert column in mixed_log.frame.columns
    for column in ("true_p_pump_pa", "true_demand_argmax", "true_demand_gap_pa", "segment"):
        assert column in mixed_log.metadata_columns
    assert mixed_log.dt == 0.02
    np.testing.assert_allclose(np.diff(mixed_log.time), 0.02)


def test_simulation_is_deterministic(plant, mixed_schedule, mixed_log):
    again = simulate_trajectory(plant, mixed_schedule, dt=0.02, seed=7, name="mixed")
    other = simulate_trajectory(plant, mixed_schedule, dt=0.02, seed=8, name="mixed")

    pd.testing.assert_frame_equal(again.frame, mixed_log.frame, check_exact=True)
    assert not np.array_equal(other.pump_pressure, mixed_log.pump_pressure)
    np.testing.assert_array_equal(_truth(other, "p_pump"), _truth(mixed_log, "p_pump"))


def test_still_crane_runs_at_standby(still_log, quiet_plant):
    for actuator_id in ACTUATOR_IDS:
        assert np.all(_truth(still_log, "q_flow", actuator_id) == 0.0)
        assert np.all(_truth(still_log, "p_work", actuator_id) == 0.0)
    np.testing.assert_array_equal(_truth(still_log, "p_pump"), quiet_plant.standby)
    np.testing.assert_array_equal(still_log.frame["true_demand_argmax"], 0)


def test_pump_dominates_every_active_demand(mixed_log, plant):
    pump = _truth(mixed_log, "p_pump")
    assert np.all(pump >= plant.standby)
    for actuator_id in ACTUATOR_IDS:
        flow = _truth(mixed_log, "q_flow", actuator_id)
        working = _truth(mixed_log, "p_work", actuator_id)
        direction = _truth(mixed_log, "direction", actuator_id)
        active = flow != 0
        assert np.all(pump[active] >= working[active] + plant.margins[actuator_id - 1] - 1e-6)
        np.testing.assert_array_equal(direction == Direction.HOLD.value, ~active)
        assert np.all(working[~active] == 0.0)


def test_measured_pressures_are_non_negative(mixed_log):
    for actuator_id in ACTUATOR_IDS:
        p_a, p_b = mixed_log.side_pressures(actuator_id)
        assert np.all(p_a >= 0) and np.all(p_b >= 0)
    assert np.all(mixed_log.pump_pressure >= 0)


def test_velocity_lag_reaches_command(quiet_plant):
    instant = quiet_plant.model_copy(update={"velocity_time_constant": 0.0})
    log = simulate_trajectory(instant, schedule((0.3, -1.0, 0.5), (1.0, (0.0, 0.0, 0.1))))

    np.testing.assert_allclose(_truth(log, "xdot", 3), 0.1)
    np.testing.assert_allclose(log.frame["x_prism_m"].to_numpy()[-1], 0.5 + 0.1 * 0.98)

    lagged = simulate_trajectory(quiet_plant, schedule((0.3, -1.0, 0.5), (1.0, (0.0, 0.0, 0.1))))
    speed = _truth(lagged, "xdot", 3)
    assert speed[0] < 0.1
    assert np.all(np.diff(speed) >= 0)
    assert speed[-1] == pytest.approx(0.1, rel=5e-3)


def test_clipping_at_joint_limits(quiet_plant):
    log = simulate_trajectory(quiet_plant, schedule((0.3, -1.0, 1.9), (2.0, (0.0, 0.0, 0.2))))

    assert log.frame["x_prism_m"].max() <= 2.0
    assert any("x_prism" in message for message in log.warnings)
    assert _truth(log, "xdot", 3)[-1] == 0.0


def test_initial_pose_clipped(quiet_plant):
    log = simulate_trajectory(quiet_plant, zero_schedule(JointState(theta1=1.5, theta2=-1.0, x_prism=0.0)))

    assert log.frame["theta1_rad"].iloc[0] == 1.2
    assert any("initial pose" in message for message in log.warnings)


def test_invalid_sample_period(plant, mixed_schedule):
    with pytest.raises(DomainError):
        simulate_trajectory(plant, mixed_schedule, dt=0.0)


def test_planted_law_branches(plant):
    assert planted_working_pressure(plant, 1, 4e4, 0.0, 0.0) == 0.0
    extend = planted_working_pressure(plant, 1, 4e4, 0.03, 6e-4)
    retract = planted_working_pressure(plant, 1, 4e4, -0.03, -4e-4)
    assert extend > retract >= 0.0

    p_a, p_b, working = planted_side_pressures(plant, 2, 3e4, 0.02, 2e-4)
    assert (p_a, p_b) == (working, plant.back_pressure)
    p_a, p_b, working = planted_side_pressures(plant, 2, 3e4, -0.02, -1e-4)
    assert (p_a, p_b) == (plant.back_pressure, working)

    cyl = plant.geometry.cylinder(3)
    p_a, p_b, working = planted_side_pressures(plant, 3, 5e3, 0.0, 0.0)
    assert working == 0.0
    assert p_a * cyl.area_A - p_b * cyl.area_B == pytest.approx(5e3)


def test_suite_schedules_stay_inside_limits(plant, schedules):
    limits = np.array(plant.geometry.joint_limits)
    assert list(schedules) == list(EXPERIMENTS)
    for sched in schedules.values():
        pose = np.array(sched.initial.as_tuple())
        for segment in sched.segments:
            pose = pose + segment.duration * np.array(segment.velocity)
            assert np.all(pose >= limits[:, 0] - 1e-9) and np.all(pose <= limits[:, 1] + 1e-9)


def test_experiment_one_keeps_extension_retracted(plant, schedules):
    assert schedules["I"].initial.x_prism == 0.0
    assert all(segment.velocity[2] == 0.0 for segment in schedules["I"].segments)
    assert any(segment.velocity[1] < 0 for segment in schedules["I"].segments)


def test_experiment_five_balances_working_pressures(plant, schedules):
    head = schedules["V"].segments[:2]
    pose = _pose_after(schedules["V"].initial, head)
    speed = balanced_prism_speed(plant, pose, 0.02)

    assert 2 * plant.epsilon < speed < 0.5
    assert schedules["V"].segments[2].velocity == (0.02, 0.0, speed)
    assert _true_working_pressure(plant, pose, 3, speed) == pytest.approx(
        _true_working_pressure(plant, pose, 1, 0.02), abs=1.0
    )


@pytest.mark.parametrize("name, lone, segments", [("III", 2, ("III-A",)), ("III", 1, ("III-C",)),
                                                  ("IV", 2, ("IV-A",)), ("IV", 3, ("IV-C",))])
def test_single_actuator_segments_are_dominated_by_it(plant, schedules, name, lone, segments):
    log = simulate_trajectory(plant, schedules[name], seed=1, name=name)
    frame = log.frame
    start = frame.groupby("segment")["time_s"].transform("min")
    settled = frame["segment"].isin(segments) & (frame["time_s"] - start >= 1.0)

    assert settled.sum() > 50
    np.testing.assert_array_equal(frame.loc[settled, "true_demand_argmax"], lone)


def test_experiment_three_hands_over_once(plant, schedules):
    log = simulate_trajectory(plant, schedules["III"], seed=2, name="III")
    dominating = log.frame["true_demand_argmax"].to_numpy()
    dominating = dominating[dominating != 0]

    assert dominating[0] == 2
    assert dominating[-1] == 1
    assert np.count_nonzero(np.diff(dominating)) == 1


def _handovers(log):
    """Dominating actuator per run of consecutive samples, standby samples dropped."""
    dominating = log.frame["true_demand_argmax"].to_numpy()
    dominating = dominating[dominating != 0]
    return dominating[np.r_[True, np.diff(dominating) != 0]].tolist()


@pytest.fixture(scope="module")
def quiet_suite(quiet_plant):
    return experiment_suite(quiet_plant, 0.02, seed=0)


def test_suite_clamps_some_retraction_to_zero(quiet_suite):
    clamped = 0
    for log in quiet_suite.values():
        for actuator_id in ACTUATOR_IDS:
            retracting = _truth(log, "direction", actuator_id) == Direction.RETRACT.value
            clamped += int(np.sum(_truth(log, "p_work", actuator_id)[retracting] == 0.0))

    assert clamped > 0


def test_experiment_four_hands_over_from_jib_to_extension(quiet_suite):
    assert _handovers(quiet_suite["IV"]) == [2, 3]


def test_experiment_five_hands_over_extension_boom_extension(quiet_suite):
    assert _handovers(quiet_suite["V"]) == [3, 1, 3]


def test_experiment_five_working_pressures_meet(quiet_suite):
    frame = quiet_suite["V"].frame
    segment = frame["segment"] == "V-C"
    end = frame.loc[segment, "time_s"].max()
    tail = segment & (frame["time_s"] >= end - 1.0)
    boom = frame.loc[tail, "true_p_work_1_pa"].mean()
    extension = frame.loc[tail, "true_p_work_3_pa"].mean()

    assert tail.sum() > 40
    assert abs(boom - extension) / (0.5 * (boom + extension)) < 0.1
