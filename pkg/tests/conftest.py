"""
Shared fixtures: default crane, synthetic plants and short schedules.
"""
from pathlib import Path

import numpy as np
import pytest

from hydrotwin.models.geometry import CraneGeometry, JointState
from hydrotwin.models.plant import CommandSchedule, NoiseSpec, ScheduleSegment, SyntheticPlantParams
from hydrotwin.services.synthetic_plant import default_geometry, default_plant, simulate_trajectory


FIXTURES = Path(__file__).parent / "fixtures"


def random_poses(geom: CraneGeometry, count: int, seed: int = 0, margin: float = 1e-3):
    """Joint states drawn uniformly inside the limits (shrunk by margin)."""
    rng = np.random.default_rng(seed)
    limits = np.array(geom.joint_limits)
    values = rng.uniform(limits[:, 0] + margin, limits[:, 1] - margin, size=(count, 3))
    return [JointState(theta1=v[0], theta2=v[1], x_prism=v[2]) for v in values]


def schedule(initial, *segments) -> CommandSchedule:
    """CommandSchedule from (duration, velocity) pairs."""
    return CommandSchedule(
        initial=JointState(theta1=initial[0], theta2=initial[1], x_prism=initial[2]),
        segments=[
            ScheduleSegment(duration=duration, velocity=velocity, label=f"seg{index}")
            for index, (duration, velocity) in enumerate(segments)
        ],
    )


@pytest.fixture(scope="session")
def geometry() -> CraneGeometry:
    return default_geometry()


@pytest.fixture(scope="session")
def plant() -> SyntheticPlantParams:
    return default_plant()


@pytest.fixture(scope="session")
def quiet_plant(plant) -> SyntheticPlantParams:
    """Default plant without sensor noise."""
    return plant.model_copy(update={"noise": NoiseSpec(pressure_std=0.0, angle_std=0.0, position_std=0.0)})


@pytest.fixture(scope="session")
def mixed_schedule() -> CommandSchedule:
    """Every actuator extends and retracts, then the crane stops."""
    return schedule(
        (0.3, -1.0, 0.5),
        (2.0, (0.05, 0.05, 0.1)),
        (2.0, (-0.05, -0.05, -0.1)),
        (2.0, (0.04, -0.04, 0.08)),
        (2.0, (-0.04, 0.04, -0.08)),
        (1.0, (0.0, 0.0, 0.0)),
    )


@pytest.fixture(scope="session")
def mixed_log(plant, mixed_schedule):
    return simulate_trajectory(plant, mixed_schedule, dt=0.02, seed=7, name="mixed")


@pytest.fixture(scope="session")
def still_log(quiet_plant):
    return simulate_trajectory(quiet_plant, schedule((0.3, -1.0, 0.5), (2.0, (0.0, 0.0, 0.0))), name="still")
