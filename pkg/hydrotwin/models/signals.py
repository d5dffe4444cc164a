"""
Signal and feature models: motion direction, filter settings, flow samples,
signal logs and feature tables.
"""
from dataclasses import dataclass, field
from enum import Enum
from typing import List, Optional, Tuple

import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict, Field, model_validator


ACTUATOR_IDS = (1, 2, 3)

TIME_COLUMN = "time_s"
JOINT_COLUMNS = ("theta1_rad", "theta2_rad", "x_prism_m")
PUMP_COLUMN = "p_pump_pa"


def pressure_columns(actuator_id: int) -> Tuple[str, str]:
    """Piston-side and rod-side pressure column names of an actuator."""
    return f"p_A_{actuator_id}_pa", f"p_B_{actuator_id}_pa"


def command_column(actuator_id: int) -> str:
    """Optional valve command column (mA, metadata only)."""
    return f"u_cmd_{actuator_id}_ma"


def mandatory_columns(require_pressures: bool = True) -> List[str]:
    """Columns every signal log must carry."""
    columns = [TIME_COLUMN, *JOINT_COLUMNS]
    if require_pressures:
        for actuator_id in ACTUATOR_IDS:
            columns.extend(pressure_columns(actuator_id))
        columns.append(PUMP_COLUMN)
    return columns


class Direction(str, Enum):
    """Cylinder motion direction."""
    EXTEND = "extend"
    HOLD = "hold"
    RETRACT = "retract"


class FlowSample(BaseModel):
    """Signed meter-in flow and the direction it was derived from."""

    model_config = ConfigDict(frozen=True)

    q: float = Field(..., description="m³/s, positive while extending")
    direction: Direction

    @model_validator(mode="after")
    def check_hold(self) -> "FlowSample":
        if (self.direction == Direction.HOLD) != (self.q == 0.0):
            raise ValueError("hold direction requires zero flow and vice versa")
        return self


class FilterSpec(BaseModel):
    """Savitzky-Golay differentiation settings."""

    model_config = ConfigDict(frozen=True)

    window: int = Field(default=11, ge=5, description="Odd sample count")
    poly_order: int = Field(default=3, ge=2)
    dt: float = Field(..., gt=0, description="Sample period (s)")

    @model_validator(mode="after")
    def check_window(self) -> "FilterSpec":
        if self.window % 2 == 0:
            raise ValueError("window must be odd")
        if self.poly_order >= self.window:
            raise ValueError("poly_order must be smaller than window")
        return self


@dataclass
class SignalLog:
    """
    Time-indexed crane measurements.

    The frame holds the mandatory columns (see mandatory_columns) plus any
    number of metadata columns, which are carried through unchanged.
    """

    dt: float
    frame: pd.DataFrame
    name: str = ""
    warnings: List[str] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.frame)

    @property
    def time(self) -> np.ndarray:
        return self.frame[TIME_COLUMN].to_numpy(dtype=float)

    @property
    def joint_states(self) -> np.ndarray:
        """(n, 3) array of theta1, theta2, x_prism."""
        return self.frame[list(JOINT_COLUMNS)].to_numpy(dtype=float)

    @property
    def has_pressures(self) -> bool:
        return all(column in self.frame.columns for column in mandatory_columns(True))

    def side_pressures(self, actuator_id: int) -> Tuple[np.ndarray, np.ndarray]:
        column_a, column_b = pressure_columns(actuator_id)
        return (
            self.frame[column_a].to_numpy(dtype=float),
            self.frame[column_b].to_numpy(dtype=float),
        )

    @property
    def pump_pressure(self) -> np.ndarray:
        return self.frame[PUMP_COLUMN].to_numpy(dtype=float)

    @property
    def metadata_columns(self) -> List[str]:
        known = set(mandatory_columns(True))
        return [column for column in self.frame.columns if column not in known]

    def column(self, name: str) -> Optional[np.ndarray]:
        """A metadata column as an array, or None if absent."""
        if name not in self.frame.columns:
            return None
        return self.frame[name].to_numpy()


def feature_columns(actuator_id: int) -> dict:
    """Names of the per-actuator feature columns."""
    return {
        "xdot": f"xdot_{actuator_id}_ms",
        "q_flow": f"q_flow_{actuator_id}_m3s",
        "f_static": f"f_static_{actuator_id}_n",
        "direction": f"direction_{actuator_id}",
        "p_work": f"p_work_{actuator_id}_pa",
        "f_total": f"f_total_{actuator_id}_n",
        "x_p": f"x_p_{actuator_id}_m",
    }


@dataclass
class FeatureTable:
    """Per-sample model features derived from a SignalLog."""

    frame: pd.DataFrame
    geometry_hash: str
    filter: FilterSpec
    epsilon: float
    source: str = ""

    def __len__(self) -> int:
        return len(self.frame)

    def values(self, actuator_id: int, key: str) -> np.ndarray:
        """Feature column of one actuator, e.g. values(1, "q_flow")."""
        column = feature_columns(actuator_id)[key]
        if key == "direction":
            return self.frame[column].to_numpy(dtype=object)
        return self.frame[column].to_numpy(dtype=float)

    @property
    def time(self) -> np.ndarray:
        return self.frame[TIME_COLUMN].to_numpy(dtype=float)

    @property
    def pump_pressure(self) -> Optional[np.ndarray]:
        if PUMP_COLUMN not in self.frame.columns:
            return None
        return self.frame[PUMP_COLUMN].to_numpy(dtype=float)
