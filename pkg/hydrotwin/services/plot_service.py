"""
Static plot files for evaluated logs: deterministic SVG figures plus a CSV of
the plotted series.
"""
import io
from pathlib import Path
from typing import TYPE_CHECKING, Union

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from hydrotwin.models.signals import ACTUATOR_IDS, PUMP_COLUMN, TIME_COLUMN, feature_columns  # noqa: E402
from hydrotwin.utils.file_utils import atomic_write  # noqa: E402
from hydrotwin.utils.logger import logger  # noqa: E402

if TYPE_CHECKING:
    from hydrotwin.pipeline.orchestrator import PressurePrediction


# Fixed ids in the SVG output so identical data gives identical files.
matplotlib.rcParams["svg.hashsalt"] = "hydrotwin"

MPA = 1e-6
KN = 1e-3
LPM = 6e4  # m³/s to l/min


def _save_svg(fig, path: Union[str, Path]) -> Path:
    buffer = io.StringIO()
    fig.savefig(buffer, format="svg", metadata={"Date": None})
    plt.close(fig)
    target = atomic_write(path, buffer.getvalue())
    logger.info(f"Wrote plot {target}")
    return target


def plot_working_pressures(
    prediction: "PressurePrediction",
    path: Union[str, Path],
    title: str = ""
) -> Path:
    """
    Four rows per actuator column: working pressures (measured and
    predicted), forces (measured total and static), piston velocities and
    piston positions.

    Args:
        prediction: Prediction of an evaluated log
        path: SVG file
        title: Figure title

    Returns:
        Written path
    """
    table = prediction.table
    time = table.time
    fig, axes = plt.subplots(4, len(ACTUATOR_IDS), figsize=(14, 11), sharex=True, constrained_layout=True)

    for actuator_id in ACTUATOR_IDS:
        j = actuator_id - 1
        ax_p, ax_f, ax_v, ax_x = axes[:, j]

        ax_p.set_title(f"Actuator {actuator_id}")
        ax_p.plot(time, table.values(actuator_id, "p_work") * MPA, color="0.6", lw=0.8, label="measured")
        ax_p.plot(time, prediction.working[:, j] * MPA, color="C0", lw=1.2, label="predicted")
        ax_p.set_ylabel("working pressure (MPa)")

        ax_f.plot(time, table.values(actuator_id, "f_total") * KN, color="0.6", lw=0.8, label="measured total")
        ax_f.plot(time, table.values(actuator_id, "f_static") * KN, color="C1", lw=1.2, label="static")
        ax_f.set_ylabel("force (kN)")

        ax_v.plot(time, table.values(actuator_id, "xdot"), color="C2", lw=1.0)
        ax_v.set_ylabel("piston speed (m/s)")

        ax_x.plot(time, table.values(actuator_id, "x_p"), color="C3", lw=1.0)
        ax_x.set_ylabel("piston position (m)")
        ax_x.set_xlabel("time (s)")

    axes[0, 0].legend(loc="upper right", fontsize="small")
    axes[1, 0].legend(loc="upper right", fontsize="small")
    if title:
        fig.suptitle(title)
    return _save_svg(fig, path)


def plot_pump_pressure(
    prediction: "PressurePrediction",
    path: Union[str, Path],
    title: str = ""
) -> Path:
    """Pump pressure (measured and predicted) above the actuator flows."""
    table = prediction.table
    time = table.time
    fig, (ax_p, ax_q) = plt.subplots(2, 1, figsize=(10, 6), sharex=True, constrained_layout=True)

    measured = table.pump_pressure
    if measured is not None:
        ax_p.plot(time, measured * MPA, color="0.6", lw=0.8, label="measured")
    ax_p.plot(time, prediction.pump * MPA, color="C0", lw=1.2, label="predicted")
    ax_p.set_ylabel("pump pressure (MPa)")
    ax_p.legend(loc="upper right", fontsize="small")

    for actuator_id in ACTUATOR_IDS:
        ax_q.plot(time, prediction.flows[:, actuator_id - 1] * LPM, lw=1.0, label=f"actuator {actuator_id}")
    ax_q.set_ylabel("flow (l/min)")
    ax_q.set_xlabel("time (s)")
    ax_q.legend(loc="upper right", fontsize="small")

    if title:
        fig.suptitle(title)
    return _save_svg(fig, path)


def write_series(prediction: "PressurePrediction", path: Union[str, Path]) -> Path:
    """CSV of every plotted series."""
    frame = prediction.to_frame()
    table = prediction.table
    for actuator_id in ACTUATOR_IDS:
        for key in ("p_work", "f_total", "xdot", "x_p"):
            frame[feature_columns(actuator_id)[key]] = table.values(actuator_id, key)
    if table.pump_pressure is not None:
        frame[PUMP_COLUMN] = table.pump_pressure
    frame = frame[[TIME_COLUMN] + [c for c in frame.columns if c != TIME_COLUMN]]
    return atomic_write(path, frame.to_csv(index=False))
