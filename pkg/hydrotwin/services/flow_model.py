"""
Flow features: meter-in flow from piston speed, its inverse, Savitzky-Golay
differentiation and direction classification.
"""
import numpy as np
from scipy.signal import savgol_filter

from hydrotwin.errors import DimensionError, DomainError
from hydrotwin.models.geometry import CylinderGeometry
from hydrotwin.models.signals import Direction, FilterSpec, FlowSample


DEFAULT_EPSILON = 1e-3


def classify_direction(xdot_p: float, epsilon: float = DEFAULT_EPSILON) -> Direction:
    """Extend above +epsilon, retract below -epsilon, hold in between (inclusive)."""
    if epsilon <= 0:
        raise DomainError(f"epsilon must be positive, got {epsilon}")
    if xdot_p > epsilon:
        return Direction.EXTEND
    if xdot_p < -epsilon:
        return Direction.RETRACT
    return Direction.HOLD


def meter_in_flow(cyl: CylinderGeometry, xdot_p: float, epsilon: float = DEFAULT_EPSILON) -> FlowSample:
    """
    Flow into the driving chamber under ideal continuity.

    Args:
        cyl: Cylinder geometry
        xdot_p: Piston speed (m/s)
        epsilon: Velocity deadband (m/s)

    Returns:
        FlowSample with q = count·A_A·xdot when extending, count·A_B·xdot when
        retracting and 0 in hold
    """
    direction = classify_direction(xdot_p, epsilon)
    if direction == Direction.EXTEND:
        q = cyl.count * cyl.area_A * xdot_p
    elif direction == Direction.RETRACT:
        q = cyl.count * cyl.area_B * xdot_p
    else:
        q = 0.0
    return FlowSample(q=q, direction=direction)


def rate_from_flow(cyl: CylinderGeometry, q: float) -> float:
    """Piston speed (m/s) for a signed meter-in flow (m³/s)."""
    if q > 0:
        return q / (cyl.count * cyl.area_A)
    if q < 0:
        return q / (cyl.count * cyl.area_B)
    return 0.0


def sg_derivative(series: np.ndarray, spec: FilterSpec) -> np.ndarray:
    """
    First derivative by local least-squares polynomial fits.

    Edge samples use the polynomial fitted to the first/last full window.

    Args:
        series: Uniformly sampled signal
        spec: Window, polynomial order and sample period

    Returns:
        Derivative samples (signal units per second)
    """
    values = np.asarray(series, dtype=float)
    if values.ndim != 1:
        raise DimensionError("sg_derivative expects a 1-D series")
    if values.size < spec.window:
        raise DimensionError(f"series of {values.size} samples is shorter than window {spec.window}")
    return savgol_filter(values, spec.window, spec.poly_order, deriv=1, delta=spec.dt, mode="interp")
